// Copyright 2026 The delaynet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "delaynet/emulator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "delaynet/error.hpp"
#include "parallel.hpp"

namespace delaynet {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void mix(std::uint64_t& h, std::int64_t value) {
  auto u = static_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) {
    h ^= (u >> (8 * b)) & 0xff;
    h *= kFnvPrime;
  }
}

[[noreturn]] void overflow(const char* what, int t, std::size_t p, std::size_t n) {
  throw Error(ErrorKind::kOverflow, std::string(what) + " overflow at step " + std::to_string(t) +
                                        ", population " + std::to_string(p) + ", neuron " +
                                        std::to_string(n) + "; the model needs rescaling");
}

// Integer delay ring: slot (head + offset) % size collects input for the step
// `offset` steps ahead.
struct IntRing {
  IntRing(std::size_t n, int slots) : n_targets(n), n_slots(slots), data(n * slots, 0) {}
  std::size_t n_targets;
  int n_slots;
  int head = 0;
  std::vector<std::int64_t> data;

  std::int64_t& at(int offset, std::size_t target) {
    return data[static_cast<std::size_t>((head + offset) % n_slots) * n_targets + target];
  }
};

}  // namespace

EmulationResult emulate_fixed_point(const QuantizedModel& model,
                                    std::span<const InputSpike> input, int n_timesteps) {
  const auto& fx = model.fixed;
  const std::size_t n_pop = model.populations.size();
  int in_pop = -1;
  int out_pop = -1;
  for (std::size_t p = 0; p < n_pop; ++p) {
    if (model.populations[p].kind == PopulationKind::kInput) in_pop = static_cast<int>(p);
    if (model.populations[p].kind == PopulationKind::kOutput) out_pop = static_cast<int>(p);
  }
  if (in_pop < 0 || out_pop < 0) {
    throw Error(ErrorKind::kFormat, "model needs one input and one output population");
  }
  if (n_timesteps < 1) throw Error(ErrorKind::kInvalidArgument, "n_timesteps must be >= 1");
  const int n_in = model.populations[in_pop].size;
  std::vector<InputSpike> sorted(input.begin(), input.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& s : sorted) {
    if (s.step < 0 || s.step >= n_timesteps || s.channel < 0 || s.channel >= n_in) {
      throw Error(ErrorKind::kInvalidArgument,
                  "input spike (" + std::to_string(s.step) + ", " + std::to_string(s.channel) +
                      ") outside horizon or channel range");
    }
  }

  std::vector<int> src(model.projections.size());
  std::vector<int> dst(model.projections.size());
  std::vector<std::vector<std::size_t>> outgoing(n_pop);
  for (std::size_t j = 0; j < model.projections.size(); ++j) {
    src[j] = model.population_index(model.projections[j].source);
    dst[j] = model.population_index(model.projections[j].target);
    outgoing[static_cast<std::size_t>(src[j])].push_back(j);
  }

  const std::int64_t acc_max = (std::int64_t{1} << (fx.accumulator_bits - 1)) - 1;
  const std::int64_t state_max = (std::int64_t{1} << (fx.state_bits - 1)) - 1;
  const std::int64_t one = std::int64_t{1} << fx.decay_bits;
  const int n_slots = kMaxDelaySteps + 1;

  std::vector<std::vector<std::int64_t>> v(n_pop);
  std::vector<std::vector<std::int64_t>> cur(n_pop);
  std::vector<IntRing> rings;
  std::vector<std::vector<int>> fired(n_pop);
  for (std::size_t p = 0; p < n_pop; ++p) {
    const auto n = static_cast<std::size_t>(model.populations[p].size);
    const bool neurons = static_cast<int>(p) != in_pop;
    v[p].assign(neurons ? n : 0, 0);
    cur[p].assign(neurons ? n : 0, 0);
    rings.emplace_back(neurons ? n : 0, n_slots);
  }

  EmulationResult result;
  auto& record = result.record;
  record.n_timesteps = n_timesteps;
  record.dt = model.dt;
  record.mode = DelayMode::kRounded;
  record.counts.resize(n_pop);
  for (std::size_t p = 0; p < n_pop; ++p) {
    if (static_cast<int>(p) != out_pop) record.counts[p].assign(model.populations[p].size, 0);
  }
  const auto n_out = static_cast<std::size_t>(model.populations[out_pop].size);
  result.output_state = Matrix<std::int32_t>(static_cast<std::size_t>(n_timesteps), n_out);
  std::uint64_t digest = kFnvOffset;

  std::size_t next_input = 0;
  for (int t = 0; t < n_timesteps; ++t) {
    for (std::size_t p = 0; p < n_pop; ++p) {
      fired[p].clear();
      if (static_cast<int>(p) == in_pop) {
        while (next_input < sorted.size() && sorted[next_input].step == t) {
          fired[p].push_back(sorted[next_input].channel);
          ++next_input;
        }
        continue;
      }
      const auto& pop = model.populations[p];
      const bool spiking = pop.kind == PopulationKind::kHidden;
      auto& ring = rings[p];
      for (std::size_t k = 0; k < v[p].size(); ++k) {
        std::int64_t& slot = ring.at(0, k);
        const std::int64_t i_new = rounding_shift(pop.decay_i * cur[p][k], fx.decay_bits) + slot;
        slot = 0;
        if (std::abs(i_new) > state_max) overflow("synaptic state", t, p, k);
        const std::int64_t v_new =
            rounding_shift(pop.decay_v * v[p][k] + (one - pop.decay_v) * cur[p][k], fx.decay_bits);
        if (std::abs(v_new) > state_max) overflow("membrane state", t, p, k);
        cur[p][k] = i_new;
        if (spiking && v_new >= pop.threshold_q) {
          fired[p].push_back(static_cast<int>(k));
          v[p][k] = pop.reset_q;
        } else {
          v[p][k] = v_new;
        }
        mix(digest, i_new);
        mix(digest, v[p][k]);
      }
      result.stats.neuron_updates += static_cast<std::uint64_t>(pop.size);
      if (spiking) result.stats.hidden_neuron_updates += static_cast<std::uint64_t>(pop.size);
    }

    for (std::size_t p = 0; p < n_pop; ++p) {
      for (int n : fired[p]) {
        record.events.push_back({t, static_cast<int>(p), n, 0.0, 0.0});
        ++record.counts[p][n];
      }
      for (std::size_t j : outgoing[p]) {
        const auto& proj = model.projections[j];
        auto& ring = rings[static_cast<std::size_t>(dst[j])];
        const std::int64_t m = proj.multiplier;
        for (int n : fired[p]) {
          const auto w = proj.weights.row(static_cast<std::size_t>(n));
          const auto d = proj.delays.row(static_cast<std::size_t>(n));
          for (std::size_t k = 0; k < w.size(); ++k) {
            std::int64_t& slot = ring.at(1 + d[k], k);
            slot += w[k] * m;
            if (std::abs(slot) > acc_max) overflow("accumulator", t, p, k);
          }
          result.stats.synaptic_events += w.size();
        }
      }
    }
    for (auto& r : rings) r.head = (r.head + 1) % r.n_slots;

    auto row = result.output_state.row(static_cast<std::size_t>(t));
    for (std::size_t k = 0; k < n_out; ++k) row[k] = static_cast<std::int32_t>(v[out_pop][k]);
  }

  const double scale = model.populations[out_pop].state_scale;
  result.trace.voltages = Matrix<double>(static_cast<std::size_t>(n_timesteps), n_out);
  const auto q = result.output_state.flat();
  auto volts = result.trace.voltages.flat();
  for (std::size_t k = 0; k < q.size(); ++k) volts[k] = q[k] * scale;
  const double tau = model.tau_loss > 0.0 ? model.tau_loss : n_timesteps * model.dt;
  result.scores = readout_scores(result.trace, tau, model.dt);
  result.predicted = predicted_class(result.scores);
  result.state_digest = digest;
  return result;
}

DatasetEmulation emulate_dataset(const QuantizedModel& model, std::span<const BinnedSample> data,
                                 int threads) {
  model.validate();
  DatasetEmulation out;
  out.predictions.assign(data.size(), -1);
  std::vector<EmulatorStats> partial(static_cast<std::size_t>(std::max(threads, 1)));
  const auto t0 = std::chrono::steady_clock::now();
  detail::parallel_chunks(data.size(), threads, [&](std::size_t b, std::size_t e, std::size_t w) {
    for (std::size_t s = b; s < e; ++s) {
      const auto r = emulate_fixed_point(model, data[s].spikes, data[s].n_timesteps);
      out.predictions[s] = r.predicted;
      partial[w].synaptic_events += r.stats.synaptic_events;
      partial[w].neuron_updates += r.stats.neuron_updates;
      partial[w].hidden_neuron_updates += r.stats.hidden_neuron_updates;
    }
  });
  out.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) correct += out.predictions[s] == data[s].label;
  out.accuracy = data.empty() ? 0.0 : static_cast<double>(correct) / data.size();
  for (const auto& p : partial) {
    out.stats.synaptic_events += p.synaptic_events;
    out.stats.neuron_updates += p.neuron_updates;
    out.stats.hidden_neuron_updates += p.hidden_neuron_updates;
  }
  return out;
}

std::vector<ParitySample> ParityReport::disagreements() const {
  std::vector<ParitySample> out;
  for (const auto& s : samples) {
    if (s.reference != s.candidate) out.push_back(s);
  }
  return out;
}

void ParityReport::write_csv(std::ostream& out) const {
  out << "index,label,float_prediction,quantized_prediction,agree\n";
  for (const auto& s : samples) {
    out << s.index << ',' << s.label << ',' << s.reference << ',' << s.candidate << ','
        << (s.reference == s.candidate ? 1 : 0) << '\n';
  }
}

std::string ParityReport::summary() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "samples=" << samples.size() << " float_acc=" << 100.0 * accuracy_reference
     << "% quant_acc=" << 100.0 * accuracy_candidate << "% agreement=" << 100.0 * agreement
     << "% disagreements=" << disagreements().size();
  return os.str();
}

ParityReport compare_predictions(std::span<const int> labels, std::span<const int> reference,
                                 std::span<const int> candidate) {
  if (labels.size() != reference.size() || labels.size() != candidate.size()) {
    throw Error(ErrorKind::kInvalidArgument, "prediction lists differ in length");
  }
  ParityReport report;
  std::size_t ref_ok = 0;
  std::size_t cand_ok = 0;
  std::size_t agree = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    report.samples.push_back({s, labels[s], reference[s], candidate[s]});
    ref_ok += reference[s] == labels[s];
    cand_ok += candidate[s] == labels[s];
    agree += reference[s] == candidate[s];
  }
  const double n = static_cast<double>(std::max<std::size_t>(labels.size(), 1));
  report.accuracy_reference = ref_ok / n;
  report.accuracy_candidate = cand_ok / n;
  report.agreement = labels.empty() ? 1.0 : agree / n;
  return report;
}

namespace {

std::vector<int> labels_of(std::span<const BinnedSample> data) {
  std::vector<int> labels;
  for (const auto& s : data) labels.push_back(s.label);
  return labels;
}

}  // namespace

ParityReport parity_report(const Network& float_net, const QuantizedModel& model,
                           std::span<const BinnedSample> data, int threads) {
  std::vector<int> reference(data.size(), -1);
  detail::parallel_chunks(data.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t s = b; s < e; ++s) {
      const auto fwd = run_forward(float_net, data[s].spikes, data[s].n_timesteps);
      const double tau = model.tau_loss > 0.0 ? model.tau_loss
                                              : data[s].n_timesteps * float_net.dt();
      reference[s] = predicted_class(readout_scores(fwd.trace, tau, float_net.dt()));
    }
  });
  const auto candidate = emulate_dataset(model, data, threads).predictions;
  return compare_predictions(labels_of(data), reference, candidate);
}

ParityReport parity_report(const QuantizedModel& reference, const QuantizedModel& model,
                           std::span<const BinnedSample> data, int threads) {
  const auto a = emulate_dataset(reference, data, threads).predictions;
  const auto b = emulate_dataset(model, data, threads).predictions;
  return compare_predictions(labels_of(data), a, b);
}

}  // namespace delaynet
