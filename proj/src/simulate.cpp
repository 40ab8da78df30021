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

#include "delaynet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "delaynet/error.hpp"

namespace delaynet {

const char* to_string(DelayMode mode) {
  return mode == DelayMode::kRounded ? "rounded" : "interpolated";
}

void lif_step(LifState& state, std::span<const double> arrivals, const Decay& decay,
              const NeuronParams& params, bool spiking, std::vector<Crossing>& fired) {
  const double alpha = decay.alpha;
  const double beta = decay.beta;
  const std::size_t n = state.v.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double v_old = state.v[k];
    const double v_new = alpha * v_old + (1.0 - alpha) * state.i[k];
    const double i_new = beta * state.i[k] + arrivals[k];
    if (!std::isfinite(v_new) || !std::isfinite(i_new)) {
      throw Error(ErrorKind::kDivergence, "non-finite state at neuron " + std::to_string(k));
    }
    state.i[k] = i_new;
    if (spiking && v_new >= params.v_threshold) {
      const double rise = v_new - v_old;
      fired.push_back({static_cast<int>(k), (params.v_threshold - v_old) / rise, rise});
      state.v[k] = params.v_reset;
    } else {
      state.v[k] = v_new;
    }
  }
}

DelayRingBuffer::DelayRingBuffer(std::size_t n_targets, int n_slots)
    : n_targets_(n_targets), n_slots_(n_slots),
      slots_(static_cast<std::size_t>(n_slots) * n_targets, 0.0) {
  if (n_slots < 1) throw Error(ErrorKind::kInternal, "ring buffer needs at least one slot");
}

void DelayRingBuffer::add(int offset, std::size_t target, double weight) {
  if (offset < 1 || offset > n_slots_) {
    throw Error(ErrorKind::kInternal, "ring buffer offset " + std::to_string(offset) +
                                          " outside [1, " + std::to_string(n_slots_) + "]");
  }
  const auto slot = static_cast<std::size_t>((head_ + offset) % n_slots_);
  slots_[slot * n_targets_ + target] += weight;
  enqueued_ += weight;
}

void DelayRingBuffer::take(std::span<double> out) {
  double* slot = slots_.data() + static_cast<std::size_t>(head_) * n_targets_;
  for (std::size_t k = 0; k < n_targets_; ++k) {
    out[k] = slot[k];
    delivered_ += slot[k];
    slot[k] = 0.0;
  }
}

double DelayRingBuffer::pending() const {
  double sum = 0.0;
  for (double x : slots_) sum += x;
  return sum;
}

DelayTable::DelayTable(const Network& net) {
  steps_.reserve(net.n_projections());
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    const auto& delays = net.projection(j).delays;
    Matrix<int> steps(delays.rows(), delays.cols());
    const auto src = delays.flat();
    auto dst = steps.flat();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = net.delay_steps(src[k]);
    steps_.push_back(std::move(steps));
  }
}

std::uint64_t deliver(const Network& net, std::size_t j, std::span<const Emission> spikes,
                      const DelayTable& table, DelayMode mode, DelayRingBuffer& buffer) {
  const auto& proj = net.projection(j);
  const std::size_t n_tgt = proj.weights.cols();
  const double inv_dt = 1.0 / net.dt();
  for (const auto& spike : spikes) {
    const auto w = proj.weights.row(spike.neuron);
    if (mode == DelayMode::kRounded) {
      const auto steps = table.steps(j).row(spike.neuron);
      for (std::size_t k = 0; k < n_tgt; ++k) buffer.add(1 + steps[k], k, w[k]);
    } else {
      const auto d = proj.delays.row(spike.neuron);
      for (std::size_t k = 0; k < n_tgt; ++k) {
        const double pos = 1.0 + spike.phase + d[k] * inv_dt;
        const double base = std::floor(pos);
        const double frac = pos - base;
        const int offset = static_cast<int>(base);
        buffer.add(offset, k, (1.0 - frac) * w[k]);
        if (frac > 0.0) buffer.add(offset + 1, k, frac * w[k]);
      }
    }
  }
  return static_cast<std::uint64_t>(spikes.size()) * n_tgt;
}

namespace {

int ring_slots(const Network& net, DelayMode mode) {
  if (mode == DelayMode::kRounded) return 1 + net.max_delay_steps();
  double max_steps = 0.0;
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    max_steps = std::max(max_steps, net.projection(j).max_delay / net.dt());
  }
  return 3 + static_cast<int>(std::ceil(max_steps));
}

}  // namespace

ForwardResult run_forward(const Network& net, std::span<const InputSpike> input,
                          int n_timesteps, const ForwardOptions& options) {
  const std::size_t n_pop = net.n_populations();
  const int in_pop = net.input_population();
  const int out_pop = net.output_population();
  const int n_in = net.population(in_pop).size;

  std::vector<InputSpike> sorted(input.begin(), input.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& s : sorted) {
    if (s.step < 0 || s.step >= n_timesteps || s.channel < 0 || s.channel >= n_in) {
      throw Error(ErrorKind::kInvalidArgument,
                  "input spike (" + std::to_string(s.step) + ", " + std::to_string(s.channel) +
                      ") outside horizon or channel range");
    }
  }

  ForwardResult result;
  auto& record = result.record;
  record.n_timesteps = n_timesteps;
  record.dt = net.dt();
  record.mode = options.mode;
  record.counts.resize(n_pop);
  for (std::size_t p = 0; p < n_pop; ++p) {
    if (static_cast<int>(p) != out_pop) record.counts[p].assign(net.population(p).size, 0);
  }
  const auto n_out = static_cast<std::size_t>(net.population(out_pop).size);
  result.trace.voltages = Matrix<double>(static_cast<std::size_t>(n_timesteps), n_out);

  const DelayTable table(net);
  const int n_slots = ring_slots(net, options.mode);
  std::vector<LifState> states;
  std::vector<DelayRingBuffer> buffers;
  std::vector<std::vector<double>> arrivals(n_pop);
  std::vector<std::vector<Crossing>> fired(n_pop);
  std::vector<std::vector<Emission>> emissions(n_pop);
  for (std::size_t p = 0; p < n_pop; ++p) {
    const auto n = static_cast<std::size_t>(net.population(p).size);
    states.emplace_back(static_cast<int>(p) == in_pop ? 0 : n);
    buffers.emplace_back(static_cast<int>(p) == in_pop ? 0 : n, n_slots);
    arrivals[p].assign(n, 0.0);
  }

  auto& stats = result.stats;
  std::size_t next_input = 0;
  for (int t = 0; t < n_timesteps; ++t) {
    for (std::size_t p = 0; p < n_pop; ++p) {
      fired[p].clear();
      if (static_cast<int>(p) == in_pop) {
        while (next_input < sorted.size() && sorted[next_input].step == t) {
          fired[p].push_back({sorted[next_input].channel, 0.0, 0.0});
          ++next_input;
        }
        continue;
      }
      const auto& pop = net.population(p);
      buffers[p].take(arrivals[p]);
      try {
        lif_step(states[p], arrivals[p], net.decay(p), pop.neuron,
                 pop.kind == PopulationKind::kHidden, fired[p]);
      } catch (const Error& e) {
        throw Error(ErrorKind::kDivergence, "step " + std::to_string(t) + ", population " +
                                                std::to_string(p) + ": " + e.what());
      }
      stats.neuron_updates += static_cast<std::uint64_t>(pop.size);
      if (pop.kind == PopulationKind::kHidden) {
        stats.hidden_neuron_updates += static_cast<std::uint64_t>(pop.size);
      }
    }

    for (std::size_t p = 0; p < n_pop; ++p) {
      emissions[p].clear();
      for (const auto& c : fired[p]) {
        record.events.push_back({t, static_cast<int>(p), c.neuron, c.phase, c.rise});
        ++record.counts[p][c.neuron];
        emissions[p].push_back({c.neuron, c.phase});
      }
    }
    for (std::size_t p = 0; p < n_pop; ++p) {
      if (emissions[p].empty()) continue;
      for (int j : net.outgoing(p)) {
        stats.synaptic_events += deliver(net, j, emissions[p], table, options.mode,
                                         buffers[net.target_of(j)]);
      }
    }
    for (auto& b : buffers) b.advance();

    auto row = result.trace.voltages.row(static_cast<std::size_t>(t));
    std::copy(states[out_pop].v.begin(), states[out_pop].v.end(), row.begin());
  }

  for (const auto& b : buffers) {
    stats.enqueued += b.enqueued();
    stats.delivered += b.delivered();
    stats.pending += b.pending();
  }
  return result;
}

std::vector<double> readout_scores(const OutputTrace& trace, double tau_loss, double dt) {
  const auto& v = trace.voltages;
  std::vector<double> scores(v.cols(), 0.0);
  for (std::size_t t = 0; t < v.rows(); ++t) {
    const double weight = std::exp(-static_cast<double>(t) * dt / tau_loss) * dt;
    const auto row = v.row(t);
    for (std::size_t k = 0; k < scores.size(); ++k) scores[k] += row[k] * weight;
  }
  return scores;
}

int predicted_class(std::span<const double> scores) {
  if (scores.empty()) return -1;
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

void write_raster(std::ostream& out, const SpikeRecord& record) {
  for (const auto& e : record.events) {
    out << e.step << '\t' << e.population << '\t' << e.neuron << '\n';
  }
}

void write_trace_csv(std::ostream& out, const OutputTrace& trace) {
  const auto& v = trace.voltages;
  out << "t";
  for (std::size_t k = 0; k < v.cols(); ++k) out << ",v" << k;
  out << '\n';
  out.precision(17);
  for (std::size_t t = 0; t < v.rows(); ++t) {
    out << t;
    for (double x : v.row(t)) out << ',' << x;
    out << '\n';
  }
}

}  // namespace delaynet
