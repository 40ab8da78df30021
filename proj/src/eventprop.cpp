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

#include "delaynet/eventprop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delaynet/error.hpp"

namespace delaynet {

LossResult loss_and_seed(const OutputTrace& trace, int label, const LossConfig& cfg, double dt) {
  const auto& v = trace.voltages;
  if (label < 0 || static_cast<std::size_t>(label) >= v.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "label " + std::to_string(label) +
                                                 " out of range for " +
                                                 std::to_string(v.cols()) + " outputs");
  }
  const double tau = cfg.effective_tau_loss(static_cast<int>(v.rows()), dt);

  LossResult out;
  out.scores = readout_scores(trace, tau, dt);
  out.predicted = predicted_class(out.scores);
  const double max_score = *std::max_element(out.scores.begin(), out.scores.end());
  double norm = 0.0;
  out.probabilities.resize(out.scores.size());
  for (std::size_t k = 0; k < out.scores.size(); ++k) {
    out.probabilities[k] = std::exp(out.scores[k] - max_score);
    norm += out.probabilities[k];
  }
  for (double& p : out.probabilities) p /= norm;
  out.loss = -(out.scores[label] - max_score - std::log(norm));

  out.seeds = Matrix<double>(v.rows(), v.cols());
  for (std::size_t t = 0; t < v.rows(); ++t) {
    const double weight = std::exp(-static_cast<double>(t) * dt / tau) * dt;
    auto row = out.seeds.row(t);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double target = static_cast<int>(k) == label ? 1.0 : 0.0;
      row[k] = (out.probabilities[k] - target) * weight;
    }
  }
  return out;
}

RegularizationResult regularization(const Network& net, const SpikeRecord& record,
                                    const LossConfig& cfg) {
  RegularizationResult out;
  out.spike_time_gradient.resize(net.n_populations());
  const double duration_s = record.n_timesteps * record.dt * 1e-3;
  double rate_sum = 0.0;
  std::size_t n_hidden = 0;
  for (std::size_t p = 0; p < net.n_populations(); ++p) {
    if (net.population(p).kind != PopulationKind::kHidden) continue;
    const auto& counts = record.counts[p];
    auto& grad = out.spike_time_gradient[p];
    grad.resize(counts.size());
    for (std::size_t n = 0; n < counts.size(); ++n) {
      const double rate = counts[n] / duration_s;
      const double excess = rate - cfg.target_rate;
      out.loss += cfg.reg_strength * excess * excess;
      // Surrogate: delaying a spike by one step is treated as removing it.
      grad[n] = -2.0 * cfg.reg_strength * excess / duration_s;
      rate_sum += rate;
      ++n_hidden;
    }
  }
  out.mean_rate_hz = n_hidden > 0 ? rate_sum / static_cast<double>(n_hidden) : 0.0;
  return out;
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    const auto& w = net.projection(j).weights;
    g.projections.push_back({Matrix<double>(w.rows(), w.cols()),
                             Matrix<double>(w.rows(), w.cols())});
  }
  return g;
}

void Gradients::accumulate(const Gradients& other) {
  for (std::size_t j = 0; j < projections.size(); ++j) {
    auto w = projections[j].weights.flat();
    auto d = projections[j].delays.flat();
    const auto ow = other.projections[j].weights.flat();
    const auto od = other.projections[j].delays.flat();
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] += ow[k];
      d[k] += od[k];
    }
  }
  loss += other.loss;
  reg_loss += other.reg_loss;
}

void Gradients::scale(double factor) {
  for (auto& pg : projections) {
    for (double& x : pg.weights.flat()) x *= factor;
    for (double& x : pg.delays.flat()) x *= factor;
  }
  loss *= factor;
  reg_loss *= factor;
}

bool Gradients::all_finite() const {
  for (const auto& pg : projections) {
    for (double x : pg.weights.flat()) if (!std::isfinite(x)) return false;
    for (double x : pg.delays.flat()) if (!std::isfinite(x)) return false;
  }
  return std::isfinite(loss) && std::isfinite(reg_loss);
}

namespace {

// Adjoint state of one non-input population during the backward sweep.
struct AdjointPopulation {
  std::size_t n = 0;
  std::vector<double> carry_v;     // dL/dV(t), assembled while handling t + 1
  std::vector<double> lambda_i;    // dL/dI(t + 1)
  std::vector<double> jump_prev;   // spike-time terms landing on V(t - 1)
  std::vector<double> jump_tilde;  // spike-time terms on the pre-reset V(t)
  std::vector<double> tilde_next;  // dL/dV~(t + 1)
  std::vector<char> spiked;
  // dL/dI(s) for the next `window` steps, indexed s mod window. Because the
  // synaptic current receives arrivals additively this is also dL/d(arrival).
  std::vector<double> history;
};

}  // namespace

Gradients backward(const Network& net, const SpikeRecord& record, const Matrix<double>& seeds,
                   const LossConfig& cfg, BackwardStats* stats) {
  const int n_steps = record.n_timesteps;
  const int out_pop = net.output_population();
  const auto n_out = static_cast<std::size_t>(net.population(out_pop).size);
  if (seeds.rows() != static_cast<std::size_t>(n_steps) || seeds.cols() != n_out) {
    throw Error(ErrorKind::kInvalidArgument, "seed matrix shape does not match the record");
  }
  if (record.counts.size() != net.n_populations()) {
    throw Error(ErrorKind::kInvalidArgument, "spike record does not match the network");
  }

  double max_steps = 0.0;
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    max_steps = std::max(max_steps, net.projection(j).max_delay / net.dt());
  }
  // Furthest slot a spike at t can touch is t + 3 + ceil(max delay steps).
  const int window = 4 + static_cast<int>(std::ceil(max_steps));

  std::vector<AdjointPopulation> pops(net.n_populations());
  std::size_t aux_bytes = 0;
  for (std::size_t p = 0; p < pops.size(); ++p) {
    if (static_cast<int>(p) == net.input_population()) continue;
    auto& a = pops[p];
    a.n = static_cast<std::size_t>(net.population(p).size);
    a.carry_v.assign(a.n, 0.0);
    a.lambda_i.assign(a.n, 0.0);
    a.jump_prev.assign(a.n, 0.0);
    a.jump_tilde.assign(a.n, 0.0);
    a.tilde_next.assign(a.n, 0.0);
    a.spiked.assign(a.n, 0);
    a.history.assign(static_cast<std::size_t>(window) * a.n, 0.0);
    aux_bytes += (6 * a.n + a.history.size()) * sizeof(double);
  }

  const RegularizationResult reg = regularization(net, record, cfg);
  const DelayTable table(net);
  Gradients grads = Gradients::zeros_like(net);
  const double inv_dt = 1.0 / net.dt();
  std::uint64_t jump_ops = 0;

  auto lambda_at = [&](const AdjointPopulation& a, int s, std::size_t i) {
    if (s >= n_steps) return 0.0;
    return a.history[static_cast<std::size_t>(s % window) * a.n + i];
  };

  auto event = record.events.rbegin();
  for (int t = n_steps - 1; t >= 0; --t) {
    for (std::size_t p = 0; p < pops.size(); ++p) {
      auto& a = pops[p];
      std::fill(a.spiked.begin(), a.spiked.end(), 0);
      if (static_cast<int>(p) == out_pop) {
        const auto row = seeds.row(static_cast<std::size_t>(t));
        for (std::size_t k = 0; k < a.n; ++k) a.carry_v[k] += row[k];
      }
    }

    // Spikes emitted at t: gradient accumulation and the spike-time jump.
    for (; event != record.events.rend() && event->step == t; ++event) {
      const int p = event->population;
      const int n = event->neuron;
      const bool hidden = net.population(p).kind == PopulationKind::kHidden;
      double dl_dtime = 0.0;
      for (int j : net.outgoing(p)) {
        const auto& proj = net.projection(j);
        const auto& tgt = pops[net.target_of(j)];
        const auto w = proj.weights.row(n);
        const auto steps = table.steps(j).row(n);
        const auto d = proj.delays.row(n);
        auto gw = grads.projections[j].weights.row(n);
        auto gd = grads.projections[j].delays.row(n);
        for (std::size_t i = 0; i < tgt.n; ++i) {
          int slot;
          double frac = 0.0;
          if (record.mode == DelayMode::kRounded) {
            slot = t + 1 + steps[i];
          } else {
            const double pos = 1.0 + event->phase + d[i] * inv_dt;
            const double base = std::floor(pos);
            frac = pos - base;
            slot = t + static_cast<int>(base);
          }
          const double l0 = lambda_at(tgt, slot, i);
          const double l1 = lambda_at(tgt, slot + 1, i);
          gw[i] += (1.0 - frac) * l0 + frac * l1;
          const double slope = w[i] * (l1 - l0);
          if (proj.delays_trainable) gd[i] += slope * inv_dt;
          dl_dtime += slope;
        }
        jump_ops += tgt.n;
      }
      if (!hidden) continue;
      if (!(event->rise > 0.0) || !std::isfinite(event->phase)) {
        throw Error(ErrorKind::kInternal, "spike record lacks crossing state at step " +
                                              std::to_string(t) + ", neuron " +
                                              std::to_string(n));
      }
      dl_dtime += reg.spike_time_gradient[p][n];
      auto& a = pops[p];
      // phase = (theta - V(t-1)) / (V~(t) - V(t-1))
      a.spiked[n] = 1;
      a.jump_tilde[n] = -dl_dtime * event->phase / event->rise;
      a.jump_prev[n] += dl_dtime * (event->phase - 1.0) / event->rise;
    }

    // Transposed neuron update for every non-input population.
    for (std::size_t p = 0; p < pops.size(); ++p) {
      if (static_cast<int>(p) == net.input_population()) continue;
      auto& a = pops[p];
      const double alpha = net.decay(p).alpha;
      const double beta = net.decay(p).beta;
      double* hist = a.history.data() + static_cast<std::size_t>(t % window) * a.n;
      for (std::size_t k = 0; k < a.n; ++k) {
        // After a reset V(t) is constant, so only the spike-time terms remain.
        const double lam_tilde = a.spiked[k] ? a.jump_tilde[k] : a.carry_v[k];
        // I(t) reaches the membrane one step later, through V~(t+1).
        const double lam_i = (1.0 - alpha) * a.tilde_next[k] + beta * a.lambda_i[k];
        if (!std::isfinite(lam_i) || !std::isfinite(lam_tilde)) {
          throw Error(ErrorKind::kDivergence, "non-finite adjoint at step " + std::to_string(t) +
                                                  ", population " + std::to_string(p) +
                                                  ", neuron " + std::to_string(k));
        }
        a.lambda_i[k] = lam_i;
        a.tilde_next[k] = lam_tilde;
        hist[k] = lam_i;
        a.carry_v[k] = alpha * lam_tilde + a.jump_prev[k];
        a.jump_prev[k] = 0.0;
      }
    }
  }
  if (event != record.events.rend()) {
    throw Error(ErrorKind::kInternal, "spike record has events outside the horizon");
  }

  grads.reg_loss = reg.loss;
  if (stats != nullptr) {
    stats->jump_ops = jump_ops;
    stats->aux_bytes = aux_bytes;
  }
  return grads;
}

SampleGradient compute_sample_gradient(const Network& net, std::span<const InputSpike> input,
                                       int label, const LossConfig& cfg, DelayMode mode) {
  auto fwd = run_forward(net, input, net.n_timesteps(), {mode});
  SampleGradient out;
  out.loss = loss_and_seed(fwd.trace, label, cfg, net.dt());
  out.gradients = backward(net, fwd.record, out.loss.seeds, cfg);
  out.gradients.loss = out.loss.loss;
  out.reg = regularization(net, fwd.record, cfg);
  out.record = std::move(fwd.record);
  return out;
}

}  // namespace delaynet
