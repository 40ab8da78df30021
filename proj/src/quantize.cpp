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

#include "delaynet/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "delaynet/error.hpp"

namespace delaynet {
namespace {

constexpr int kMaxFracBits = 30;

std::string proj_name(std::size_t j) { return "/net/proj" + std::to_string(j); }
std::string pop_name(std::size_t p) { return "/net/pop" + std::to_string(p); }

std::uint16_t quantize_decay(double factor, int bits) {
  const std::int64_t one = std::int64_t{1} << bits;
  const std::int64_t level = std::clamp<std::int64_t>(round_half_away(factor * one), 0, one - 1);
  return static_cast<std::uint16_t>(level);
}

}  // namespace

void FixedPointConfig::validate() const {
  if (weight_bits < 2 || weight_bits > 16) {
    throw Error(ErrorKind::kInvalidArgument, "weight_bits must lie in [2, 16]");
  }
  if (decay_bits < 1 || decay_bits > 16) {
    throw Error(ErrorKind::kInvalidArgument, "decay_bits must lie in [1, 16]");
  }
  if (threshold_bits < 2 || threshold_bits > state_bits) {
    throw Error(ErrorKind::kInvalidArgument, "threshold_bits must lie in [2, state_bits]");
  }
  if (state_bits > 32 || accumulator_bits < state_bits || accumulator_bits > 48) {
    throw Error(ErrorKind::kInvalidArgument,
                "need state_bits <= 32 and state_bits <= accumulator_bits <= 48");
  }
}

std::int64_t round_half_away(double x) {
  if (!std::isfinite(x) || std::fabs(x) > 9.0e18) {
    throw Error(ErrorKind::kOverflow, "value out of integer range during quantization");
  }
  return std::llround(x);
}

std::int64_t rounding_shift(std::int64_t x, int bits) {
  if (bits == 0) return x;
  const std::int64_t half = std::int64_t{1} << (bits - 1);
  return x >= 0 ? (x + half) >> bits : -((-x + half) >> bits);
}

int QuantizedModel::population_index(const std::string& id) const {
  for (std::size_t p = 0; p < populations.size(); ++p) {
    if (populations[p].id == id) return static_cast<int>(p);
  }
  return -1;
}

void QuantizedModel::validate() const {
  fixed.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::kFormat, "/net: dt must be positive");
  }
  if (n_timesteps < 1) throw Error(ErrorKind::kFormat, "/net: n_timesteps must be >= 1");
  if (populations.empty()) throw Error(ErrorKind::kFormat, "/net: no populations");
  const std::int64_t threshold_max = (std::int64_t{1} << (fixed.threshold_bits - 1)) - 1;
  const std::uint32_t decay_max = (1u << fixed.decay_bits) - 1;
  int n_input = 0;
  int n_output = 0;
  for (std::size_t p = 0; p < populations.size(); ++p) {
    const auto& pop = populations[p];
    const std::string where = pop_name(p);
    if (pop.size < 1) throw Error(ErrorKind::kFormat, where + ": size must be >= 1");
    if (population_index(pop.id) != static_cast<int>(p)) {
      throw Error(ErrorKind::kFormat, where + ": duplicate population id '" + pop.id + "'");
    }
    n_input += pop.kind == PopulationKind::kInput;
    n_output += pop.kind == PopulationKind::kOutput;
    if (pop.kind == PopulationKind::kInput) continue;
    if (pop.decay_v > decay_max || pop.decay_i > decay_max) {
      throw Error(ErrorKind::kConstraint, where + ": decay factor exceeds " +
                                              std::to_string(fixed.decay_bits) + " bits");
    }
    if (pop.threshold_q < 1 || pop.threshold_q > threshold_max ||
        std::abs(static_cast<std::int64_t>(pop.reset_q)) > threshold_max ||
        pop.reset_q >= pop.threshold_q) {
      throw Error(ErrorKind::kConstraint, where + ": threshold/reset out of fixed-point range");
    }
    if (!(pop.state_scale > 0.0) || !std::isfinite(pop.state_scale) || pop.frac_bits < 0 ||
        pop.frac_bits > kMaxFracBits) {
      throw Error(ErrorKind::kConstraint, where + ": invalid state scale");
    }
  }
  if (n_input != 1 || n_output != 1) {
    throw Error(ErrorKind::kFormat, "/net: need exactly one input and one output population");
  }
  const std::int64_t wmax = fixed.weight_max();
  for (std::size_t j = 0; j < projections.size(); ++j) {
    const auto& proj = projections[j];
    const std::string where = proj_name(j);
    const int s = population_index(proj.source);
    const int t = population_index(proj.target);
    if (s < 0 || t < 0) {
      throw Error(ErrorKind::kFormat, where + ": unknown source or target population");
    }
    if (populations[t].kind == PopulationKind::kInput ||
        populations[s].kind == PopulationKind::kOutput) {
      throw Error(ErrorKind::kFormat, where + ": invalid projection direction");
    }
    const auto rows = static_cast<std::size_t>(populations[s].size);
    const auto cols = static_cast<std::size_t>(populations[t].size);
    if (proj.weights.rows() != rows || proj.weights.cols() != cols ||
        proj.delays.rows() != rows || proj.delays.cols() != cols) {
      throw Error(ErrorKind::kFormat, where + ": tensor shape does not match populations");
    }
    if (!(proj.scale > 0.0) || !std::isfinite(proj.scale)) {
      throw Error(ErrorKind::kConstraint, where + "/scale: must be positive");
    }
    if (proj.multiplier < 0) {
      throw Error(ErrorKind::kConstraint, where + "/multiplier: must be non-negative");
    }
    const auto w = proj.weights.flat();
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (std::abs(static_cast<std::int64_t>(w[k])) > wmax) {
        throw Error(ErrorKind::kConstraint, where + "/weights: weight out of range at index " +
                                                std::to_string(k));
      }
    }
    const auto d = proj.delays.flat();
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (d[k] > kMaxDelaySteps) {
        throw Error(ErrorKind::kConstraint, where + "/delays: delay out of range (" +
                                                std::to_string(d[k]) + " > " +
                                                std::to_string(kMaxDelaySteps) + ") at index " +
                                                std::to_string(k));
      }
    }
  }
}

QuantizedModel quantize(const Network& net, double tau_loss, const FixedPointConfig& fixed) {
  fixed.validate();
  QuantizedModel model;
  model.dt = net.dt();
  model.n_timesteps = net.n_timesteps();
  model.tau_loss = tau_loss;
  model.fixed = fixed;
  const double wmax = static_cast<double>(fixed.weight_max());

  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    const auto& src = net.projection(j);
    QuantizedProjection q;
    q.source = src.source;
    q.target = src.target;
    double max_abs = 0.0;
    for (double w : src.weights.flat()) max_abs = std::max(max_abs, std::fabs(w));
    q.scale = max_abs > 0.0 ? max_abs / wmax : 1.0;
    q.weights = Matrix<std::int16_t>(src.weights.rows(), src.weights.cols());
    q.delays = Matrix<std::uint8_t>(src.delays.rows(), src.delays.cols());
    const auto w = src.weights.flat();
    const auto d = src.delays.flat();
    auto wq = q.weights.flat();
    auto dq = q.delays.flat();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double ratio = max_abs > 0.0 ? w[k] * wmax / max_abs : 0.0;
      const auto level = std::clamp<std::int64_t>(round_half_away(ratio), -fixed.weight_max(),
                                                  fixed.weight_max());
      wq[k] = static_cast<std::int16_t>(level);
      const auto steps = std::clamp<std::int64_t>(round_half_away(d[k] / net.dt()), 0,
                                                  kMaxDelaySteps);
      dq[k] = static_cast<std::uint8_t>(steps);
    }
    model.projections.push_back(std::move(q));
  }

  const std::int64_t threshold_max = (std::int64_t{1} << (fixed.threshold_bits - 1)) - 1;
  for (std::size_t p = 0; p < net.n_populations(); ++p) {
    const auto& spec = net.population(p);
    QuantizedPopulation q;
    q.id = spec.id;
    q.kind = spec.kind;
    q.size = spec.size;
    q.neuron = spec.neuron;
    q.decay_v = quantize_decay(net.decay(p).alpha, fixed.decay_bits);
    q.decay_i = quantize_decay(net.decay(p).beta, fixed.decay_bits);
    if (spec.kind != PopulationKind::kInput) {
      double s_ref = 0.0;
      for (std::size_t j = 0; j < net.n_projections(); ++j) {
        if (net.target_of(j) != static_cast<int>(p)) continue;
        bool nonzero = false;
        for (auto w : model.projections[j].weights.flat()) nonzero |= w != 0;
        if (nonzero) s_ref = std::max(s_ref, model.projections[j].scale);
      }
      if (s_ref == 0.0) s_ref = 1.0;
      const auto fits = [&](int f) {
        const double unit = std::ldexp(1.0, f) / s_ref;
        return std::fabs(spec.neuron.v_threshold * unit) <= threshold_max - 0.5 &&
               std::fabs(spec.neuron.v_reset * unit) <= threshold_max - 0.5;
      };
      int f = 0;
      while (f < kMaxFracBits && fits(f + 1)) ++f;
      q.frac_bits = f;
      q.state_scale = std::ldexp(s_ref, -f);
      q.threshold_q = static_cast<std::int32_t>(
          std::clamp<std::int64_t>(round_half_away(spec.neuron.v_threshold / q.state_scale), 1,
                                   threshold_max));
      q.reset_q = static_cast<std::int32_t>(std::clamp<std::int64_t>(
          round_half_away(spec.neuron.v_reset / q.state_scale), -threshold_max,
          q.threshold_q - 1));
    }
    model.populations.push_back(std::move(q));
  }

  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    auto& q = model.projections[j];
    const auto& target = model.populations[static_cast<std::size_t>(net.target_of(j))];
    bool nonzero = false;
    for (auto w : q.weights.flat()) nonzero |= w != 0;
    const std::int64_t m = nonzero ? round_half_away(q.scale / target.state_scale) : 0;
    if (m > std::numeric_limits<std::int32_t>::max()) {
      throw Error(ErrorKind::kOverflow, proj_name(j) + ": weight multiplier exceeds 32 bits");
    }
    q.multiplier = static_cast<std::int32_t>(m);
  }
  model.validate();
  return model;
}

Matrix<double> dequantize_weights(const QuantizedProjection& proj) {
  Matrix<double> out(proj.weights.rows(), proj.weights.cols());
  const auto src = proj.weights.flat();
  auto dst = out.flat();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = proj.scale * src[k];
  return out;
}

Network dequantize(const QuantizedModel& model) {
  model.validate();
  NetworkSpec spec;
  spec.dt = model.dt;
  spec.n_timesteps = model.n_timesteps;
  for (const auto& pop : model.populations) {
    spec.populations.push_back({pop.id, pop.size, pop.kind, pop.neuron});
  }
  for (const auto& proj : model.projections) {
    ProjectionSpec p;
    p.source = proj.source;
    p.target = proj.target;
    p.weights = dequantize_weights(proj);
    p.delays = Matrix<double>(proj.delays.rows(), proj.delays.cols());
    const auto d = proj.delays.flat();
    auto out = p.delays.flat();
    for (std::size_t k = 0; k < d.size(); ++k) out[k] = d[k] * model.dt;
    p.max_delay = kMaxDelaySteps * model.dt;
    spec.projections.push_back(std::move(p));
  }
  return build_network(std::move(spec));
}

}  // namespace delaynet
