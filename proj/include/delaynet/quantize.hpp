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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delaynet/matrix.hpp"
#include "delaynet/model.hpp"

namespace delaynet {

inline constexpr int kMaxDelaySteps = 62;

struct FixedPointConfig {
  int weight_bits = 8;
  int decay_bits = 12;
  int threshold_bits = 16;
  int state_bits = 24;
  int accumulator_bits = 32;

  void validate() const;
  std::int64_t weight_max() const { return (std::int64_t{1} << (weight_bits - 1)) - 1; }

  friend bool operator==(const FixedPointConfig&, const FixedPointConfig&) = default;
};

struct QuantizedPopulation {
  std::string id;
  PopulationKind kind = PopulationKind::kHidden;
  int size = 0;
  NeuronParams neuron;
  std::uint16_t decay_v = 0;  // round(alpha * 2^decay_bits)
  std::uint16_t decay_i = 0;  // round(beta * 2^decay_bits)
  std::int32_t threshold_q = 0;
  std::int32_t reset_q = 0;
  // The state LSB is state_scale = s_ref / 2^frac_bits volts, where s_ref is
  // the largest weight scale among the incoming projections.
  int frac_bits = 0;
  double state_scale = 1.0;

  friend bool operator==(const QuantizedPopulation&, const QuantizedPopulation&) = default;
};

struct QuantizedProjection {
  std::string source;
  std::string target;
  // Stored widened; every entry lies in [-weight_max, weight_max].
  Matrix<std::int16_t> weights;
  Matrix<std::uint8_t> delays;  // timesteps, [0, 62]
  double scale = 1.0;
  // One weight unit expressed in target state LSBs: round(scale / state_scale).
  std::int32_t multiplier = 1;

  friend bool operator==(const QuantizedProjection&, const QuantizedProjection&) = default;
};

struct QuantizedModel {
  double dt = 1.0;
  int n_timesteps = 0;
  double tau_loss = 0.0;  // ms; <= 0 selects the sample duration
  FixedPointConfig fixed;
  std::vector<QuantizedPopulation> populations;
  std::vector<QuantizedProjection> projections;

  // Throws Error(kConstraint) or Error(kFormat) naming the offending object.
  void validate() const;
  int population_index(const std::string& id) const;

  friend bool operator==(const QuantizedModel&, const QuantizedModel&) = default;
};

// Round half away from zero.
std::int64_t round_half_away(double x);
// Arithmetic right shift with the same rounding rule.
std::int64_t rounding_shift(std::int64_t x, int bits);

QuantizedModel quantize(const Network& net, double tau_loss = 0.0,
                        const FixedPointConfig& fixed = {});

// Float weights the integer model stands for: scale * w_q.
Matrix<double> dequantize_weights(const QuantizedProjection& proj);

// Rebuilds a float network carrying the quantized weights and rounded delays.
Network dequantize(const QuantizedModel& model);

}  // namespace delaynet
