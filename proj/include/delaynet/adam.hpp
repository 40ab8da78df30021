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
#include <vector>

#include "delaynet/eventprop.hpp"
#include "delaynet/model.hpp"

namespace delaynet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerConfig {
  double lr_weights = 1e-3;
  double lr_delays = 0.5;  // ms per step at unit normalised gradient
  AdamConfig adam;
  // Global L2 norm bound on the gradient; <= 0 disables clipping.
  double grad_clip = 0.0;
};

struct AdamState {
  std::vector<ProjectionGradient> m;
  std::vector<ProjectionGradient> v;
  std::int64_t step = 0;

  static AdamState zeros_like(const Network& net);
};

// Bias-corrected Adam on weights and trainable delays, followed by clamping
// every delay into [0, max_delay]. Throws Error(kDivergence) naming the first
// non-finite gradient entry.
void adam_step(Network& net, const Gradients& grads, AdamState& state, const OptimizerConfig& cfg);

}  // namespace delaynet
