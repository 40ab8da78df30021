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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "delaynet/eventprop.hpp"

namespace delaynet {

struct GradcheckOptions {
  int n_weight_coords = 64;
  int n_delay_coords = 64;
  std::uint64_t seed = 0;
  double rel_tol = 1e-3;
  double abs_tol = 1e-6;
  double eps_weight = 1e-6;
  double eps_delay = 1e-6;  // ms
  DelayMode mode = DelayMode::kInterpolated;
};

enum class CoordinateStatus { kPass, kFail, kSkipped };
const char* to_string(CoordinateStatus status);

struct CoordinateCheck {
  bool is_delay = false;
  int projection = 0;
  int row = 0;
  int col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  CoordinateStatus status = CoordinateStatus::kSkipped;

  std::string name() const;
};

struct GradcheckReport {
  std::vector<CoordinateCheck> coords;
  int passed = 0;
  int failed = 0;
  int skipped = 0;

  // Fraction of non-skipped coordinates within tolerance (1 when none ran).
  double pass_fraction() const;
  void write_csv(std::ostream& out) const;
  std::string summary() const;
};

// Compares backward() against central differences of loss + reg_loss on
// randomly sampled weight and delay coordinates. A coordinate whose
// perturbation moves any spike to a different step is skipped: the finite
// difference straddles a discontinuity there.
GradcheckReport gradcheck(const Network& net, std::span<const InputSpike> input, int label,
                          const LossConfig& cfg, const GradcheckOptions& options);

// |a - n| / max(|a|, |n|), 0 when both vanish.
double relative_error(double analytic, double numeric);

}  // namespace delaynet
