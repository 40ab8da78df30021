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

#include "delaynet/data.hpp"
#include "delaynet/model.hpp"
#include "delaynet/quantize.hpp"
#include "delaynet/train.hpp"

namespace delaynet {

// Initialisation ranges by projection role. Seeds are derived from the run
// seed and the projection index, so the `seed` fields here are ignored.
struct InitRoles {
  InitConfig input{0.0, 0.1, 0.0, 0.0, 0};        // input -> first hidden
  InitConfig feedforward{0.0, 0.1, 0.0, 0.0, 0};  // hidden -> next hidden
  InitConfig recurrent{0.0, 0.05, 0.0, 0.0, 0};   // hidden -> same hidden
  InitConfig output{0.0, 0.1, 0.0, 0.0, 0};       // last layer -> output
};

struct DataConfig {
  enum class Source { kSynthetic, kHdf5 };
  Source source = Source::kSynthetic;
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  // Fraction of the training file held out for validation when no
  // valid_path is given.
  double valid_fraction = 0.0;
  double max_duration_ms = 0.0;  // <= 0: no cap beyond the horizon
  SyntheticTaskConfig synthetic;
};

struct RunConfig {
  std::uint64_t seed = 0;
  ArchitectureConfig arch;
  InitRoles init;
  TrainConfig train;
  DataConfig data;
  FixedPointConfig fixed;

  // Throws Error(kInvalidArgument) describing the first bad field.
  void validate() const;
};

// `overrides` are "section.key=value" strings applied on top of the file,
// e.g. "train.epochs=5"; they take precedence over file values.
RunConfig parse_run_config(const std::string& yaml_text,
                           const std::vector<std::string>& overrides = {},
                           const std::string& origin = "<config>");
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});

// Fully resolved snapshot; parse_run_config(to_yaml(c)) reproduces c.
std::string to_yaml(const RunConfig& cfg);

std::vector<InitConfig> init_configs(const Network& net, const RunConfig& cfg);
Network build_initial_network(const RunConfig& cfg);

}  // namespace delaynet
