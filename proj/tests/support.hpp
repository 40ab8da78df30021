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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "delaynet/config.hpp"
#include "delaynet/data.hpp"
#include "delaynet/model.hpp"
#include "delaynet/simulate.hpp"

namespace delaynet::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("delaynet_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline NetworkSpec layered_spec(int n_in, std::vector<int> hidden, int n_out, int n_timesteps,
                                bool recurrent = false, double max_delay = 62.0) {
  ArchitectureConfig arch;
  arch.type = recurrent ? ArchitectureConfig::Type::kRecurrent
                        : ArchitectureConfig::Type::kFeedforward;
  arch.n_inputs = n_in;
  arch.hidden = std::move(hidden);
  arch.n_outputs = n_out;
  arch.n_timesteps = n_timesteps;
  arch.max_delay = max_delay;
  return make_network_spec(arch);
}

inline Network random_network(std::uint64_t seed, int n_in, std::vector<int> hidden, int n_out,
                              int n_timesteps, double weight_sd = 0.5, double max_delay = 20.0,
                              bool recurrent = false) {
  Network net = build_network(
      layered_spec(n_in, std::move(hidden), n_out, n_timesteps, recurrent, max_delay));
  std::vector<InitConfig> init;
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    const bool rec = net.projection(j).recurrent();
    init.push_back({rec ? 0.0 : 0.2, rec ? weight_sd / 4 : weight_sd, 0.0, max_delay,
                    mix_seed(seed, j)});
  }
  return init_parameters(net, init);
}

inline std::vector<InputSpike> bernoulli_input(std::uint64_t seed, int n_channels,
                                               int n_timesteps, double p) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution fire(p);
  std::vector<InputSpike> out;
  for (int t = 0; t < n_timesteps; ++t) {
    for (int c = 0; c < n_channels; ++c) {
      if (fire(rng)) out.push_back({t, c});
    }
  }
  return out;
}

// input(1) -> hidden(1) -> output(1), unit-free chain used by several oracles.
inline Network chain_network(double w_in, double d_in, double w_out, double d_out,
                             int n_timesteps, NeuronParams hidden = {}, NeuronParams output = {}) {
  NetworkSpec spec;
  spec.dt = 1.0;
  spec.n_timesteps = n_timesteps;
  spec.populations = {{"in", 1, PopulationKind::kInput, {}},
                      {"h", 1, PopulationKind::kHidden, hidden},
                      {"out", 1, PopulationKind::kOutput, output}};
  ProjectionSpec a{"in", "h", Matrix<double>(1, 1, w_in), Matrix<double>(1, 1, d_in), true, 62.0};
  ProjectionSpec b{"h", "out", Matrix<double>(1, 1, w_out), Matrix<double>(1, 1, d_out), true,
                   62.0};
  spec.projections = {a, b};
  return build_network(spec);
}

struct SyntheticRun {
  RunConfig cfg;
  std::vector<BinnedSample> train;
  std::vector<BinnedSample> test;
};

// Loads one of the shipped synthetic-task configs and materialises its data.
inline SyntheticRun synthetic_run(const std::string& config_dir, const std::string& name,
                                  const std::vector<std::string>& overrides = {}) {
  SyntheticRun run;
  run.cfg = load_run_config(config_dir + "/" + name, overrides);
  const auto task = synthetic_delay_task(run.cfg.data.synthetic);
  run.train = bin_dataset(task.train, run.cfg.arch.dt, run.cfg.arch.n_timesteps);
  run.test = bin_dataset(task.test, run.cfg.arch.dt, run.cfg.arch.n_timesteps);
  return run;
}

}  // namespace delaynet::testing
