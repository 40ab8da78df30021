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
#include <span>
#include <string>
#include <vector>

#include "delaynet/matrix.hpp"

namespace delaynet {

enum class PopulationKind { kInput, kHidden, kOutput };

const char* to_string(PopulationKind kind);
PopulationKind population_kind_from_string(const std::string& name);

// LIF neuron with an exponential synapse. Times in milliseconds, voltages
// dimensionless.
struct NeuronParams {
  double tau_mem = 20.0;
  double tau_syn = 5.0;
  double v_threshold = 1.0;
  double v_reset = 0.0;

  friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

struct PopulationSpec {
  std::string id;
  int size = 0;
  PopulationKind kind = PopulationKind::kHidden;
  NeuronParams neuron;

  friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

// Dense all-to-all projection. weights(i, j) and delays(i, j) belong to the
// synapse from source neuron i to target neuron j; delays are in ms.
struct ProjectionSpec {
  std::string source;
  std::string target;
  Matrix<double> weights;
  Matrix<double> delays;
  bool delays_trainable = true;
  double max_delay = 62.0;

  bool recurrent() const { return source == target; }

  friend bool operator==(const ProjectionSpec&, const ProjectionSpec&) = default;
};

struct NetworkSpec {
  double dt = 1.0;
  std::vector<PopulationSpec> populations;
  std::vector<ProjectionSpec> projections;
  int n_timesteps = 1000;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct InitConfig {
  double weight_mean = 0.0;
  double weight_sd = 0.1;
  double delay_low = 0.0;
  double delay_high = 0.0;
  std::uint64_t seed = 0;
};

// Per-population decay factors for one timestep.
struct Decay {
  double alpha = 0.0;  // membrane, exp(-dt / tau_mem)
  double beta = 0.0;   // synapse, exp(-dt / tau_syn)
};

// A NetworkSpec that passed validation, with resolved population indices and
// precomputed decay constants. Parameters may only be changed through
// mutable_projection(), which is meant for the optimizer.
class Network {
 public:
  const NetworkSpec& spec() const { return spec_; }
  double dt() const { return spec_.dt; }
  int n_timesteps() const { return spec_.n_timesteps; }

  std::size_t n_populations() const { return spec_.populations.size(); }
  std::size_t n_projections() const { return spec_.projections.size(); }
  const PopulationSpec& population(std::size_t p) const {
    return spec_.populations[p];
  }
  const ProjectionSpec& projection(std::size_t j) const {
    return spec_.projections[j];
  }
  ProjectionSpec& mutable_projection(std::size_t j) {
    return spec_.projections[j];
  }

  int input_population() const { return input_; }
  int output_population() const { return output_; }
  int source_of(std::size_t j) const { return source_[j]; }
  int target_of(std::size_t j) const { return target_[j]; }
  const Decay& decay(std::size_t p) const { return decay_[p]; }
  std::span<const int> outgoing(std::size_t p) const { return outgoing_[p]; }
  int population_index(const std::string& id) const;

  // Largest delay, in whole timesteps, any projection may carry.
  int max_delay_steps() const { return max_delay_steps_; }
  int max_delay_steps(std::size_t j) const;
  // Integer step count a real-valued delay is rounded to in the forward pass.
  int delay_steps(double delay_ms) const;

  friend Network build_network(NetworkSpec spec);

 private:
  NetworkSpec spec_;
  int input_ = -1;
  int output_ = -1;
  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<Decay> decay_;
  std::vector<std::vector<int>> outgoing_;
  int max_delay_steps_ = 0;
};

// Validates every structural and numerical invariant and attaches the decay
// constants. Throws Error(kInvalidArgument) naming the offending index.
Network build_network(NetworkSpec spec);

// Fills weights ~ Normal(mean, sd) and delays ~ Uniform[low, high]. The
// single-config overload applies the same config to every projection, using
// a per-projection stream derived from the seed.
// SplitMix64 finaliser; derives independent per-projection seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

Network init_parameters(const Network& net, const InitConfig& cfg);
Network init_parameters(const Network& net, std::span<const InitConfig> per_projection);

struct ParameterCount {
  std::size_t n_weights = 0;
  std::size_t n_trainable_delays = 0;
};
ParameterCount count_parameters(const Network& net);

// Clamps every delay of projection j into [0, max_delay].
void clamp_delays(ProjectionSpec& proj);

// Common architectures. Population ids are "input", "hidden0".., "output".
struct ArchitectureConfig {
  enum class Type { kFeedforward, kRecurrent };
  Type type = Type::kFeedforward;
  int n_inputs = 700;
  std::vector<int> hidden = {256, 256};
  int n_outputs = 20;
  double dt = 1.0;
  int n_timesteps = 1000;
  double max_delay = 62.0;
  NeuronParams hidden_neuron;
  NeuronParams output_neuron;
  bool input_delays = true;
  bool recurrent_delays = true;
  bool output_delays = true;
};

NetworkSpec make_network_spec(const ArchitectureConfig& arch);

}  // namespace delaynet
