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

#include "delaynet/model.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "delaynet/error.hpp"

namespace delaynet {
namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::kInvalidArgument, msg);
}

void validate_neuron(const NeuronParams& n, std::size_t p) {
  std::ostringstream where;
  where << "population " << p << ": ";
  if (!(n.tau_mem > 0.0) || !(n.tau_syn > 0.0)) {
    invalid(where.str() + "time constants must be positive");
  }
  if (n.tau_mem == n.tau_syn) {
    invalid(where.str() + "tau_mem must differ from tau_syn");
  }
  if (!(n.v_threshold > n.v_reset)) {
    invalid(where.str() + "v_threshold must exceed v_reset");
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const char* to_string(PopulationKind kind) {
  switch (kind) {
    case PopulationKind::kInput: return "input";
    case PopulationKind::kHidden: return "hidden";
    case PopulationKind::kOutput: return "output";
  }
  return "?";
}

PopulationKind population_kind_from_string(const std::string& name) {
  if (name == "input") return PopulationKind::kInput;
  if (name == "hidden") return PopulationKind::kHidden;
  if (name == "output") return PopulationKind::kOutput;
  invalid("unknown population kind '" + name + "'");
}

int Network::population_index(const std::string& id) const {
  for (std::size_t p = 0; p < spec_.populations.size(); ++p) {
    if (spec_.populations[p].id == id) return static_cast<int>(p);
  }
  return -1;
}

int Network::max_delay_steps(std::size_t j) const {
  return static_cast<int>(std::lround(spec_.projections[j].max_delay / spec_.dt));
}

int Network::delay_steps(double delay_ms) const {
  return static_cast<int>(std::lround(delay_ms / spec_.dt));
}

Network build_network(NetworkSpec spec) {
  if (!(spec.dt > 0.0)) invalid("dt must be positive");
  if (spec.n_timesteps <= 0) invalid("n_timesteps must be positive");

  Network net;
  std::set<std::string> ids;
  for (std::size_t p = 0; p < spec.populations.size(); ++p) {
    const auto& pop = spec.populations[p];
    if (!ids.insert(pop.id).second) {
      invalid("population " + std::to_string(p) + ": duplicate population id '" +
              pop.id + "'");
    }
    if (pop.size <= 0) {
      invalid("population " + std::to_string(p) + ": size must be positive");
    }
    if (pop.kind == PopulationKind::kInput) {
      if (net.input_ >= 0) invalid("population " + std::to_string(p) + ": second input population");
      net.input_ = static_cast<int>(p);
    } else {
      validate_neuron(pop.neuron, p);
      if (pop.kind == PopulationKind::kOutput) {
        if (net.output_ >= 0) invalid("population " + std::to_string(p) + ": second output population");
        net.output_ = static_cast<int>(p);
      }
    }
  }
  if (net.input_ < 0) invalid("network has no input population");
  if (net.output_ < 0) invalid("network has no output population");

  net.outgoing_.assign(spec.populations.size(), {});
  for (std::size_t j = 0; j < spec.projections.size(); ++j) {
    const auto& proj = spec.projections[j];
    const std::string where = "projection " + std::to_string(j) + ": ";
    int src = -1;
    int tgt = -1;
    for (std::size_t p = 0; p < spec.populations.size(); ++p) {
      if (spec.populations[p].id == proj.source) src = static_cast<int>(p);
      if (spec.populations[p].id == proj.target) tgt = static_cast<int>(p);
    }
    if (src < 0) invalid(where + "dangling source population '" + proj.source + "'");
    if (tgt < 0) invalid(where + "dangling target population '" + proj.target + "'");
    if (src == net.output_) invalid(where + "output population cannot project");
    if (tgt == net.input_) invalid(where + "input population cannot be a target");
    const auto n_src = static_cast<std::size_t>(spec.populations[src].size);
    const auto n_tgt = static_cast<std::size_t>(spec.populations[tgt].size);
    if (proj.weights.rows() != n_src || proj.weights.cols() != n_tgt) {
      invalid(where + "shape mismatch: weights are " + std::to_string(proj.weights.rows()) +
              "x" + std::to_string(proj.weights.cols()) + ", expected " +
              std::to_string(n_src) + "x" + std::to_string(n_tgt));
    }
    if (!proj.delays.same_shape(proj.weights)) {
      invalid(where + "shape mismatch between weights and delays");
    }
    if (!(proj.max_delay >= 0.0)) invalid(where + "max_delay must be non-negative");
    const auto w = proj.weights.flat();
    const auto d = proj.delays.flat();
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (!std::isfinite(w[k])) {
        invalid(where + "non-finite weight at index " + std::to_string(k));
      }
      if (!(d[k] >= 0.0 && d[k] <= proj.max_delay)) {
        invalid(where + "delay out of range at index " + std::to_string(k) + " (" +
                std::to_string(d[k]) + " ms, max " + std::to_string(proj.max_delay) + ")");
      }
    }
    net.source_.push_back(src);
    net.target_.push_back(tgt);
    net.outgoing_[src].push_back(static_cast<int>(j));
  }

  net.decay_.resize(spec.populations.size());
  for (std::size_t p = 0; p < spec.populations.size(); ++p) {
    const auto& n = spec.populations[p].neuron;
    net.decay_[p] = {std::exp(-spec.dt / n.tau_mem), std::exp(-spec.dt / n.tau_syn)};
  }
  net.spec_ = std::move(spec);
  for (std::size_t j = 0; j < net.spec_.projections.size(); ++j) {
    net.max_delay_steps_ = std::max(net.max_delay_steps_, net.max_delay_steps(j));
  }
  return net;
}

Network init_parameters(const Network& net, const InitConfig& cfg) {
  std::vector<InitConfig> all(net.n_projections(), cfg);
  for (std::size_t j = 0; j < all.size(); ++j) all[j].seed = mix_seed(cfg.seed, j);
  return init_parameters(net, all);
}

Network init_parameters(const Network& net, std::span<const InitConfig> per_projection) {
  if (per_projection.size() != net.n_projections()) {
    invalid("init: expected " + std::to_string(net.n_projections()) +
            " configs, got " + std::to_string(per_projection.size()));
  }
  NetworkSpec spec = net.spec();
  for (std::size_t j = 0; j < spec.projections.size(); ++j) {
    const auto& cfg = per_projection[j];
    auto& proj = spec.projections[j];
    const std::string where = "init config " + std::to_string(j) + ": ";
    if (!(cfg.weight_sd >= 0.0)) invalid(where + "weight_sd must be non-negative");
    if (!(cfg.delay_low >= 0.0 && cfg.delay_low <= cfg.delay_high &&
          cfg.delay_high <= proj.max_delay)) {
      invalid(where + "require 0 <= delay_low <= delay_high <= max_delay");
    }
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> weight_dist(cfg.weight_mean, cfg.weight_sd);
    for (double& w : proj.weights.flat()) {
      w = cfg.weight_sd > 0.0 ? weight_dist(rng) : cfg.weight_mean;
    }
    std::uniform_real_distribution<double> delay_dist(cfg.delay_low, cfg.delay_high);
    for (double& d : proj.delays.flat()) {
      d = cfg.delay_high > cfg.delay_low ? delay_dist(rng) : cfg.delay_low;
      // uniform_real_distribution may return the upper bound through rounding
      d = std::min(d, cfg.delay_high);
    }
  }
  return build_network(std::move(spec));
}

ParameterCount count_parameters(const Network& net) {
  ParameterCount count;
  for (const auto& proj : net.spec().projections) {
    count.n_weights += proj.weights.size();
    if (proj.delays_trainable) count.n_trainable_delays += proj.delays.size();
  }
  return count;
}

void clamp_delays(ProjectionSpec& proj) {
  for (double& d : proj.delays.flat()) d = std::clamp(d, 0.0, proj.max_delay);
}

NetworkSpec make_network_spec(const ArchitectureConfig& arch) {
  using Type = ArchitectureConfig::Type;
  NetworkSpec spec;
  spec.dt = arch.dt;
  spec.n_timesteps = arch.n_timesteps;
  spec.populations.push_back({"input", arch.n_inputs, PopulationKind::kInput, {}});
  for (std::size_t h = 0; h < arch.hidden.size(); ++h) {
    spec.populations.push_back({"hidden" + std::to_string(h), arch.hidden[h],
                                PopulationKind::kHidden, arch.hidden_neuron});
  }
  spec.populations.push_back({"output", arch.n_outputs, PopulationKind::kOutput,
                              arch.output_neuron});

  auto add = [&](std::size_t src, std::size_t tgt, bool trainable) {
    const auto rows = static_cast<std::size_t>(spec.populations[src].size);
    const auto cols = static_cast<std::size_t>(spec.populations[tgt].size);
    ProjectionSpec proj;
    proj.source = spec.populations[src].id;
    proj.target = spec.populations[tgt].id;
    proj.weights = Matrix<double>(rows, cols);
    proj.delays = Matrix<double>(rows, cols);
    proj.delays_trainable = trainable;
    proj.max_delay = arch.max_delay;
    spec.projections.push_back(std::move(proj));
  };

  const std::size_t n_hidden = arch.hidden.size();
  const std::size_t out = n_hidden + 1;
  if (n_hidden == 0) {
    add(0, out, arch.output_delays);
    return spec;
  }
  add(0, 1, arch.input_delays);
  for (std::size_t h = 1; h <= n_hidden; ++h) {
    if (arch.type == Type::kRecurrent) add(h, h, arch.recurrent_delays);
    if (h < n_hidden) add(h, h + 1, arch.input_delays);
  }
  add(n_hidden, out, arch.output_delays);
  return spec;
}

}  // namespace delaynet
