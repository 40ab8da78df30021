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
#include <vector>

#include "delaynet/matrix.hpp"
#include "delaynet/model.hpp"
#include "delaynet/simulate.hpp"

namespace delaynet {

struct LossConfig {
  // Readout weighting constant in ms; <= 0 selects the sample duration.
  double tau_loss = 0.0;
  double reg_strength = 0.0;
  double target_rate = 14.0;  // Hz

  double effective_tau_loss(int n_timesteps, double dt) const {
    return tau_loss > 0.0 ? tau_loss : n_timesteps * dt;
  }
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> scores;
  std::vector<double> probabilities;
  int predicted = -1;
  // dL/dV_k(t), [n_timesteps x n_output].
  Matrix<double> seeds;
};

// Softmax cross-entropy over the exponentially weighted voltage integrals.
LossResult loss_and_seed(const OutputTrace& trace, int label, const LossConfig& cfg, double dt);

struct RegularizationResult {
  double loss = 0.0;
  // Added to dL/d(spike time, in steps) at every spike of hidden neuron n;
  // indexed [population][neuron], empty for non-hidden populations.
  std::vector<std::vector<double>> spike_time_gradient;
  double mean_rate_hz = 0.0;
};

// reg = strength * sum_hidden (rate_n - target)^2, rate in Hz.
RegularizationResult regularization(const Network& net, const SpikeRecord& record,
                                    const LossConfig& cfg);

struct ProjectionGradient {
  Matrix<double> weights;
  Matrix<double> delays;
};

struct Gradients {
  std::vector<ProjectionGradient> projections;
  double loss = 0.0;
  double reg_loss = 0.0;

  static Gradients zeros_like(const Network& net);
  void accumulate(const Gradients& other);
  void scale(double factor);
  bool all_finite() const;
};

struct BackwardStats {
  // Synapse visits made while propagating spike events backwards.
  std::uint64_t jump_ops = 0;
  // Bytes of adjoint state allocated by the sweep (excluding its inputs).
  std::size_t aux_bytes = 0;
};

// Event-based adjoint sweep. Consumes nothing but the parameters, the spike
// record and the output seeds: hidden state between spikes is reconstructed
// by the adjoint recursion, never stored.
Gradients backward(const Network& net, const SpikeRecord& record, const Matrix<double>& seeds,
                   const LossConfig& cfg, BackwardStats* stats = nullptr);

struct SampleGradient {
  Gradients gradients;
  LossResult loss;
  RegularizationResult reg;
  SpikeRecord record;
};

// Forward pass, loss, regulariser and backward pass for one labelled sample.
SampleGradient compute_sample_gradient(const Network& net, std::span<const InputSpike> input,
                                       int label, const LossConfig& cfg,
                                       DelayMode mode = DelayMode::kRounded);

}  // namespace delaynet
