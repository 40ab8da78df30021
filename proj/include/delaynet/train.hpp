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
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "delaynet/adam.hpp"
#include "delaynet/data.hpp"
#include "delaynet/eventprop.hpp"

namespace delaynet {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  LossConfig loss;
  int eval_every = 1;
  DelayMode forward_mode = DelayMode::kRounded;
  int threads = 1;
  // Sum per-sample gradients in sample order, independent of thread count.
  bool deterministic = true;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double reg_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = std::numeric_limits<double>::quiet_NaN();
  double mean_rate_hz = 0.0;
  double wallclock_s = 0.0;
};

// Everything besides the network that a resumed run needs.
struct TrainerState {
  AdamState adam;
  std::mt19937_64 rng;
  int epoch = 0;
  std::vector<EpochMetrics> history;
  double best_val_accuracy = -1.0;

  static TrainerState fresh(const Network& net, const TrainConfig& cfg);
};

// One pass over the shard in shuffled mini-batches. Training accuracy, loss
// and rate are measured on the forward passes that produced the gradients.
// Throws Error(kDivergence) prefixed with the offending batch index.
EpochMetrics train_epoch(Network& net, std::span<const BinnedSample> shard,
                         const TrainConfig& cfg, TrainerState& state);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  double mean_rate_hz = 0.0;
  Matrix<int> confusion;  // [true class x predicted class]
  std::vector<int> predictions;
};

EvalResult evaluate(const Network& net, std::span<const BinnedSample> data,
                    const LossConfig& loss, DelayMode mode = DelayMode::kRounded,
                    int threads = 1);

struct FitCallbacks {
  // Called after every epoch, once metrics (and validation) are final.
  std::function<void(const Network&, const TrainerState&, const EpochMetrics&)> on_epoch;
  // Called when validation accuracy improves.
  std::function<void(const Network&, const TrainerState&)> on_best;
};

// Runs epochs state.epoch .. cfg.epochs - 1, evaluating on `valid` every
// eval_every epochs when it is non-empty. Returns the best network by
// validation accuracy (the final one when there is no validation data).
Network fit(Network& net, std::span<const BinnedSample> train, std::span<const BinnedSample> valid,
            const TrainConfig& cfg, TrainerState& state, const FitCallbacks& callbacks = {});

// Stratified random folds; fold f holds every k-th sample of each class in a
// seeded shuffle. Throws if k < 2 or k exceeds the sample count.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k,
                                                       std::uint64_t seed);

struct CrossValidationResult {
  std::vector<double> fold_accuracy;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<std::vector<std::size_t>> folds;
};

// Trains k models from the same initial network, each validated on its
// held-out fold (final-epoch accuracy of the best checkpoint).
CrossValidationResult cross_validate(const Network& initial, std::span<const BinnedSample> data,
                                     int k, const TrainConfig& cfg);

}  // namespace delaynet
