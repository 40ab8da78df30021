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

#include "delaynet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>

#include "delaynet/error.hpp"
#include "parallel.hpp"

namespace delaynet {

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorKind::kInvalidArgument, "epochs must be non-negative");
  if (batch_size < 1) throw Error(ErrorKind::kInvalidArgument, "batch_size must be >= 1");
  if (!(optimizer.lr_weights >= 0.0) || !(optimizer.lr_delays >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "learning rates must be non-negative");
  }
  if (!(loss.reg_strength >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "reg_strength must be non-negative");
  }
  if (eval_every < 1) throw Error(ErrorKind::kInvalidArgument, "eval_every must be >= 1");
}

TrainerState TrainerState::fresh(const Network& net, const TrainConfig& cfg) {
  TrainerState s;
  s.adam = AdamState::zeros_like(net);
  s.rng.seed(cfg.seed);
  return s;
}

namespace {

struct BatchTotals {
  Gradients grads;
  double loss = 0.0;
  double reg_loss = 0.0;
  double rate = 0.0;
  int correct = 0;
};

void add_sample(BatchTotals& totals, const SampleGradient& sg, int label) {
  totals.grads.accumulate(sg.gradients);
  totals.loss += sg.loss.loss;
  totals.reg_loss += sg.reg.loss;
  totals.rate += sg.reg.mean_rate_hz;
  totals.correct += sg.loss.predicted == label ? 1 : 0;
}

BatchTotals run_batch(const Network& net, std::span<const BinnedSample> shard,
                      std::span<const std::size_t> batch, const TrainConfig& cfg) {
  BatchTotals totals{Gradients::zeros_like(net)};
  auto sample_grad = [&](std::size_t k) {
    const auto& s = shard[batch[k]];
    return compute_sample_gradient(net, s.spikes, s.label, cfg.loss, cfg.forward_mode);
  };
  if (cfg.threads <= 1) {
    for (std::size_t k = 0; k < batch.size(); ++k) {
      add_sample(totals, sample_grad(k), shard[batch[k]].label);
    }
    return totals;
  }
  if (cfg.deterministic) {
    // Waves of `threads` samples; results are folded in sample order.
    const auto wave = static_cast<std::size_t>(cfg.threads);
    std::vector<std::optional<SampleGradient>> slots(wave);
    for (std::size_t start = 0; start < batch.size(); start += wave) {
      const std::size_t n = std::min(wave, batch.size() - start);
      detail::parallel_chunks(n, cfg.threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t k = b; k < e; ++k) slots[k] = sample_grad(start + k);
      });
      for (std::size_t k = 0; k < n; ++k) {
        add_sample(totals, *slots[k], shard[batch[start + k]].label);
        slots[k].reset();
      }
    }
    return totals;
  }
  std::vector<BatchTotals> partial;
  for (int w = 0; w < cfg.threads; ++w) partial.push_back({Gradients::zeros_like(net)});
  detail::parallel_chunks(batch.size(), cfg.threads,
                          [&](std::size_t b, std::size_t e, std::size_t w) {
                            for (std::size_t k = b; k < e; ++k) {
                              add_sample(partial[w], sample_grad(k), shard[batch[k]].label);
                            }
                          });
  for (const auto& p : partial) {
    totals.grads.accumulate(p.grads);
    totals.loss += p.loss;
    totals.reg_loss += p.reg_loss;
    totals.rate += p.rate;
    totals.correct += p.correct;
  }
  return totals;
}

}  // namespace

EpochMetrics train_epoch(Network& net, std::span<const BinnedSample> shard,
                         const TrainConfig& cfg, TrainerState& state) {
  if (shard.empty()) throw Error(ErrorKind::kInvalidArgument, "training shard is empty");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> order(shard.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), state.rng);

  EpochMetrics metrics;
  metrics.epoch = state.epoch;
  double loss = 0.0;
  double reg = 0.0;
  double rate = 0.0;
  int correct = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t b = 0, batch_id = 0; b < order.size(); b += bs, ++batch_id) {
    const std::span<const std::size_t> batch(order.data() + b, std::min(bs, order.size() - b));
    try {
      BatchTotals totals = run_batch(net, shard, batch, cfg);
      totals.grads.scale(1.0 / static_cast<double>(batch.size()));
      adam_step(net, totals.grads, state.adam, cfg.optimizer);
      loss += totals.loss;
      reg += totals.reg_loss;
      rate += totals.rate;
      correct += totals.correct;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDivergence) throw;
      throw Error(ErrorKind::kDivergence, "batch " + std::to_string(batch_id) + ": " + e.what());
    }
  }
  const double n = static_cast<double>(shard.size());
  metrics.loss = loss / n;
  metrics.reg_loss = reg / n;
  metrics.train_accuracy = correct / n;
  metrics.mean_rate_hz = rate / n;
  metrics.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

EvalResult evaluate(const Network& net, std::span<const BinnedSample> data,
                    const LossConfig& loss, DelayMode mode, int threads) {
  EvalResult out;
  const auto n_out = static_cast<std::size_t>(net.population(net.output_population()).size);
  out.confusion = Matrix<int>(n_out, n_out);
  out.predictions.assign(data.size(), -1);
  std::vector<double> losses(data.size(), 0.0);
  std::vector<double> rates(data.size(), 0.0);
  detail::parallel_chunks(data.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k) {
      const auto fwd = run_forward(net, data[k].spikes, net.n_timesteps(), {mode});
      const auto lr = loss_and_seed(fwd.trace, data[k].label, loss, net.dt());
      out.predictions[k] = lr.predicted;
      losses[k] = lr.loss;
      rates[k] = regularization(net, fwd.record, loss).mean_rate_hz;
    }
  });
  int correct = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    out.confusion(static_cast<std::size_t>(data[k].label),
                  static_cast<std::size_t>(out.predictions[k])) += 1;
    correct += out.predictions[k] == data[k].label ? 1 : 0;
    out.mean_loss += losses[k];
    out.mean_rate_hz += rates[k];
  }
  if (!data.empty()) {
    const double n = static_cast<double>(data.size());
    out.accuracy = correct / n;
    out.mean_loss /= n;
    out.mean_rate_hz /= n;
  }
  return out;
}

Network fit(Network& net, std::span<const BinnedSample> train, std::span<const BinnedSample> valid,
            const TrainConfig& cfg, TrainerState& state, const FitCallbacks& callbacks) {
  cfg.validate();
  std::optional<Network> best;
  for (int epoch = state.epoch; epoch < cfg.epochs; ++epoch) {
    EpochMetrics metrics = train_epoch(net, train, cfg, state);
    state.epoch = epoch + 1;
    const bool last = epoch + 1 == cfg.epochs;
    if (!valid.empty() && ((epoch + 1) % cfg.eval_every == 0 || last)) {
      metrics.val_accuracy = evaluate(net, valid, cfg.loss, cfg.forward_mode, cfg.threads).accuracy;
      if (metrics.val_accuracy > state.best_val_accuracy) {
        state.best_val_accuracy = metrics.val_accuracy;
        best = net;
        if (callbacks.on_best) callbacks.on_best(net, state);
      }
    }
    state.history.push_back(metrics);
    if (callbacks.on_epoch) callbacks.on_epoch(net, state, metrics);
  }
  return best ? *best : net;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k,
                                                       std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::kInvalidArgument, "cross-validation needs k >= 2");
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw Error(ErrorKind::kInvalidArgument, "k = " + std::to_string(k) + " exceeds the " +
                                                 std::to_string(labels.size()) + " samples");
  }
  const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) folds[next++ % folds.size()].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CrossValidationResult cross_validate(const Network& initial, std::span<const BinnedSample> data,
                                     int k, const TrainConfig& cfg) {
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const auto& s : data) labels.push_back(s.label);
  CrossValidationResult out;
  out.folds = stratified_folds(labels, k, cfg.seed);
  for (std::size_t f = 0; f < out.folds.size(); ++f) {
    std::vector<BinnedSample> train;
    std::vector<BinnedSample> held_out;
    std::vector<char> in_fold(data.size(), 0);
    for (std::size_t i : out.folds[f]) in_fold[i] = 1;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (in_fold[i] ? held_out : train).push_back(data[i]);
    }
    Network net = initial;
    TrainerState state = TrainerState::fresh(net, cfg);
    const Network best = fit(net, train, held_out, cfg, state);
    out.fold_accuracy.push_back(
        evaluate(best, held_out, cfg.loss, cfg.forward_mode, cfg.threads).accuracy);
  }
  const double n = static_cast<double>(out.fold_accuracy.size());
  out.mean = std::accumulate(out.fold_accuracy.begin(), out.fold_accuracy.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : out.fold_accuracy) ss += (a - out.mean) * (a - out.mean);
  out.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return out;
}

}  // namespace delaynet
