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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "delaynet/checkpoint.hpp"
#include "delaynet/error.hpp"
#include "delaynet/train.hpp"
#include "support.hpp"

namespace delaynet {
namespace {

const std::string kConfigs = std::string(DELAYNET_SOURCE_DIR) + "/configs";

std::uint64_t checksum(const Network& net) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h = (h ^ bits) * 1099511628211ULL;
  };
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    for (double x : net.projection(j).weights.flat()) mix(x);
    for (double x : net.projection(j).delays.flat()) mix(x);
  }
  return h;
}

std::vector<BinnedSample> small_dataset(std::uint64_t seed, int n, int n_classes, int channels,
                                        int T) {
  std::vector<BinnedSample> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({testing::bernoulli_input(mix_seed(seed, i), channels, T, 0.05),
                   i % n_classes, T});
  }
  return out;
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 11;
  cfg.optimizer.lr_weights = 5e-3;
  cfg.optimizer.lr_delays = 0.5;
  return cfg;
}

TEST(TrainEpoch, ZeroLearningRateKeepsParameters) {
  Network net = testing::random_network(2, 8, {12}, 3, 80, 0.8);
  const auto data = small_dataset(1, 12, 3, 8, 80);
  TrainConfig cfg = quick_config();
  cfg.optimizer.lr_weights = 0.0;
  cfg.optimizer.lr_delays = 0.0;
  TrainerState state = TrainerState::fresh(net, cfg);
  const NetworkSpec before = net.spec();
  train_epoch(net, data, cfg, state);
  EXPECT_EQ(net.spec(), before);
}

TEST(TrainEpoch, EmptyShardRejected) {
  Network net = testing::random_network(2, 8, {12}, 3, 80);
  const TrainConfig cfg = quick_config();
  TrainerState state = TrainerState::fresh(net, cfg);
  EXPECT_THROW(train_epoch(net, {}, cfg, state), Error);
}

TEST(TrainEpoch, SingleSampleMemorization) {
  Network net = testing::random_network(5, 8, {16}, 4, 80, 0.8);
  const std::vector<BinnedSample> one = {{testing::bernoulli_input(3, 8, 80, 0.1), 3, 80}};
  TrainConfig cfg = quick_config();
  cfg.batch_size = 1;
  cfg.optimizer.lr_delays = 0.05;
  TrainerState state = TrainerState::fresh(net, cfg);
  std::vector<double> losses;
  double acc = 0.0;
  for (int e = 0; e < 60; ++e) {
    const auto m = train_epoch(net, one, cfg, state);
    losses.push_back(m.loss);
    acc = m.train_accuracy;
  }
  EXPECT_EQ(acc, 1.0);
  for (std::size_t e = 11; e < losses.size(); ++e) {
    EXPECT_LE(losses[e], losses[e - 1] * (1.0 + 1e-9)) << "epoch " << e;
  }
}

TEST(TrainEpoch, ThreadCountDoesNotChangeResult) {
  const auto data = small_dataset(4, 16, 3, 8, 80);
  TrainConfig cfg = quick_config();
  Network a = testing::random_network(6, 8, {12}, 3, 80, 0.8);
  Network b = a;
  TrainerState sa = TrainerState::fresh(a, cfg);
  cfg.threads = 3;
  TrainerState sb = TrainerState::fresh(b, cfg);
  train_epoch(b, data, cfg, sb);
  cfg.threads = 1;
  train_epoch(a, data, cfg, sa);
  EXPECT_EQ(a.spec(), b.spec());
}

TEST(Evaluate, DoesNotMutate) {
  const Network net = testing::random_network(2, 8, {12}, 3, 80, 0.8);
  const auto data = small_dataset(1, 12, 3, 8, 80);
  const auto before = checksum(net);
  evaluate(net, data, {});
  EXPECT_EQ(checksum(net), before);
}

TEST(Evaluate, ChanceLevelWhenUntrained) {
  // Labels carry no information about the spikes.
  const auto data = small_dataset(21, 400, 4, 8, 80);
  const Network net = testing::random_network(3, 8, {16}, 4, 80, 0.8);
  const auto r = evaluate(net, data, {});
  const double n = static_cast<double>(data.size());
  const double c = 0.25;
  EXPECT_LE(std::abs(r.accuracy - c), 3.0 * std::sqrt(c * (1 - c) / n));
  int total = 0;
  for (int x : r.confusion.flat()) total += x;
  EXPECT_EQ(total, static_cast<int>(n));
}

TEST(Evaluate, MatchesFrozenEpochAccuracy) {
  auto run = testing::synthetic_run(kConfigs, "synthetic_delay.yaml", {"train.epochs=5"});
  Network net = build_initial_network(run.cfg);
  TrainerState state = TrainerState::fresh(net, run.cfg.train);
  fit(net, run.train, {}, run.cfg.train, state);
  TrainConfig frozen = run.cfg.train;
  frozen.optimizer.lr_weights = 0.0;
  frozen.optimizer.lr_delays = 0.0;
  const auto m = train_epoch(net, run.train, frozen, state);
  EXPECT_EQ(evaluate(net, run.train, frozen.loss).accuracy, m.train_accuracy);
}

TEST(Folds, LeaveOneOut) {
  const std::vector<int> labels = {0, 1, 0, 1};
  const auto folds = stratified_folds(labels, 4, 1);
  ASSERT_EQ(folds.size(), 4u);
  std::vector<int> seen(4, 0);
  for (const auto& f : folds) {
    ASSERT_EQ(f.size(), 1u);
    ++seen[f[0]];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Folds, DeterministicAndStratified) {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 4);
  const auto a = stratified_folds(labels, 5, 7);
  EXPECT_EQ(a, stratified_folds(labels, 5, 7));
  EXPECT_NE(a, stratified_folds(labels, 5, 8));
  for (const auto& f : a) {
    std::vector<int> per_class(4, 0);
    for (auto i : f) ++per_class[labels[i]];
    for (int c : per_class) EXPECT_EQ(c, 5);
  }
}

TEST(Folds, TooManyFolds) {
  const std::vector<int> labels = {0, 1, 0};
  EXPECT_THROW(stratified_folds(labels, 4, 1), Error);
  EXPECT_THROW(stratified_folds(labels, 1, 1), Error);
}

TEST(CrossValidate, LeaveOneOutTrainsEveryFold) {
  const Network net = testing::random_network(2, 8, {12}, 2, 60, 0.8);
  const auto data = small_dataset(9, 4, 2, 8, 60);
  TrainConfig cfg = quick_config();
  cfg.epochs = 2;
  const auto r = cross_validate(net, data, 4, cfg);
  EXPECT_EQ(r.fold_accuracy.size(), 4u);
  EXPECT_EQ(r.folds.size(), 4u);
}

TEST(CrossValidate, SyntheticTaskIsStable) {
  const auto run = testing::synthetic_run(kConfigs, "synthetic_delay.yaml", {"train.epochs=30"});
  const Network net = build_initial_network(run.cfg);
  const auto r = cross_validate(net, run.train, 5, run.cfg.train);
  EXPECT_LE(r.sd, 0.10) << "mean " << r.mean;
}

TEST(Fit, ResumeReproducesTrajectory) {
  testing::TempDir dir("resume");
  const auto data = small_dataset(12, 16, 3, 8, 80);
  TrainConfig cfg = quick_config();
  cfg.epochs = 4;

  Network straight = testing::random_network(8, 8, {12}, 3, 80, 0.8);
  Network resumed = straight;
  TrainerState s1 = TrainerState::fresh(straight, cfg);
  fit(straight, data, data, cfg, s1);

  TrainConfig half = cfg;
  half.epochs = 2;
  TrainerState s2 = TrainerState::fresh(resumed, cfg);
  fit(resumed, data, data, half, s2);
  save_checkpoint(dir.file("mid.h5"), resumed, s2);
  Checkpoint ck = load_checkpoint(dir.file("mid.h5"));
  fit(ck.net, data, data, cfg, ck.state);

  EXPECT_EQ(ck.net.spec(), straight.spec());
  ASSERT_EQ(ck.state.history.size(), s1.history.size());
  for (std::size_t e = 0; e < s1.history.size(); ++e) {
    EXPECT_EQ(ck.state.history[e].loss, s1.history[e].loss);
    EXPECT_EQ(ck.state.history[e].val_accuracy, s1.history[e].val_accuracy);
  }
  EXPECT_EQ(ck.state.adam.step, s1.adam.step);
}

TEST(Fit, ClampInvariantAfterEverySteps) {
  Network net = testing::random_network(8, 8, {12}, 3, 80, 0.8, 5.0);
  const auto data = small_dataset(12, 16, 3, 8, 80);
  TrainConfig cfg = quick_config();
  cfg.optimizer.lr_delays = 10.0;
  TrainerState state = TrainerState::fresh(net, cfg);
  FitCallbacks cb;
  cb.on_epoch = [](const Network& n, const TrainerState&, const EpochMetrics&) {
    for (std::size_t j = 0; j < n.n_projections(); ++j) {
      for (double d : n.projection(j).delays.flat()) {
        ASSERT_GE(d, 0.0);
        ASSERT_LE(d, n.projection(j).max_delay);
      }
    }
  };
  fit(net, data, {}, cfg, state, cb);
}

TEST(Checkpoint, RoundTrip) {
  testing::TempDir dir("ckpt");
  Network net = testing::random_network(8, 8, {12}, 3, 80, 0.8);
  const auto data = small_dataset(12, 8, 3, 8, 80);
  TrainConfig cfg = quick_config();
  TrainerState state = TrainerState::fresh(net, cfg);
  fit(net, data, data, cfg, state);
  save_checkpoint(dir.file("a.h5"), net, state, "seed: 3\n");
  const Checkpoint ck = load_checkpoint(dir.file("a.h5"));
  EXPECT_EQ(ck.net.spec(), net.spec());
  EXPECT_EQ(ck.state.epoch, state.epoch);
  EXPECT_EQ(ck.state.rng, state.rng);
  EXPECT_EQ(ck.state.best_val_accuracy, state.best_val_accuracy);
  EXPECT_EQ(ck.config_yaml, "seed: 3\n");
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    EXPECT_EQ(ck.state.adam.m[j].weights, state.adam.m[j].weights);
    EXPECT_EQ(ck.state.adam.v[j].delays, state.adam.v[j].delays);
  }
}

TEST(Checkpoint, ZeroWallclockIsByteStable) {
  testing::TempDir dir("ckpt_wall");
  const Network net = testing::random_network(8, 8, {12}, 3, 80);
  TrainerState state = TrainerState::fresh(net, quick_config());
  state.history.push_back({.epoch = 0, .wallclock_s = 1.5});
  save_checkpoint(dir.file("a.h5"), net, state, "", true);
  state.history[0].wallclock_s = 2.5;
  save_checkpoint(dir.file("b.h5"), net, state, "", true);
  const auto bytes = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(bytes(dir.file("a.h5")), bytes(dir.file("b.h5")));
  EXPECT_EQ(load_checkpoint(dir.file("a.h5")).state.history[0].wallclock_s, 0.0);
  save_checkpoint(dir.file("c.h5"), net, state);
  EXPECT_EQ(load_checkpoint(dir.file("c.h5")).state.history[0].wallclock_s, 2.5);
}

TEST(Checkpoint, MissingFile) {
  try {
    load_checkpoint("/nonexistent/ckpt.h5");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotFound);
  }
}

TEST(Checkpoint, MetricsCsv) {
  std::ostringstream out;
  write_metrics_header(out);
  EpochMetrics m;
  m.epoch = 2;
  m.loss = 0.5;
  m.wallclock_s = 1.25;
  write_metrics_row(out, m, true);
  EXPECT_EQ(out.str(),
            "epoch,loss,reg_loss,train_acc,val_acc,mean_rate_hz,wallclock\n"
            "2,0.5,0,0,nan,0,0\n");
}

}  // namespace
}  // namespace delaynet
