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
#include <hdf5.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "delaynet/data.hpp"
#include "delaynet/error.hpp"
#include "delaynet/simulate.hpp"
#include "support.hpp"

namespace delaynet {
namespace {

// Writes the published SHD layout directly: vlen float32 times (seconds),
// vlen uint16 units, uint16 labels, and extra/keys with one string per class.
void write_shd_file(const std::string& path, const std::vector<std::vector<float>>& times,
                    const std::vector<std::vector<std::uint16_t>>& units,
                    const std::vector<std::uint16_t>& labels, int n_keys) {
  const hid_t file = H5Fcreate(path.c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT);
  const hid_t spikes = H5Gcreate2(file, "spikes", H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
  const hsize_t n = labels.size();
  const hid_t space = H5Screate_simple(1, &n, nullptr);

  auto write_vlen = [&](const char* name, hid_t base, auto& rows) {
    std::vector<hvl_t> buf(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      buf[i].len = rows[i].size();
      buf[i].p = rows[i].data();
    }
    const hid_t type = H5Tvlen_create(base);
    const hid_t d = H5Dcreate2(spikes, name, type, space, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
    H5Dwrite(d, type, H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data());
    H5Dclose(d);
    H5Tclose(type);
  };
  auto t = times;
  auto u = units;
  write_vlen("times", H5T_NATIVE_FLOAT, t);
  write_vlen("units", H5T_NATIVE_UINT16, u);

  const hid_t d = H5Dcreate2(file, "labels", H5T_STD_U16LE, space, H5P_DEFAULT, H5P_DEFAULT,
                             H5P_DEFAULT);
  H5Dwrite(d, H5T_NATIVE_UINT16, H5S_ALL, H5S_ALL, H5P_DEFAULT, labels.data());
  H5Dclose(d);

  const hid_t extra = H5Gcreate2(file, "extra", H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
  const hsize_t nk = static_cast<hsize_t>(n_keys);
  const hid_t kspace = H5Screate_simple(1, &nk, nullptr);
  const hid_t str = H5Tcopy(H5T_C_S1);
  H5Tset_size(str, 8);
  std::vector<char> keys(static_cast<std::size_t>(n_keys) * 8, 'k');
  const hid_t kd = H5Dcreate2(extra, "keys", str, kspace, H5P_DEFAULT, H5P_DEFAULT, H5P_DEFAULT);
  H5Dwrite(kd, str, H5S_ALL, H5S_ALL, H5P_DEFAULT, keys.data());
  H5Dclose(kd);
  H5Tclose(str);
  H5Sclose(kspace);
  H5Gclose(extra);
  H5Sclose(space);
  H5Gclose(spikes);
  H5Fclose(file);
}

TEST(BinEvents, ZeroTime) {
  const RawSample s{{{0.0, 3}}, 0};
  const auto b = bin_events(s, 1.0, 10);
  ASSERT_EQ(b.spikes.size(), 1u);
  EXPECT_EQ(b.spikes[0].step, 0);
  EXPECT_EQ(b.spikes[0].channel, 3);
}

TEST(BinEvents, FloorSemantics) {
  const RawSample s{{{0.0009999, 0}, {0.0010001, 1}}, 0};
  const auto b = bin_events(s, 1.0, 10);
  ASSERT_EQ(b.spikes.size(), 2u);
  EXPECT_EQ(b.spikes[0].step, 0);
  EXPECT_EQ(b.spikes[1].step, 1);
}

TEST(BinEvents, CoarseStep) {
  const RawSample s{{{0.0039, 0}, {0.0041, 0}}, 0};
  const auto b = bin_events(s, 2.0, 10);
  EXPECT_EQ(b.spikes[0].step, 1);
  EXPECT_EQ(b.spikes[1].step, 2);
}

TEST(BinEvents, RecountOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> time(0.0, 1.4);
  std::uniform_int_distribution<int> ch(0, 699);
  for (int trial = 0; trial < 20; ++trial) {
    RawSample s;
    for (int k = 0; k < 500; ++k) s.events.push_back({time(rng), ch(rng)});
    std::sort(s.events.begin(), s.events.end(),
              [](const RawEvent& a, const RawEvent& b) { return a.time < b.time; });
    const double dt = trial % 2 == 0 ? 1.0 : 2.0;
    const int T = 1000 / static_cast<int>(dt);
    const double cap = trial % 3 == 0 ? 700.0 : 0.0;
    const auto b = bin_events(s, dt, T, cap);
    std::size_t dropped = 0;
    for (const auto& e : s.events) {
      const double ms = e.time * 1000.0;
      const bool beyond = ms >= T * dt || (cap > 0.0 && ms >= cap);
      dropped += beyond ? 1 : 0;
    }
    EXPECT_EQ(b.spikes.size(), s.events.size() - dropped);
    for (const auto& sp : b.spikes) {
      EXPECT_GE(sp.step, 0);
      EXPECT_LT(sp.step, T);
    }
  }
}

TEST(Hdf5Dataset, ShdLayout) {
  testing::TempDir dir("shd");
  const std::string path = dir.file("shd_train.h5");
  write_shd_file(path, {{0.001f, 0.5f, 0.2f}, {0.3f}}, {{1, 699, 5}, {0}}, {3, 19}, 20);
  const auto d = load_hdf5_dataset(path, Split::kTrain);
  EXPECT_EQ(d.n_channels, 700);
  EXPECT_EQ(d.n_classes, 20);
  ASSERT_EQ(d.samples.size(), 2u);
  EXPECT_EQ(d.samples[0].label, 3);
  ASSERT_EQ(d.samples[0].events.size(), 3u);
  // sorted on load
  EXPECT_EQ(d.samples[0].events[1].channel, 5);
  EXPECT_EQ(d.samples[0].events[2].channel, 699);
}

TEST(Hdf5Dataset, SscClassCount) {
  testing::TempDir dir("ssc");
  const std::string path = dir.file("ssc_test.h5");
  write_shd_file(path, {{0.01f}}, {{4}}, {34}, 35);
  EXPECT_EQ(load_hdf5_dataset(path, Split::kTest).n_classes, 35);
}

TEST(Hdf5Dataset, UnitIndex700Rejected) {
  testing::TempDir dir("bad");
  const std::string path = dir.file("bad.h5");
  write_shd_file(path, {{0.1f}, {0.1f, 0.2f}}, {{1}, {2, 700}}, {0, 1}, 20);
  try {
    load_hdf5_dataset(path, Split::kTrain);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("sample 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("700"), std::string::npos) << msg;
  }
}

TEST(Hdf5Dataset, EmptySplitRejected) {
  testing::TempDir dir("empty");
  const std::string path = dir.file("empty.h5");
  write_shd_file(path, {}, {}, {}, 20);
  EXPECT_THROW(load_hdf5_dataset(path, Split::kTrain), Error);
}

TEST(Hdf5Dataset, MissingDatasetsRejected) {
  testing::TempDir dir("nodata");
  const std::string path = dir.file("x.h5");
  H5Fclose(H5Fcreate(path.c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT));
  try {
    load_hdf5_dataset(path, Split::kTrain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("spikes/times"), std::string::npos);
  }
}

TEST(Hdf5Dataset, MissingFile) {
  try {
    load_hdf5_dataset("/nonexistent/shd.h5", Split::kTrain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotFound);
    EXPECT_NE(std::string(e.what()).find("dataset not found"), std::string::npos);
  }
}

TEST(Hdf5Dataset, SaveLoadRoundTripAndStableBinning) {
  testing::TempDir dir("rt");
  SyntheticTaskConfig cfg;
  cfg.n_train = 20;
  cfg.n_test = 8;
  cfg.seed = 4;
  const auto task = synthetic_delay_task(cfg);
  save_hdf5_dataset(task.train, dir.file("t.h5"));
  const auto loaded = load_hdf5_dataset(dir.file("t.h5"), Split::kTrain);
  ASSERT_EQ(loaded.samples.size(), task.train.samples.size());
  const auto a = bin_dataset(task.train, 1.0, 150);
  const auto b = bin_dataset(loaded, 1.0, 150);
  for (std::size_t s = 0; s < a.size(); ++s) {
    EXPECT_EQ(a[s].spikes, b[s].spikes);
    EXPECT_EQ(a[s].label, b[s].label);
  }
}

TEST(Synthetic, Deterministic) {
  SyntheticTaskConfig cfg;
  cfg.seed = 99;
  const auto a = synthetic_delay_task(cfg);
  const auto b = synthetic_delay_task(cfg);
  EXPECT_EQ(a.offsets, b.offsets);
  ASSERT_EQ(a.train.samples.size(), b.train.samples.size());
  for (std::size_t s = 0; s < a.train.samples.size(); ++s) {
    EXPECT_EQ(a.train.samples[s].label, b.train.samples[s].label);
    ASSERT_EQ(a.train.samples[s].events.size(), b.train.samples[s].events.size());
    for (std::size_t k = 0; k < a.train.samples[s].events.size(); ++k) {
      EXPECT_EQ(a.train.samples[s].events[k].time, b.train.samples[s].events[k].time);
    }
  }
}

TEST(Synthetic, Separation) {
  for (int groups : {0, 3}) {
    SyntheticTaskConfig cfg;
    cfg.n_groups = groups;
    cfg.seed = 5;
    const auto task = synthetic_delay_task(cfg);
    ASSERT_EQ(task.offsets.size(), 4u);
    for (std::size_t a = 0; a < task.offsets.size(); ++a) {
      for (std::size_t b = a + 1; b < task.offsets.size(); ++b) {
        double dist = 0.0;
        for (std::size_t c = 0; c < task.offsets[a].size(); ++c) {
          dist = std::max(dist, std::abs(task.offsets[a][c] - task.offsets[b][c]));
        }
        EXPECT_GE(dist, 20.0);
      }
    }
  }
}

TEST(Synthetic, DisjointBalancedSplits) {
  SyntheticTaskConfig cfg;
  cfg.n_valid = 40;
  cfg.seed = 6;
  const auto task = synthetic_delay_task(cfg);
  EXPECT_EQ(task.train.samples.size(), 400u);
  EXPECT_EQ(task.valid.samples.size(), 40u);
  EXPECT_EQ(task.test.samples.size(), 200u);
  auto key = [](const RawSample& s) {
    std::vector<double> k;
    for (const auto& e : s.events) k.push_back(e.time);
    return k;
  };
  std::set<std::vector<double>> seen;
  for (const auto* split : {&task.train, &task.valid, &task.test}) {
    std::vector<int> per_class(4, 0);
    for (const auto& s : split->samples) {
      EXPECT_TRUE(seen.insert(key(s)).second);
      ++per_class[s.label];
    }
    for (int c : per_class) EXPECT_EQ(c, static_cast<int>(split->samples.size()) / 4);
  }
}

TEST(Synthetic, ConstructiveDetectorNetwork) {
  SyntheticTaskConfig cfg;
  cfg.n_classes = 2;
  cfg.jitter_sd = 0.0;
  cfg.onset_jitter = 0.0;
  cfg.n_train = 10;
  cfg.n_test = 2;
  cfg.seed = 12;
  const auto task = synthetic_delay_task(cfg);

  // One detector whose delays realign the class-0 pattern to a single step.
  const NeuronParams detector{2.0, 1.0, 1.0, 0.0};
  const int C = cfg.n_channels;
  NetworkSpec spec;
  spec.n_timesteps = 150;
  spec.populations = {{"in", C, PopulationKind::kInput, {}},
                      {"det", 1, PopulationKind::kHidden, detector},
                      {"out", 1, PopulationKind::kOutput, {}}};
  Matrix<double> w(C, 1), d(C, 1);
  for (int c = 0; c < C; ++c) d(c, 0) = 62.0 - std::floor(task.offsets[0][c]);

  // Peak membrane response to a unit impulse, from the simulator's own update.
  LifState probe(1);
  std::vector<Crossing> none;
  const Decay decay{std::exp(-1.0 / detector.tau_mem), std::exp(-1.0 / detector.tau_syn)};
  double peak = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double a = k == 0 ? 1.0 : 0.0;
    lif_step(probe, std::span<const double>(&a, 1), decay, detector, false, none);
    peak = std::max(peak, probe.v[0]);
  }
  // Full coincidence reaches 1.25 thresholds; 80% of it stays below.
  w.fill(1.25 * detector.v_threshold / (C * peak));
  spec.projections = {{"in", "det", w, d, false, 62.0},
                      {"det", "out", Matrix<double>(1, 1, 1.0), Matrix<double>(1, 1), false, 62.0}};
  const Network net = build_network(spec);

  for (const auto& s : task.train.samples) {
    const auto binned = bin_events(s, 1.0, 150);
    const auto r = run_forward(net, binned.spikes, 150);
    EXPECT_EQ(r.record.counts[1][0] > 0, s.label == 0) << "label " << s.label;
  }
}

}  // namespace
}  // namespace delaynet
