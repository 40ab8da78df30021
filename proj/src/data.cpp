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

#include "delaynet/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "delaynet/error.hpp"
#include "hdf5_util.hpp"

namespace delaynet {

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid" || name == "validation") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw Error(ErrorKind::kInvalidArgument, "unknown split '" + name + "'");
}

void SpikingDataset::validate() const {
  if (samples.empty()) throw Error(ErrorKind::kFormat, "dataset split is empty");
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    const std::string where = "sample " + std::to_string(s) + ": ";
    if (sample.label < 0 || sample.label >= n_classes) {
      throw Error(ErrorKind::kFormat, where + "label " + std::to_string(sample.label) +
                                          " outside [0, " + std::to_string(n_classes) + ")");
    }
    double last = 0.0;
    for (const auto& e : sample.events) {
      if (e.channel < 0 || e.channel >= n_channels) {
        throw Error(ErrorKind::kFormat, where + "channel index " + std::to_string(e.channel) +
                                            " >= " + std::to_string(n_channels));
      }
      if (!(e.time >= 0.0) || e.time < last) {
        throw Error(ErrorKind::kFormat, where + "event times must be non-negative and sorted");
      }
      last = e.time;
    }
  }
}

BinnedSample bin_events(const RawSample& sample, double dt, int n_timesteps,
                        double max_duration_ms) {
  BinnedSample out;
  out.label = sample.label;
  out.n_timesteps = n_timesteps;
  out.spikes.reserve(sample.events.size());
  for (const auto& e : sample.events) {
    const double t_ms = e.time * 1000.0;
    if (max_duration_ms > 0.0 && t_ms >= max_duration_ms) continue;
    const double step = std::floor(t_ms / dt);
    if (step >= n_timesteps) continue;
    out.spikes.push_back({static_cast<int>(step), e.channel});
  }
  std::sort(out.spikes.begin(), out.spikes.end());
  return out;
}

std::vector<BinnedSample> bin_dataset(const SpikingDataset& data, double dt, int n_timesteps,
                                      double max_duration_ms) {
  std::vector<BinnedSample> out;
  out.reserve(data.samples.size());
  for (const auto& s : data.samples) {
    out.push_back(bin_events(s, dt, n_timesteps, max_duration_ms));
  }
  return out;
}

SpikingDataset load_hdf5_dataset(const std::string& path, Split split) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kNotFound, "dataset not found: " + path);
  }
  auto file = h5::open_file(path);
  const hid_t root = file.get();
  auto times = h5::read_vlen_dataset<double>(root, "spikes/times", path + ":/spikes/times");
  auto units = h5::read_vlen_dataset<std::int32_t>(root, "spikes/units", path + ":/spikes/units");
  std::vector<hsize_t> dims;
  auto labels = h5::read_dataset<std::int32_t>(root, "labels", dims, path + ":/labels");
  if (times.size() != units.size() || times.size() != labels.size()) {
    throw Error(ErrorKind::kFormat, path + ": spikes/times, spikes/units and labels differ in length");
  }

  SpikingDataset data;
  data.split = split;
  data.n_channels = h5::has_attribute(root, "n_channels")
                        ? h5::read_attribute<std::int32_t>(root, "n_channels", path)
                        : 700;
  if (h5::has_attribute(root, "n_classes")) {
    data.n_classes = h5::read_attribute<std::int32_t>(root, "n_classes", path);
  } else if (h5::exists(root, "extra/keys")) {
    h5::Handle dset(H5Dopen2(root, "extra/keys", H5P_DEFAULT), H5Dclose);
    h5::Handle space(H5Dget_space(dset.get()), H5Sclose);
    data.n_classes = static_cast<int>(H5Sget_simple_extent_npoints(space.get()));
  } else {
    data.n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
  if (h5::exists(root, "extra/speaker")) {
    std::vector<hsize_t> sdims;
    data.speakers = h5::read_dataset<std::int32_t>(root, "extra/speaker", sdims,
                                                   path + ":/extra/speaker");
    if (data.speakers.size() != labels.size()) data.speakers.clear();
  }

  data.samples.resize(labels.size());
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (times[s].size() != units[s].size()) {
      throw Error(ErrorKind::kFormat, path + ": sample " + std::to_string(s) +
                                          " has mismatched times/units lengths");
    }
    auto& sample = data.samples[s];
    sample.label = labels[s];
    sample.events.resize(times[s].size());
    for (std::size_t k = 0; k < times[s].size(); ++k) {
      sample.events[k] = {times[s][k], units[s][k]};
    }
    std::stable_sort(sample.events.begin(), sample.events.end(),
                     [](const RawEvent& a, const RawEvent& b) { return a.time < b.time; });
  }
  try {
    data.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
  return data;
}

void save_hdf5_dataset(const SpikingDataset& data, const std::string& path) {
  auto file = h5::create_file(path);
  const hid_t root = file.get();
  auto spikes = h5::create_group(root, "spikes");
  std::vector<std::vector<double>> times(data.samples.size());
  std::vector<std::vector<std::int32_t>> units(data.samples.size());
  std::vector<std::int32_t> labels(data.samples.size());
  for (std::size_t s = 0; s < data.samples.size(); ++s) {
    for (const auto& e : data.samples[s].events) {
      times[s].push_back(e.time);
      units[s].push_back(e.channel);
    }
    labels[s] = data.samples[s].label;
  }
  h5::write_vlen_dataset(spikes.get(), "times", times);
  h5::write_vlen_dataset(spikes.get(), "units", units);
  h5::write_dataset(root, "labels", labels, {labels.size()});
  h5::write_attribute<std::int32_t>(root, "n_channels", data.n_channels);
  h5::write_attribute<std::int32_t>(root, "n_classes", data.n_classes);
  if (!data.speakers.empty()) {
    auto extra = h5::create_group(root, "extra");
    h5::write_dataset(extra.get(), "speaker", data.speakers, {data.speakers.size()});
  }
}

SyntheticTask synthetic_delay_task(const SyntheticTaskConfig& cfg) {
  if (cfg.n_classes < 2) throw Error(ErrorKind::kInvalidArgument, "synthetic task needs >= 2 classes");
  if (cfg.n_channels < 1) throw Error(ErrorKind::kInvalidArgument, "synthetic task needs channels");
  const int n_groups = cfg.n_groups > 0 ? cfg.n_groups : cfg.n_channels;
  if (n_groups > cfg.n_channels) {
    throw Error(ErrorKind::kInvalidArgument, "more latency groups than channels");
  }
  std::mt19937_64 rng(cfg.seed);

  std::vector<double> levels(static_cast<std::size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    levels[g] = cfg.start + (n_groups > 1 ? cfg.spread * g / (n_groups - 1) : 0.0);
  }
  auto group_of = [&](int ch) {
    return static_cast<std::size_t>(static_cast<long>(ch) * n_groups / cfg.n_channels);
  };

  SyntheticTask task;
  std::vector<std::vector<std::size_t>> perms;
  int attempts = 0;
  while (static_cast<int>(perms.size()) < cfg.n_classes) {
    if (++attempts > 100000) {
      throw Error(ErrorKind::kInvalidArgument,
                  "cannot draw class patterns with the requested separation");
    }
    std::vector<std::size_t> perm(levels.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    bool separated = true;
    for (const auto& other : perms) {
      double dist = 0.0;
      for (std::size_t g = 0; g < perm.size(); ++g) {
        dist = std::max(dist, std::abs(levels[perm[g]] - levels[other[g]]));
      }
      separated = separated && dist >= cfg.min_separation;
    }
    if (separated) perms.push_back(std::move(perm));
  }
  for (const auto& perm : perms) {
    std::vector<double> offsets(static_cast<std::size_t>(cfg.n_channels));
    for (int ch = 0; ch < cfg.n_channels; ++ch) offsets[ch] = levels[perm[group_of(ch)]];
    task.offsets.push_back(std::move(offsets));
  }

  const int total = cfg.n_train + cfg.n_valid + cfg.n_test;
  std::vector<int> labels(static_cast<std::size_t>(total));
  for (int s = 0; s < total; ++s) labels[s] = s % cfg.n_classes;
  std::normal_distribution<double> jitter(0.0, cfg.jitter_sd);
  std::uniform_real_distribution<double> onset(0.0, cfg.onset_jitter);

  auto make_split = [&](int count, Split split, std::vector<int> split_labels) {
    SpikingDataset data;
    data.n_channels = cfg.n_channels;
    data.n_classes = cfg.n_classes;
    data.split = split;
    std::shuffle(split_labels.begin(), split_labels.end(), rng);
    for (int s = 0; s < count; ++s) {
      RawSample sample;
      sample.label = split_labels[s];
      const double shift = cfg.onset_jitter > 0.0 ? onset(rng) : 0.0;
      for (int ch = 0; ch < cfg.n_channels; ++ch) {
        double t = task.offsets[sample.label][ch] + shift;
        if (cfg.jitter_sd > 0.0) t += jitter(rng);
        sample.events.push_back({std::max(t, 0.0) * 1e-3, ch});
      }
      std::stable_sort(sample.events.begin(), sample.events.end(),
                       [](const RawEvent& a, const RawEvent& b) { return a.time < b.time; });
      data.samples.push_back(std::move(sample));
    }
    return data;
  };
  auto slice = [&](int begin, int count) {
    return std::vector<int>(labels.begin() + begin, labels.begin() + begin + count);
  };
  task.train = make_split(cfg.n_train, Split::kTrain, slice(0, cfg.n_train));
  task.valid = make_split(cfg.n_valid, Split::kValid, slice(cfg.n_train, cfg.n_valid));
  task.test = make_split(cfg.n_test, Split::kTest, slice(cfg.n_train + cfg.n_valid, cfg.n_test));
  return task;
}

}  // namespace delaynet
