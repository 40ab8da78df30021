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

#include "delaynet/simulate.hpp"

namespace delaynet {

enum class Split { kTrain, kValid, kTest };
const char* to_string(Split split);
Split split_from_string(const std::string& name);

struct RawEvent {
  double time = 0.0;  // seconds
  int channel = 0;
};

struct RawSample {
  std::vector<RawEvent> events;  // sorted by time
  int label = 0;
};

struct SpikingDataset {
  std::vector<RawSample> samples;
  int n_channels = 700;
  int n_classes = 0;
  Split split = Split::kTrain;
  // Optional per-sample speaker ids (SHD); empty when absent.
  std::vector<int> speakers;

  // Throws Error(kFormat) naming the first offending sample.
  void validate() const;
};

struct BinnedSample {
  std::vector<InputSpike> spikes;
  int label = 0;
  int n_timesteps = 0;
};

// step = floor(time / dt). Events at or beyond the horizon, or at or after
// max_duration_ms when that is positive, are dropped.
BinnedSample bin_events(const RawSample& sample, double dt, int n_timesteps,
                        double max_duration_ms = 0.0);
std::vector<BinnedSample> bin_dataset(const SpikingDataset& data, double dt, int n_timesteps,
                                      double max_duration_ms = 0.0);

// Reads the published SHD/SSC layout: vlen datasets spikes/times (s) and
// spikes/units, plus labels. n_classes comes from a root attribute
// "n_classes", else extra/keys, else max label + 1.
SpikingDataset load_hdf5_dataset(const std::string& path, Split split);
// Writes the same layout (plus n_channels/n_classes root attributes).
void save_hdf5_dataset(const SpikingDataset& data, const std::string& path);

struct SyntheticTaskConfig {
  int n_classes = 4;
  int n_channels = 64;
  int n_train = 400;
  int n_valid = 0;
  int n_test = 200;
  double jitter_sd = 1.0;    // ms, per spike
  double spread = 50.0;      // ms, span of the class latency patterns
  double onset_jitter = 0.0; // ms, uniform random shift of a whole sample
  double min_separation = 20.0;  // ms, pairwise L-inf distance of patterns
  double start = 5.0;        // ms, earliest nominal spike
  // Channels share latencies in this many contiguous groups; 0 gives every
  // channel its own latency.
  int n_groups = 0;
  std::uint64_t seed = 0;
};

struct SyntheticTask {
  // offsets[c][ch]: nominal latency (ms) of channel ch in class c.
  std::vector<std::vector<double>> offsets;
  SpikingDataset train;
  SpikingDataset valid;
  SpikingDataset test;
};

// Coincidence task: every channel spikes once per sample, at its class
// latency plus jitter. Every class uses the same multiset of latencies, so
// spike counts and the overall timing histogram carry no label information;
// only the assignment of latencies to channels differs.
SyntheticTask synthetic_delay_task(const SyntheticTaskConfig& cfg);

}  // namespace delaynet
