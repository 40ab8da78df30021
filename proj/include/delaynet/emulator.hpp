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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "delaynet/data.hpp"
#include "delaynet/quantize.hpp"
#include "delaynet/simulate.hpp"

namespace delaynet {

struct EmulatorStats {
  std::uint64_t synaptic_events = 0;
  std::uint64_t neuron_updates = 0;
  std::uint64_t hidden_neuron_updates = 0;
};

struct EmulationResult {
  SpikeRecord record;        // phase and rise are always zero
  Matrix<std::int32_t> output_state;  // [n_timesteps x n_output], state LSBs
  OutputTrace trace;         // output_state dequantized to volts
  std::vector<double> scores;
  int predicted = -1;
  EmulatorStats stats;
  // FNV-1a digest of every (I, V) integer state after every step.
  std::uint64_t state_digest = 0;
};

// Integer-only forward pass. Throws Error(kOverflow) when an accumulator or a
// state register leaves its configured width.
EmulationResult emulate_fixed_point(const QuantizedModel& model,
                                    std::span<const InputSpike> input, int n_timesteps);

struct DatasetEmulation {
  std::vector<int> predictions;
  double accuracy = 0.0;
  EmulatorStats stats;  // summed over samples
  double wallclock_s = 0.0;
};

DatasetEmulation emulate_dataset(const QuantizedModel& model, std::span<const BinnedSample> data,
                                 int threads = 1);

struct ParitySample {
  std::size_t index = 0;
  int label = 0;
  int reference = -1;  // float model (or first model) prediction
  int candidate = -1;  // emulator prediction
};

struct ParityReport {
  std::vector<ParitySample> samples;
  double accuracy_reference = 0.0;
  double accuracy_candidate = 0.0;
  double agreement = 0.0;

  std::vector<ParitySample> disagreements() const;
  void write_csv(std::ostream& out) const;
  std::string summary() const;
};

ParityReport compare_predictions(std::span<const int> labels, std::span<const int> reference,
                                 std::span<const int> candidate);

// Float network (rounded delays) against the emulated quantized model.
ParityReport parity_report(const Network& float_net, const QuantizedModel& model,
                           std::span<const BinnedSample> data, int threads = 1);
// Emulator on both sides.
ParityReport parity_report(const QuantizedModel& reference, const QuantizedModel& model,
                           std::span<const BinnedSample> data, int threads = 1);

}  // namespace delaynet
