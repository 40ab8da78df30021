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
#include <vector>

#include "delaynet/matrix.hpp"
#include "delaynet/model.hpp"

namespace delaynet {

// How a spike's real-valued arrival time is mapped onto the timestep grid.
//  kRounded:      arrival at t + 1 + round(d / dt); the production path.
//  kInterpolated: arrival position t + 1 + phase + d / dt is split linearly
//                 between the two neighbouring slots, so the loss becomes a
//                 continuous function of delays and spike times. Used by the
//                 finite-difference oracle.
enum class DelayMode { kRounded, kInterpolated };

const char* to_string(DelayMode mode);

struct InputSpike {
  int step = 0;
  int channel = 0;
  friend auto operator<=>(const InputSpike&, const InputSpike&) = default;
};

struct SpikeEvent {
  int step = 0;
  int population = 0;
  int neuron = 0;
  // Threshold crossing inside (step - 1, step], interpolated linearly between
  // the post-reset voltage of the previous step and the pre-reset voltage of
  // this one. Zero for input spikes.
  double phase = 0.0;
  // Pre-reset voltage at `step` minus voltage at `step - 1` (> 0 for spikes).
  double rise = 0.0;

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

// Every spike emitted during one forward pass, ordered by (step, population,
// neuron). Input spikes are included; output neurons never spike.
struct SpikeRecord {
  int n_timesteps = 0;
  double dt = 1.0;
  DelayMode mode = DelayMode::kRounded;
  std::vector<SpikeEvent> events;
  // counts[p][n]; empty for the output population.
  std::vector<std::vector<int>> counts;

  friend bool operator==(const SpikeRecord&, const SpikeRecord&) = default;
};

// Output membrane voltage after every step, [n_timesteps x n_output].
struct OutputTrace {
  Matrix<double> voltages;
};

struct LifState {
  explicit LifState(std::size_t n) : v(n, 0.0), i(n, 0.0) {}
  std::vector<double> v;
  std::vector<double> i;
};

struct Crossing {
  int neuron = 0;
  double phase = 0.0;
  double rise = 0.0;
};

// One exponential-Euler update:
//   V' = alpha V + (1 - alpha) I;  I' = beta I + arrivals
// The membrane integrates the current from before this step's arrivals. For
// spiking populations V' is then compared against v_threshold and reset to
// v_reset. Fired neurons are appended to `fired` in ascending order. Throws
// Error(kDivergence) on a non-finite state.
void lif_step(LifState& state, std::span<const double> arrivals, const Decay& decay,
              const NeuronParams& params, bool spiking, std::vector<Crossing>& fired);

// Per-target circular accumulator of future synaptic input. Slot `head` holds
// the input for the step being processed; offsets 1..n_slots address the
// following steps (offset n_slots reuses the slot just consumed).
class DelayRingBuffer {
 public:
  DelayRingBuffer(std::size_t n_targets, int n_slots);

  int n_slots() const { return n_slots_; }
  std::size_t n_targets() const { return n_targets_; }

  void add(int offset, std::size_t target, double weight);
  // Copies the current slot into `out` and zeroes it.
  void take(std::span<double> out);
  void advance() { head_ = (head_ + 1) % n_slots_; }

  double enqueued() const { return enqueued_; }
  double delivered() const { return delivered_; }
  double pending() const;

 private:
  std::size_t n_targets_;
  int n_slots_;
  int head_ = 0;
  std::vector<double> slots_;
  double enqueued_ = 0.0;
  double delivered_ = 0.0;
};

// Integer delay steps per projection, rounded once per forward pass.
class DelayTable {
 public:
  explicit DelayTable(const Network& net);
  const Matrix<int>& steps(std::size_t j) const { return steps_[j]; }

 private:
  std::vector<Matrix<int>> steps_;
};

struct Emission {
  int neuron = 0;
  double phase = 0.0;
};

// Routes the spikes of projection j's source population, emitted at the
// current step, into the target's ring buffer. Returns synapses visited.
std::uint64_t deliver(const Network& net, std::size_t j, std::span<const Emission> spikes,
                      const DelayTable& table, DelayMode mode, DelayRingBuffer& buffer);

struct ForwardOptions {
  DelayMode mode = DelayMode::kRounded;
};

struct ForwardStats {
  std::uint64_t synaptic_events = 0;
  std::uint64_t neuron_updates = 0;
  std::uint64_t hidden_neuron_updates = 0;
  double enqueued = 0.0;
  double delivered = 0.0;
  double pending = 0.0;
};

struct ForwardResult {
  SpikeRecord record;
  OutputTrace trace;
  ForwardStats stats;
};

ForwardResult run_forward(const Network& net, std::span<const InputSpike> input,
                          int n_timesteps, const ForwardOptions& options = {});

// score_k = sum_t V_k(t) exp(-t dt / tau_loss) dt
std::vector<double> readout_scores(const OutputTrace& trace, double tau_loss, double dt);
// argmax, lowest index on ties.
int predicted_class(std::span<const double> scores);

// Plain-text raster, one "t<TAB>population<TAB>neuron" line per event.
void write_raster(std::ostream& out, const SpikeRecord& record);
void write_trace_csv(std::ostream& out, const OutputTrace& trace);

}  // namespace delaynet
