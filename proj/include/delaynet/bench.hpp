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

#include <iosfwd>
#include <span>
#include <string>

#include "delaynet/data.hpp"
#include "delaynet/quantize.hpp"

namespace delaynet {

// Software cost counters from the fixed-point emulator. None of these are
// hardware energy or latency measurements.
struct CostReport {
  std::size_t n_samples = 0;
  // Spikes (input and hidden) times their fan-out.
  double synaptic_events_per_sample = 0.0;
  // Hidden neuron state updates; the readout population is counted apart.
  double neuron_updates_per_sample = 0.0;
  double readout_updates_per_sample = 0.0;
  double wallclock_per_sample_s = 0.0;
  // (synaptic events + neuron updates) x wallclock per sample.
  double proxy_edp = 0.0;

  void write_csv(std::ostream& out) const;
  std::string summary() const;
};

// Uses the first min(n_samples, data.size()) samples; n_samples <= 0 uses all.
CostReport bench(const QuantizedModel& model, std::span<const BinnedSample> data,
                 int n_samples = 0);

}  // namespace delaynet
