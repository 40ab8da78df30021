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

#include "delaynet/bench.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "delaynet/emulator.hpp"

namespace delaynet {

CostReport bench(const QuantizedModel& model, std::span<const BinnedSample> data, int n_samples) {
  const std::size_t n = n_samples > 0 ? std::min<std::size_t>(n_samples, data.size()) : data.size();
  // Single-threaded so that wallclock is per-sample latency.
  const auto run = emulate_dataset(model, data.first(n), 1);
  CostReport r;
  r.n_samples = n;
  if (n == 0) return r;
  const double k = static_cast<double>(n);
  r.synaptic_events_per_sample = run.stats.synaptic_events / k;
  r.neuron_updates_per_sample = run.stats.hidden_neuron_updates / k;
  r.readout_updates_per_sample =
      static_cast<double>(run.stats.neuron_updates - run.stats.hidden_neuron_updates) / k;
  r.wallclock_per_sample_s = run.wallclock_s / k;
  r.proxy_edp =
      (r.synaptic_events_per_sample + r.neuron_updates_per_sample) * r.wallclock_per_sample_s;
  return r;
}

void CostReport::write_csv(std::ostream& out) const {
  out << "# software proxies from the fixed-point emulator; not hardware energy figures\n";
  out << "n_samples,synaptic_events_per_sample,neuron_updates_per_sample,"
         "readout_updates_per_sample,wallclock_per_sample_s,proxy_edp\n";
  out << n_samples << ',' << synaptic_events_per_sample << ',' << neuron_updates_per_sample << ','
      << readout_updates_per_sample << ',' << wallclock_per_sample_s << ',' << proxy_edp << '\n';
}

std::string CostReport::summary() const {
  std::ostringstream os;
  os << "samples=" << n_samples << " synaptic_events/sample=" << synaptic_events_per_sample
     << " neuron_updates/sample=" << neuron_updates_per_sample
     << " wallclock/sample=" << wallclock_per_sample_s << "s proxy_edp=" << proxy_edp
     << " (software proxy, not energy)";
  return os.str();
}

}  // namespace delaynet
