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

#include "delaynet/gradcheck.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace delaynet {
namespace {

struct Objective {
  double value = 0.0;
  std::vector<SpikeEvent> events;
};

Objective evaluate(const NetworkSpec& spec, std::span<const InputSpike> input, int label,
                   const LossConfig& cfg, DelayMode mode) {
  const Network net = build_network(spec);
  const auto fwd = run_forward(net, input, net.n_timesteps(), {mode});
  const auto loss = loss_and_seed(fwd.trace, label, cfg, net.dt());
  const auto reg = regularization(net, fwd.record, cfg);
  return {loss.loss + reg.loss, fwd.record.events};
}

bool same_spike_steps(const std::vector<SpikeEvent>& a, const std::vector<SpikeEvent>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].step != b[k].step || a[k].population != b[k].population ||
        a[k].neuron != b[k].neuron) {
      return false;
    }
  }
  return true;
}

}  // namespace

const char* to_string(CoordinateStatus status) {
  switch (status) {
    case CoordinateStatus::kPass: return "pass";
    case CoordinateStatus::kFail: return "fail";
    case CoordinateStatus::kSkipped: return "skipped";
  }
  return "?";
}

std::string CoordinateCheck::name() const {
  std::ostringstream os;
  os << (is_delay ? 'd' : 'w') << ':' << projection << ':' << row << ':' << col;
  return os.str();
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale > 0.0 ? std::abs(analytic - numeric) / scale : 0.0;
}

double GradcheckReport::pass_fraction() const {
  const int ran = passed + failed;
  return ran > 0 ? static_cast<double>(passed) / ran : 1.0;
}

void GradcheckReport::write_csv(std::ostream& out) const {
  out << "coordinate,analytic,numeric,rel_error,status\n";
  out << std::setprecision(10);
  for (const auto& c : coords) {
    out << c.name() << ',' << c.analytic << ',' << c.numeric << ',' << c.rel_error << ','
        << to_string(c.status) << '\n';
  }
}

std::string GradcheckReport::summary() const {
  std::ostringstream os;
  os << "gradcheck: " << passed << " pass, " << failed << " fail, " << skipped
     << " skipped, pass fraction " << std::fixed << std::setprecision(4) << pass_fraction();
  return os.str();
}

GradcheckReport gradcheck(const Network& net, std::span<const InputSpike> input, int label,
                          const LossConfig& cfg, const GradcheckOptions& options) {
  // The regulariser is piecewise constant in the parameters, so its exact
  // derivative on a spike-stable coordinate is zero; the surrogate jump term
  // is therefore left out of the analytic side.
  LossConfig analytic_cfg = cfg;
  analytic_cfg.reg_strength = 0.0;
  const auto base_fwd = run_forward(net, input, net.n_timesteps(), {options.mode});
  const auto base_loss = loss_and_seed(base_fwd.trace, label, cfg, net.dt());
  const Gradients grads = backward(net, base_fwd.record, base_loss.seeds, analytic_cfg);

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> weight_sizes;
  std::vector<std::size_t> delay_sizes;
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    const auto& proj = net.projection(j);
    weight_sizes.push_back(proj.weights.size());
    delay_sizes.push_back(proj.delays_trainable ? proj.delays.size() : 0);
  }

  GradcheckReport report;
  auto sample = [&](const std::vector<std::size_t>& sizes, bool is_delay) {
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    if (total == 0) return;
    const int n = is_delay ? options.n_delay_coords : options.n_weight_coords;
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    for (int c = 0; c < n; ++c) {
      std::size_t flat = pick(rng);
      std::size_t j = 0;
      while (flat >= sizes[j]) flat -= sizes[j++];
      const auto& proj = net.projection(j);
      CoordinateCheck check;
      check.is_delay = is_delay;
      check.projection = static_cast<int>(j);
      check.row = static_cast<int>(flat / proj.weights.cols());
      check.col = static_cast<int>(flat % proj.weights.cols());
      const auto& g = grads.projections[j];
      check.analytic = is_delay ? g.delays.flat()[flat] : g.weights.flat()[flat];

      const double eps = is_delay ? options.eps_delay : options.eps_weight;
      const double x0 = is_delay ? proj.delays.flat()[flat] : proj.weights.flat()[flat];
      double lo = x0 - eps;
      double hi = x0 + eps;
      if (is_delay) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, proj.max_delay);
      }
      auto perturbed = [&](double x) {
        NetworkSpec spec = net.spec();
        auto& target = is_delay ? spec.projections[j].delays : spec.projections[j].weights;
        target.flat()[flat] = x;
        return evaluate(spec, input, label, cfg, options.mode);
      };
      const Objective plus = perturbed(hi);
      const Objective minus = perturbed(lo);
      check.numeric = (plus.value - minus.value) / (hi - lo);
      check.rel_error = relative_error(check.analytic, check.numeric);
      if (!same_spike_steps(plus.events, base_fwd.record.events) ||
          !same_spike_steps(minus.events, base_fwd.record.events)) {
        check.status = CoordinateStatus::kSkipped;
        ++report.skipped;
      } else if (std::abs(check.analytic - check.numeric) <= options.abs_tol ||
                 check.rel_error <= options.rel_tol) {
        check.status = CoordinateStatus::kPass;
        ++report.passed;
      } else {
        check.status = CoordinateStatus::kFail;
        ++report.failed;
      }
      report.coords.push_back(check);
    }
  };
  sample(weight_sizes, false);
  sample(delay_sizes, true);
  return report;
}

}  // namespace delaynet
