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

#include "delaynet/adam.hpp"

#include <cmath>
#include <string>

#include "delaynet/error.hpp"

namespace delaynet {
namespace {

void check_finite(const Matrix<double>& g, std::size_t j, const char* what) {
  const auto flat = g.flat();
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (!std::isfinite(flat[k])) {
      throw Error(ErrorKind::kDivergence,
                  std::string("non-finite ") + what + " gradient in projection " +
                      std::to_string(j) + " at (" + std::to_string(k / g.cols()) + ", " +
                      std::to_string(k % g.cols()) + ")");
    }
  }
}

void update(std::span<double> param, std::span<const double> grad, std::span<double> m,
            std::span<double> v, double lr, double scale, const AdamConfig& adam,
            double bias1, double bias2) {
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k] * scale;
    m[k] = adam.beta1 * m[k] + (1.0 - adam.beta1) * g;
    v[k] = adam.beta2 * v[k] + (1.0 - adam.beta2) * g * g;
    const double m_hat = m[k] / bias1;
    const double v_hat = v[k] / bias2;
    param[k] -= lr * m_hat / (std::sqrt(v_hat) + adam.epsilon);
  }
}

}  // namespace

AdamState AdamState::zeros_like(const Network& net) {
  AdamState s;
  const Gradients z = Gradients::zeros_like(net);
  s.m = z.projections;
  s.v = z.projections;
  return s;
}

void adam_step(Network& net, const Gradients& grads, AdamState& state, const OptimizerConfig& cfg) {
  if (grads.projections.size() != net.n_projections() ||
      state.m.size() != net.n_projections()) {
    throw Error(ErrorKind::kInvalidArgument, "optimizer state does not match the network");
  }
  double sq_norm = 0.0;
  for (std::size_t j = 0; j < grads.projections.size(); ++j) {
    const auto& g = grads.projections[j];
    if (!g.weights.same_shape(net.projection(j).weights) || !g.delays.same_shape(g.weights)) {
      throw Error(ErrorKind::kInvalidArgument, "gradient shape mismatch in projection " +
                                                   std::to_string(j));
    }
    check_finite(g.weights, j, "weight");
    check_finite(g.delays, j, "delay");
    for (double x : g.weights.flat()) sq_norm += x * x;
    if (net.projection(j).delays_trainable) {
      for (double x : g.delays.flat()) sq_norm += x * x;
    }
  }
  double scale = 1.0;
  const double norm = std::sqrt(sq_norm);
  if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) scale = cfg.grad_clip / norm;

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.adam.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.adam.beta2, t);
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    auto& proj = net.mutable_projection(j);
    const auto& g = grads.projections[j];
    update(proj.weights.flat(), g.weights.flat(), state.m[j].weights.flat(),
           state.v[j].weights.flat(), cfg.lr_weights, scale, cfg.adam, bias1, bias2);
    if (proj.delays_trainable) {
      update(proj.delays.flat(), g.delays.flat(), state.m[j].delays.flat(),
             state.v[j].delays.flat(), cfg.lr_delays, scale, cfg.adam, bias1, bias2);
    }
    clamp_delays(proj);
  }
}

}  // namespace delaynet
