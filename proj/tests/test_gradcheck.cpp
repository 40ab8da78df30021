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

#include <sstream>

#include "delaynet/gradcheck.hpp"
#include "support.hpp"

namespace delaynet {
namespace {

TEST(Gradcheck, LinearRegimeAllWeightsPassTight) {
  NetworkSpec spec;
  spec.n_timesteps = 80;
  spec.populations = {{"in", 6, PopulationKind::kInput, {}},
                      {"out", 3, PopulationKind::kOutput, {}}};
  spec.projections = {{"in", "out", Matrix<double>(6, 3), Matrix<double>(6, 3), true, 10.0}};
  const Network net = init_parameters(build_network(spec), InitConfig{0.0, 1.0, 0.0, 10.0, 3});
  const auto input = testing::bernoulli_input(2, 6, 70, 0.15);
  GradcheckOptions opt;
  opt.n_weight_coords = 18;
  opt.n_delay_coords = 0;
  opt.rel_tol = 1e-6;
  const auto report = gradcheck(net, input, 1, {}, opt);
  EXPECT_EQ(report.failed, 0) << report.summary();
  EXPECT_EQ(report.skipped, 0);
  EXPECT_EQ(report.passed, 18);
}

TEST(Gradcheck, RandomSmallNetwork) {
  const Network net = testing::random_network(31, 10, {20}, 3, 100, 0.8);
  const auto input = testing::bernoulli_input(4, 10, 100, 0.1);
  GradcheckOptions opt;
  opt.seed = 5;
  const auto report = gradcheck(net, input, 2, {}, opt);
  ASSERT_GT(report.passed + report.failed, 0);
  EXPECT_GE(report.pass_fraction(), 0.95) << report.summary();
  EXPECT_EQ(report.coords.size(), 128u);
}

TEST(Gradcheck, ZeroInputPasses) {
  const Network net = testing::random_network(1, 10, {20}, 3, 100);
  GradcheckOptions opt;
  const auto report = gradcheck(net, {}, 0, {}, opt);
  EXPECT_EQ(report.failed, 0);
  EXPECT_EQ(report.pass_fraction(), 1.0);
  for (const auto& c : report.coords) {
    EXPECT_EQ(c.analytic, 0.0);
    EXPECT_EQ(c.numeric, 0.0);
  }
}

TEST(Gradcheck, DeterministicCoordinateChoice) {
  const Network net = testing::random_network(3, 6, {8}, 2, 60, 0.8);
  const auto input = testing::bernoulli_input(1, 6, 60, 0.1);
  GradcheckOptions opt;
  opt.n_weight_coords = 10;
  opt.n_delay_coords = 10;
  opt.seed = 9;
  const auto a = gradcheck(net, input, 0, {}, opt);
  const auto b = gradcheck(net, input, 0, {}, opt);
  ASSERT_EQ(a.coords.size(), b.coords.size());
  for (std::size_t i = 0; i < a.coords.size(); ++i) EXPECT_EQ(a.coords[i].name(), b.coords[i].name());
}

TEST(Gradcheck, RelativeErrorFloor) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_NEAR(relative_error(1.0, 1.001), 0.001 / 1.001, 1e-12);
}

TEST(Gradcheck, CsvHasHeaderAndRows) {
  const Network net = testing::random_network(3, 6, {8}, 2, 60, 0.8);
  GradcheckOptions opt;
  opt.n_weight_coords = 3;
  opt.n_delay_coords = 2;
  const auto report = gradcheck(net, testing::bernoulli_input(1, 6, 60, 0.1), 0, {}, opt);
  std::ostringstream out;
  report.write_csv(out);
  std::size_t lines = 0;
  for (char c : out.str()) lines += c == '\n';
  EXPECT_EQ(lines, 6u);
}

}  // namespace
}  // namespace delaynet
