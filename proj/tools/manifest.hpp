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

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace delaynet::cli {

std::string sha256_file(const std::string& path);

// One per artifact-producing command, written next to its outputs.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void set_config(std::string yaml, std::uint64_t seed, bool deterministic, int threads);
  void add_input(const std::string& path);
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void set_result(const std::string& key, double value) { results_.emplace_back(key, value); }

  // Stamps the wallclock and writes JSON to `path` (atomically).
  void write(const std::string& path) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string config_yaml_;
  std::uint64_t seed_ = 0;
  bool deterministic_ = false;
  int threads_ = 1;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> results_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace delaynet::cli
