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

#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "delaynet/error.hpp"

namespace delaynet::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kNotFound, "cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)),
      start_(std::chrono::steady_clock::now()) {}

void RunManifest::set_config(std::string yaml, std::uint64_t seed, bool deterministic,
                             int threads) {
  config_yaml_ = std::move(yaml);
  seed_ = seed;
  deterministic_ = deterministic;
  threads_ = threads;
}

void RunManifest::add_input(const std::string& path) {
  if (path.empty()) return;
  for (const auto& [p, _] : inputs_) {
    if (p == path) return;
  }
  inputs_.emplace_back(path, sha256_file(path));
}

void RunManifest::write(const std::string& path) const {
  nlohmann::ordered_json j;
  j["tool"] = "delaynet";
  j["version"] = DELAYNET_VERSION;
  j["command"] = command_;
  j["argv"] = argv_;
  j["seed"] = seed_;
  j["deterministic"] = deterministic_;
  j["threads"] = threads_;
  j["config"] = config_yaml_;
  auto& inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [p, h] : inputs_) inputs.push_back({{"path", p}, {"sha256", h}});
  j["outputs"] = outputs_;
  auto& results = j["results"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : results_) results[k] = v;
  j["wallclock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::kInternal, "cannot write " + path);
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace delaynet::cli
