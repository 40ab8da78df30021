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

#include "delaynet/exchange.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "delaynet/error.hpp"
#include "hdf5_util.hpp"

namespace delaynet {
namespace {

namespace fs = std::filesystem;

template <typename Out, typename In>
std::vector<Out> widen(std::span<const In> in) {
  return std::vector<Out>(in.begin(), in.end());
}

void write_model(const QuantizedModel& model, const std::string& path) {
  auto file = h5::create_file(path);
  auto net = h5::create_group(file.get(), "net");
  const hid_t g = net.get();
  h5::write_attribute<std::int32_t>(g, "version", kExchangeFormatVersion);
  h5::write_string_attribute(g, "producer", std::string("delaynet ") + DELAYNET_VERSION);
  h5::write_attribute<double>(g, "dt", model.dt);
  h5::write_attribute<std::int32_t>(g, "n_populations",
                                    static_cast<std::int32_t>(model.populations.size()));
  h5::write_attribute<std::int32_t>(g, "n_projections",
                                    static_cast<std::int32_t>(model.projections.size()));
  h5::write_attribute<std::int32_t>(g, "n_timesteps", model.n_timesteps);
  h5::write_attribute<double>(g, "tau_loss", model.tau_loss);
  h5::write_attribute<std::int32_t>(g, "weight_bits", model.fixed.weight_bits);
  h5::write_attribute<std::int32_t>(g, "decay_bits", model.fixed.decay_bits);
  h5::write_attribute<std::int32_t>(g, "threshold_bits", model.fixed.threshold_bits);
  h5::write_attribute<std::int32_t>(g, "state_bits", model.fixed.state_bits);
  h5::write_attribute<std::int32_t>(g, "accumulator_bits", model.fixed.accumulator_bits);

  for (std::size_t p = 0; p < model.populations.size(); ++p) {
    const auto& pop = model.populations[p];
    auto grp = h5::create_group(g, "pop" + std::to_string(p));
    const hid_t h = grp.get();
    h5::write_string_attribute(h, "id", pop.id);
    h5::write_string_attribute(h, "kind", to_string(pop.kind));
    h5::write_attribute<std::int32_t>(h, "size", pop.size);
    h5::write_attribute<double>(h, "tau_mem", pop.neuron.tau_mem);
    h5::write_attribute<double>(h, "tau_syn", pop.neuron.tau_syn);
    h5::write_attribute<double>(h, "v_th", pop.neuron.v_threshold);
    h5::write_attribute<double>(h, "v_reset", pop.neuron.v_reset);
    h5::write_attribute<std::uint16_t>(h, "decay_v", pop.decay_v);
    h5::write_attribute<std::uint16_t>(h, "decay_i", pop.decay_i);
    h5::write_attribute<std::int32_t>(h, "threshold_q", pop.threshold_q);
    h5::write_attribute<std::int32_t>(h, "reset_q", pop.reset_q);
    h5::write_attribute<std::int32_t>(h, "frac_bits", pop.frac_bits);
    h5::write_attribute<double>(h, "state_scale", pop.state_scale);
  }
  for (std::size_t j = 0; j < model.projections.size(); ++j) {
    const auto& proj = model.projections[j];
    auto grp = h5::create_group(g, "proj" + std::to_string(j));
    const hid_t h = grp.get();
    h5::write_string_attribute(h, "source", proj.source);
    h5::write_string_attribute(h, "target", proj.target);
    h5::write_attribute<double>(h, "scale", proj.scale);
    h5::write_attribute<std::int32_t>(h, "multiplier", proj.multiplier);
    const std::vector<hsize_t> dims = {proj.weights.rows(), proj.weights.cols()};
    h5::write_dataset(h, "weights", widen<std::int8_t>(proj.weights.flat()), dims);
    h5::write_dataset(h, "delays", widen<std::uint8_t>(proj.delays.flat()), dims);
  }
}

template <typename T>
Matrix<T> read_matrix(hid_t parent, const std::string& name, const std::string& where,
                      std::int64_t lo, std::int64_t hi, const char* what) {
  std::vector<hsize_t> dims;
  // Read wide so that out-of-range values are reported, not saturated.
  auto raw = h5::read_dataset<std::int64_t>(parent, name, dims, where);
  if (dims.size() != 2) throw Error(ErrorKind::kFormat, where + ": expected a 2-D dataset");
  Matrix<T> out(dims[0], dims[1]);
  auto flat = out.flat();
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k] < lo || raw[k] > hi) {
      throw Error(ErrorKind::kConstraint, where + ": " + what + " out of range (" +
                                              std::to_string(raw[k]) + ") at index " +
                                              std::to_string(k));
    }
    flat[k] = static_cast<T>(raw[k]);
  }
  return out;
}

}  // namespace

void export_model(const QuantizedModel& model, const std::string& path,
                  const ExportOptions& options) {
  model.validate();
  if (model.fixed.weight_bits > 8) {
    throw Error(ErrorKind::kConstraint,
                "exchange files hold 8-bit weights; model uses " +
                    std::to_string(model.fixed.weight_bits));
  }
  if (fs::exists(path) && !options.overwrite) {
    throw Error(ErrorKind::kInvalidArgument,
                "refusing to overwrite existing file '" + path + "' (pass --overwrite)");
  }
  const std::string tmp = path + ".tmp";
  try {
    write_model(model, tmp);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  fs::rename(tmp, path);
}

QuantizedModel import_model(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::kNotFound, "model file not found: " + path);
  auto file = h5::open_file(path);
  if (!h5::exists(file.get(), "net")) {
    throw Error(ErrorKind::kFormat, path + ":/net: missing group");
  }
  auto net = h5::open_group(file.get(), "net");
  const hid_t g = net.get();
  const std::string root = path + ":/net";
  const auto version = h5::read_attribute<std::int32_t>(g, "version", root);
  if (version != kExchangeFormatVersion) {
    throw Error(ErrorKind::kFormat, root + ": unsupported exchange format version " +
                                        std::to_string(version) + " (expected " +
                                        std::to_string(kExchangeFormatVersion) + ")");
  }
  QuantizedModel model;
  model.dt = h5::read_attribute<double>(g, "dt", root);
  model.n_timesteps = h5::read_attribute<std::int32_t>(g, "n_timesteps", root);
  model.tau_loss = h5::read_attribute<double>(g, "tau_loss", root);
  model.fixed.weight_bits = h5::read_attribute<std::int32_t>(g, "weight_bits", root);
  model.fixed.decay_bits = h5::read_attribute<std::int32_t>(g, "decay_bits", root);
  model.fixed.threshold_bits = h5::read_attribute<std::int32_t>(g, "threshold_bits", root);
  model.fixed.state_bits = h5::read_attribute<std::int32_t>(g, "state_bits", root);
  model.fixed.accumulator_bits = h5::read_attribute<std::int32_t>(g, "accumulator_bits", root);
  if (model.fixed.weight_bits > 8) {
    throw Error(ErrorKind::kFormat, root + ": weight_bits must be <= 8");
  }
  const auto n_pop = h5::read_attribute<std::int32_t>(g, "n_populations", root);
  const auto n_proj = h5::read_attribute<std::int32_t>(g, "n_projections", root);
  if (n_pop < 1 || n_proj < 0) throw Error(ErrorKind::kFormat, root + ": bad object counts");

  for (int p = 0; p < n_pop; ++p) {
    const std::string name = "pop" + std::to_string(p);
    const std::string where = root + "/" + name;
    if (!h5::exists(g, name)) throw Error(ErrorKind::kFormat, where + ": missing group");
    auto grp = h5::open_group(g, name);
    const hid_t h = grp.get();
    QuantizedPopulation pop;
    pop.id = h5::read_string_attribute(h, "id", where);
    try {
      pop.kind = population_kind_from_string(h5::read_string_attribute(h, "kind", where));
    } catch (const Error& e) {
      throw Error(ErrorKind::kFormat, where + ": " + e.what());
    }
    pop.size = h5::read_attribute<std::int32_t>(h, "size", where);
    pop.neuron.tau_mem = h5::read_attribute<double>(h, "tau_mem", where);
    pop.neuron.tau_syn = h5::read_attribute<double>(h, "tau_syn", where);
    pop.neuron.v_threshold = h5::read_attribute<double>(h, "v_th", where);
    pop.neuron.v_reset = h5::read_attribute<double>(h, "v_reset", where);
    pop.decay_v = h5::read_attribute<std::uint16_t>(h, "decay_v", where);
    pop.decay_i = h5::read_attribute<std::uint16_t>(h, "decay_i", where);
    pop.threshold_q = h5::read_attribute<std::int32_t>(h, "threshold_q", where);
    pop.reset_q = h5::read_attribute<std::int32_t>(h, "reset_q", where);
    pop.frac_bits = h5::read_attribute<std::int32_t>(h, "frac_bits", where);
    pop.state_scale = h5::read_attribute<double>(h, "state_scale", where);
    model.populations.push_back(std::move(pop));
  }
  const std::int64_t wmax = model.fixed.weight_max();
  for (int j = 0; j < n_proj; ++j) {
    const std::string name = "proj" + std::to_string(j);
    const std::string where = root + "/" + name;
    if (!h5::exists(g, name)) throw Error(ErrorKind::kFormat, where + ": missing group");
    auto grp = h5::open_group(g, name);
    const hid_t h = grp.get();
    QuantizedProjection proj;
    proj.source = h5::read_string_attribute(h, "source", where);
    proj.target = h5::read_string_attribute(h, "target", where);
    proj.scale = h5::read_attribute<double>(h, "scale", where);
    proj.multiplier = h5::read_attribute<std::int32_t>(h, "multiplier", where);
    proj.weights = read_matrix<std::int16_t>(h, "weights", where + "/weights", -wmax, wmax,
                                             "weight");
    proj.delays = read_matrix<std::uint8_t>(h, "delays", where + "/delays", 0, kMaxDelaySteps,
                                            "delay");
    model.projections.push_back(std::move(proj));
  }
  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), path + ":" + e.what());
  }
  return model;
}

}  // namespace delaynet
