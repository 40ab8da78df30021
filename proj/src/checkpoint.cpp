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

#include "delaynet/checkpoint.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "delaynet/error.hpp"
#include "hdf5_util.hpp"

namespace delaynet {
namespace {

namespace fs = std::filesystem;

constexpr const char* kMagic = "delaynet-checkpoint";

void write_matrix(hid_t g, const std::string& name, const Matrix<double>& m) {
  h5::write_dataset(g, name, std::vector<double>(m.flat().begin(), m.flat().end()),
                    {m.rows(), m.cols()});
}

Matrix<double> read_matrix(hid_t g, const std::string& name, const std::string& where,
                           std::size_t rows, std::size_t cols) {
  std::vector<hsize_t> dims;
  const auto data = h5::read_dataset<double>(g, name, dims, where + "/" + name);
  if (dims.size() != 2 || dims[0] != rows || dims[1] != cols) {
    throw Error(ErrorKind::kFormat, where + "/" + name + ": shape mismatch");
  }
  Matrix<double> m(rows, cols);
  std::copy(data.begin(), data.end(), m.flat().begin());
  return m;
}

void write_column(hid_t g, const char* name, std::span<const EpochMetrics> h,
                  double EpochMetrics::*field) {
  std::vector<double> col;
  for (const auto& m : h) col.push_back(m.*field);
  h5::write_dataset(g, name, col, {col.size()});
}

void write_file(const std::string& path, const Network& net, const TrainerState& state,
                const std::string& config_yaml) {
  auto file = h5::create_file(path);
  const hid_t root = file.get();
  h5::write_string_attribute(root, "format", kMagic);
  h5::write_attribute<std::int32_t>(root, "version", kCheckpointFormatVersion);
  h5::write_attribute<std::int32_t>(root, "epoch", state.epoch);
  h5::write_attribute<double>(root, "best_val_accuracy", state.best_val_accuracy);
  std::ostringstream os;
  os << state.rng;
  const std::string rng = os.str();
  h5::write_dataset(root, "rng_state", std::vector<std::uint8_t>(rng.begin(), rng.end()),
                    {rng.size()});
  h5::write_dataset(root, "config_yaml",
                    std::vector<std::uint8_t>(config_yaml.begin(), config_yaml.end()),
                    {config_yaml.size()});

  auto spec_group = h5::create_group(root, "spec");
  const hid_t sg = spec_group.get();
  const auto& spec = net.spec();
  h5::write_attribute<double>(sg, "dt", spec.dt);
  h5::write_attribute<std::int32_t>(sg, "n_timesteps", spec.n_timesteps);
  h5::write_attribute<std::int32_t>(sg, "n_populations",
                                    static_cast<std::int32_t>(spec.populations.size()));
  h5::write_attribute<std::int32_t>(sg, "n_projections",
                                    static_cast<std::int32_t>(spec.projections.size()));
  for (std::size_t p = 0; p < spec.populations.size(); ++p) {
    const auto& pop = spec.populations[p];
    auto g = h5::create_group(sg, "pop" + std::to_string(p));
    h5::write_string_attribute(g.get(), "id", pop.id);
    h5::write_string_attribute(g.get(), "kind", to_string(pop.kind));
    h5::write_attribute<std::int32_t>(g.get(), "size", pop.size);
    h5::write_attribute<double>(g.get(), "tau_mem", pop.neuron.tau_mem);
    h5::write_attribute<double>(g.get(), "tau_syn", pop.neuron.tau_syn);
    h5::write_attribute<double>(g.get(), "v_th", pop.neuron.v_threshold);
    h5::write_attribute<double>(g.get(), "v_reset", pop.neuron.v_reset);
  }
  for (std::size_t j = 0; j < spec.projections.size(); ++j) {
    const auto& proj = spec.projections[j];
    auto g = h5::create_group(sg, "proj" + std::to_string(j));
    h5::write_string_attribute(g.get(), "source", proj.source);
    h5::write_string_attribute(g.get(), "target", proj.target);
    h5::write_attribute<std::int32_t>(g.get(), "delays_trainable", proj.delays_trainable ? 1 : 0);
    h5::write_attribute<double>(g.get(), "max_delay", proj.max_delay);
    write_matrix(g.get(), "weights", proj.weights);
    write_matrix(g.get(), "delays", proj.delays);
  }

  auto opt = h5::create_group(root, "optimizer");
  h5::write_attribute<std::int64_t>(opt.get(), "step", state.adam.step);
  for (std::size_t j = 0; j < state.adam.m.size(); ++j) {
    auto g = h5::create_group(opt.get(), "proj" + std::to_string(j));
    write_matrix(g.get(), "m_weights", state.adam.m[j].weights);
    write_matrix(g.get(), "m_delays", state.adam.m[j].delays);
    write_matrix(g.get(), "v_weights", state.adam.v[j].weights);
    write_matrix(g.get(), "v_delays", state.adam.v[j].delays);
  }

  auto hist = h5::create_group(root, "history");
  std::vector<std::int32_t> epochs;
  for (const auto& m : state.history) epochs.push_back(m.epoch);
  h5::write_dataset(hist.get(), "epoch", epochs, {epochs.size()});
  write_column(hist.get(), "loss", state.history, &EpochMetrics::loss);
  write_column(hist.get(), "reg_loss", state.history, &EpochMetrics::reg_loss);
  write_column(hist.get(), "train_acc", state.history, &EpochMetrics::train_accuracy);
  write_column(hist.get(), "val_acc", state.history, &EpochMetrics::val_accuracy);
  write_column(hist.get(), "mean_rate_hz", state.history, &EpochMetrics::mean_rate_hz);
  write_column(hist.get(), "wallclock", state.history, &EpochMetrics::wallclock_s);
}

std::string read_bytes(hid_t g, const std::string& name, const std::string& where) {
  std::vector<hsize_t> dims;
  const auto raw = h5::read_dataset<std::uint8_t>(g, name, dims, where);
  return std::string(raw.begin(), raw.end());
}

std::vector<double> read_column(hid_t g, const std::string& name, const std::string& where,
                                std::size_t n) {
  std::vector<hsize_t> dims;
  auto col = h5::read_dataset<double>(g, name, dims, where + "/" + name);
  if (col.size() != n) throw Error(ErrorKind::kFormat, where + "/" + name + ": length mismatch");
  return col;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net, const TrainerState& state,
                     const std::string& config_yaml, bool zero_wallclock) {
  const std::string tmp = path + ".tmp";
  try {
    if (zero_wallclock) {
      TrainerState copy = state;
      for (auto& m : copy.history) m.wallclock_s = 0.0;
      write_file(tmp, net, copy, config_yaml);
    } else {
      write_file(tmp, net, state, config_yaml);
    }
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::kNotFound, "checkpoint not found: " + path);
  auto file = h5::open_file(path);
  const hid_t root = file.get();
  const std::string where = path + ":";
  if (!h5::has_attribute(root, "format") ||
      h5::read_string_attribute(root, "format", where + "/") != kMagic) {
    throw Error(ErrorKind::kFormat, where + "/: not a delaynet checkpoint");
  }
  const auto version = h5::read_attribute<std::int32_t>(root, "version", where + "/");
  if (version != kCheckpointFormatVersion) {
    throw Error(ErrorKind::kFormat, where + "/: unsupported checkpoint version " +
                                        std::to_string(version));
  }

  NetworkSpec spec;
  auto sg = h5::open_group(root, "spec");
  const std::string sw = where + "/spec";
  spec.dt = h5::read_attribute<double>(sg.get(), "dt", sw);
  spec.n_timesteps = h5::read_attribute<std::int32_t>(sg.get(), "n_timesteps", sw);
  const auto n_pop = h5::read_attribute<std::int32_t>(sg.get(), "n_populations", sw);
  const auto n_proj = h5::read_attribute<std::int32_t>(sg.get(), "n_projections", sw);
  for (int p = 0; p < n_pop; ++p) {
    const std::string pw = sw + "/pop" + std::to_string(p);
    auto g = h5::open_group(sg.get(), "pop" + std::to_string(p));
    PopulationSpec pop;
    pop.id = h5::read_string_attribute(g.get(), "id", pw);
    pop.kind = population_kind_from_string(h5::read_string_attribute(g.get(), "kind", pw));
    pop.size = h5::read_attribute<std::int32_t>(g.get(), "size", pw);
    pop.neuron.tau_mem = h5::read_attribute<double>(g.get(), "tau_mem", pw);
    pop.neuron.tau_syn = h5::read_attribute<double>(g.get(), "tau_syn", pw);
    pop.neuron.v_threshold = h5::read_attribute<double>(g.get(), "v_th", pw);
    pop.neuron.v_reset = h5::read_attribute<double>(g.get(), "v_reset", pw);
    spec.populations.push_back(std::move(pop));
  }
  auto size_of = [&](const std::string& id, const std::string& at) -> std::size_t {
    for (const auto& p : spec.populations) {
      if (p.id == id) return static_cast<std::size_t>(p.size);
    }
    throw Error(ErrorKind::kFormat, at + ": unknown population '" + id + "'");
  };
  for (int j = 0; j < n_proj; ++j) {
    const std::string pw = sw + "/proj" + std::to_string(j);
    auto g = h5::open_group(sg.get(), "proj" + std::to_string(j));
    ProjectionSpec proj;
    proj.source = h5::read_string_attribute(g.get(), "source", pw);
    proj.target = h5::read_string_attribute(g.get(), "target", pw);
    proj.delays_trainable = h5::read_attribute<std::int32_t>(g.get(), "delays_trainable", pw) != 0;
    proj.max_delay = h5::read_attribute<double>(g.get(), "max_delay", pw);
    const auto rows = size_of(proj.source, pw);
    const auto cols = size_of(proj.target, pw);
    proj.weights = read_matrix(g.get(), "weights", pw, rows, cols);
    proj.delays = read_matrix(g.get(), "delays", pw, rows, cols);
    spec.projections.push_back(std::move(proj));
  }
  Checkpoint ck{build_network(std::move(spec)), {}, {}};

  auto& state = ck.state;
  state.epoch = h5::read_attribute<std::int32_t>(root, "epoch", where + "/");
  state.best_val_accuracy = h5::read_attribute<double>(root, "best_val_accuracy", where + "/");
  std::istringstream rng(read_bytes(root, "rng_state", where + "/rng_state"));
  rng >> state.rng;
  if (!rng) throw Error(ErrorKind::kFormat, where + "/rng_state: corrupt generator state");
  ck.config_yaml = read_bytes(root, "config_yaml", where + "/config_yaml");

  auto opt = h5::open_group(root, "optimizer");
  state.adam = AdamState::zeros_like(ck.net);
  state.adam.step = h5::read_attribute<std::int64_t>(opt.get(), "step", where + "/optimizer");
  for (std::size_t j = 0; j < state.adam.m.size(); ++j) {
    const std::string ow = where + "/optimizer/proj" + std::to_string(j);
    auto g = h5::open_group(opt.get(), "proj" + std::to_string(j));
    const auto& w = ck.net.projection(j).weights;
    state.adam.m[j].weights = read_matrix(g.get(), "m_weights", ow, w.rows(), w.cols());
    state.adam.m[j].delays = read_matrix(g.get(), "m_delays", ow, w.rows(), w.cols());
    state.adam.v[j].weights = read_matrix(g.get(), "v_weights", ow, w.rows(), w.cols());
    state.adam.v[j].delays = read_matrix(g.get(), "v_delays", ow, w.rows(), w.cols());
  }

  auto hist = h5::open_group(root, "history");
  const std::string hw = where + "/history";
  std::vector<hsize_t> dims;
  const auto epochs = h5::read_dataset<std::int32_t>(hist.get(), "epoch", dims, hw + "/epoch");
  const std::size_t n = epochs.size();
  const auto loss = read_column(hist.get(), "loss", hw, n);
  const auto reg = read_column(hist.get(), "reg_loss", hw, n);
  const auto train_acc = read_column(hist.get(), "train_acc", hw, n);
  const auto val_acc = read_column(hist.get(), "val_acc", hw, n);
  const auto rate = read_column(hist.get(), "mean_rate_hz", hw, n);
  const auto wall = read_column(hist.get(), "wallclock", hw, n);
  for (std::size_t k = 0; k < n; ++k) {
    state.history.push_back({epochs[k], loss[k], reg[k], train_acc[k], val_acc[k], rate[k],
                             wall[k]});
  }
  return ck;
}

void write_metrics_header(std::ostream& out) {
  out << "epoch,loss,reg_loss,train_acc,val_acc,mean_rate_hz,wallclock\n";
}

void write_metrics_row(std::ostream& out, const EpochMetrics& m, bool zero_wallclock) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17) << m.epoch << ',' << m.loss << ',' << m.reg_loss << ','
      << m.train_accuracy << ',';
  if (std::isnan(m.val_accuracy)) {
    out << "nan";
  } else {
    out << m.val_accuracy;
  }
  out << ',' << m.mean_rate_hz << ',' << (zero_wallclock ? 0.0 : m.wallclock_s) << '\n';
  out.flags(flags);
  out.precision(prec);
}

void write_metrics_csv(const std::string& path, std::span<const EpochMetrics> history,
                       bool zero_wallclock) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInternal, "cannot write " + path);
  write_metrics_header(out);
  for (const auto& m : history) write_metrics_row(out, m, zero_wallclock);
}

}  // namespace delaynet
