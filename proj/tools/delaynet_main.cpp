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

// delaynet command-line front end. Logs go to stderr, one-line summaries to
// stdout, everything else to files under --out.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "delaynet/bench.hpp"
#include "delaynet/checkpoint.hpp"
#include "delaynet/config.hpp"
#include "delaynet/emulator.hpp"
#include "delaynet/error.hpp"
#include "delaynet/exchange.hpp"
#include "delaynet/gradcheck.hpp"
#include "delaynet/quantize.hpp"
#include "delaynet/train.hpp"
#include "manifest.hpp"

namespace delaynet::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::vector<std::string> argv;
  std::string config;
  std::vector<std::string> sets;
  int threads = 0;
  bool deterministic = false;
  std::string log_level = "info";
  std::string data;
  std::string out;
  std::string split = "test";
  bool dry_run = false;
  bool overwrite = false;
  std::string checkpoint;
  std::string model;
  std::string compare;
  std::string resume;
  std::string dump_raster;
  int sample = 0;
  int folds = 5;
  int samples = 0;
  int gc_weights = 64;
  int gc_delays = 64;
  double gc_min_pass = 0.95;
  int weight_bits = 0;
  int decay_bits = 0;
  int threshold_bits = 0;
  int state_bits = 0;
  int accumulator_bits = 0;
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DELAYNET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

RunConfig resolve_config(const Options& o, const std::string& embedded = "") {
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = load_run_config(o.config, o.sets);
  } else if (!embedded.empty()) {
    cfg = parse_run_config(embedded, o.sets, "<checkpoint config>");
  } else {
    cfg = parse_run_config("", o.sets, "<defaults>");
  }
  cfg.train.threads = resolve_threads(o.threads > 0 ? o.threads : cfg.train.threads);
  if (o.deterministic) cfg.train.deterministic = true;
  if (o.weight_bits > 0) cfg.fixed.weight_bits = o.weight_bits;
  if (o.decay_bits > 0) cfg.fixed.decay_bits = o.decay_bits;
  if (o.threshold_bits > 0) cfg.fixed.threshold_bits = o.threshold_bits;
  if (o.state_bits > 0) cfg.fixed.state_bits = o.state_bits;
  if (o.accumulator_bits > 0) cfg.fixed.accumulator_bits = o.accumulator_bits;
  cfg.validate();
  return cfg;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw Error(ErrorKind::kNotFound, std::string(what) + " not found: " + path);
}

std::vector<BinnedSample> load_binned(const std::string& path, Split split, const RunConfig& cfg,
                                      int n_inputs, double dt, int n_timesteps) {
  require_file(path, "dataset");
  const SpikingDataset ds = load_hdf5_dataset(path, split);
  if (ds.n_channels > n_inputs) {
    throw Error(ErrorKind::kInvalidArgument,
                path + ": dataset has " + std::to_string(ds.n_channels) +
                    " channels but the network has " + std::to_string(n_inputs) + " inputs");
  }
  return bin_dataset(ds, dt, n_timesteps, cfg.data.max_duration_ms);
}

struct TrainingData {
  std::vector<BinnedSample> train;
  std::vector<BinnedSample> valid;
  std::vector<BinnedSample> test;
  std::vector<std::string> files;
};

TrainingData load_training_data(RunConfig cfg, const std::string& data_flag) {
  if (!data_flag.empty()) {
    cfg.data.source = DataConfig::Source::kHdf5;
    cfg.data.train_path = data_flag;
  }
  const auto& a = cfg.arch;
  TrainingData out;
  if (cfg.data.source == DataConfig::Source::kSynthetic) {
    auto sc = cfg.data.synthetic;
    if (sc.n_channels != a.n_inputs) {
      throw Error(ErrorKind::kInvalidArgument, "data.synthetic.n_channels (" +
                                                   std::to_string(sc.n_channels) +
                                                   ") must equal network.n_inputs");
    }
    const auto task = synthetic_delay_task(sc);
    out.train = bin_dataset(task.train, a.dt, a.n_timesteps);
    out.valid = bin_dataset(task.valid, a.dt, a.n_timesteps);
    out.test = bin_dataset(task.test, a.dt, a.n_timesteps);
    return out;
  }
  if (cfg.data.train_path.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no training data: pass --data or set data.train_path");
  }
  out.train = load_binned(cfg.data.train_path, Split::kTrain, cfg, a.n_inputs, a.dt, a.n_timesteps);
  out.files.push_back(cfg.data.train_path);
  if (!cfg.data.valid_path.empty()) {
    out.valid = load_binned(cfg.data.valid_path, Split::kValid, cfg, a.n_inputs, a.dt,
                            a.n_timesteps);
    out.files.push_back(cfg.data.valid_path);
  } else if (cfg.data.valid_fraction > 0.0) {
    std::vector<std::size_t> order(out.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x7661u));
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_valid = static_cast<std::size_t>(cfg.data.valid_fraction * order.size());
    std::vector<char> is_valid(order.size(), 0);
    for (std::size_t i = 0; i < n_valid; ++i) is_valid[order[i]] = 1;
    std::vector<BinnedSample> train;
    for (std::size_t i = 0; i < out.train.size(); ++i) {
      (is_valid[i] ? out.valid : train).push_back(std::move(out.train[i]));
    }
    out.train = std::move(train);
  }
  if (!cfg.data.test_path.empty()) {
    out.test = load_binned(cfg.data.test_path, Split::kTest, cfg, a.n_inputs, a.dt, a.n_timesteps);
    out.files.push_back(cfg.data.test_path);
  }
  return out;
}

// Evaluation set for commands that run an existing model.
std::vector<BinnedSample> load_eval_data(const Options& o, const RunConfig& cfg, bool have_cfg,
                                         int n_inputs, double dt, int n_timesteps,
                                         std::vector<std::string>& files) {
  const Split split = split_from_string(o.split);
  if (!o.data.empty()) {
    files.push_back(o.data);
    return load_binned(o.data, split, cfg, n_inputs, dt, n_timesteps);
  }
  if (!have_cfg) {
    throw Error(ErrorKind::kInvalidArgument, "no dataset: pass --data or --config");
  }
  if (cfg.data.source == DataConfig::Source::kSynthetic) {
    const auto task = synthetic_delay_task(cfg.data.synthetic);
    const auto& ds = split == Split::kTrain ? task.train
                     : split == Split::kValid ? task.valid
                                              : task.test;
    return bin_dataset(ds, dt, n_timesteps);
  }
  const std::string& path = split == Split::kTrain ? cfg.data.train_path
                            : split == Split::kValid ? cfg.data.valid_path
                                                     : cfg.data.test_path;
  if (path.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string("config has no path for split '") + to_string(split) + "'");
  }
  files.push_back(path);
  return load_binned(path, split, cfg, n_inputs, dt, n_timesteps);
}

void prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorKind::kInvalidArgument, "--out is required");
  fs::create_directories(dir);
}

void refuse_overwrite(const std::string& path, bool overwrite) {
  if (fs::exists(path) && !overwrite) {
    throw Error(ErrorKind::kInvalidArgument,
                "refusing to overwrite existing " + path + " (pass --overwrite)");
  }
}

std::string describe(const Network& net) {
  std::ostringstream os;
  for (std::size_t p = 0; p < net.n_populations(); ++p) {
    os << (p ? "-" : "") << net.population(p).size;
  }
  return os.str();
}

int cmd_train(const Options& o) {
  RunConfig cfg = resolve_config(o);
  Network net = build_initial_network(cfg);
  const auto params = count_parameters(net);
  if (o.dry_run) {
    if (!o.data.empty()) require_file(o.data, "dataset");
    std::cout << "dry-run: network=" << describe(net) << " projections=" << net.n_projections()
              << " weights=" << params.n_weights
              << " trainable_delays=" << params.n_trainable_delays << '\n';
    return 0;
  }
  if (!o.data.empty()) require_file(o.data, "dataset");
  prepare_out_dir(o.out);
  const fs::path out(o.out);
  const std::string ckpt_path = (out / "checkpoint.h5").string();
  const std::string best_path = (out / "best.h5").string();
  const std::string csv_path = (out / "metrics.csv").string();
  if (o.resume.empty()) refuse_overwrite(ckpt_path, o.overwrite);

  RunManifest manifest("train", o.argv);
  const std::string yaml = to_yaml(cfg);
  manifest.set_config(yaml, cfg.seed, cfg.train.deterministic, cfg.train.threads);
  manifest.add_input(o.config);

  TrainerState state = TrainerState::fresh(net, cfg.train);
  if (!o.resume.empty()) {
    auto ck = load_checkpoint(o.resume);
    manifest.add_input(o.resume);
    if (!(ck.net.spec().populations == net.spec().populations)) {
      throw Error(ErrorKind::kInvalidArgument, "resume checkpoint does not match the config");
    }
    net = std::move(ck.net);
    state = std::move(ck.state);
  }

  const TrainingData data = load_training_data(cfg, o.data);
  for (const auto& f : data.files) manifest.add_input(f);
  spdlog::info("training {} on {} samples ({} valid, {} test), {} epochs, {} thread(s)",
               describe(net), data.train.size(), data.valid.size(), data.test.size(),
               cfg.train.epochs, cfg.train.threads);

  {
    std::ofstream cfg_out(out / "config.yaml");
    cfg_out << yaml;
  }
  const bool zero_wall = cfg.train.deterministic;
  std::ofstream csv(csv_path);
  write_metrics_header(csv);
  for (const auto& m : state.history) write_metrics_row(csv, m, zero_wall);
  csv.flush();

  FitCallbacks callbacks;
  callbacks.on_epoch = [&](const Network& n, const TrainerState& s, const EpochMetrics& m) {
    write_metrics_row(csv, m, zero_wall);
    csv.flush();
    save_checkpoint(ckpt_path, n, s, yaml, zero_wall);
    spdlog::info("epoch {:3d} loss {:.4f} reg {:.4f} train_acc {:.4f} val_acc {:.4f} rate {:.2f} Hz",
                 m.epoch, m.loss, m.reg_loss, m.train_accuracy, m.val_accuracy, m.mean_rate_hz);
  };
  callbacks.on_best = [&](const Network& n, const TrainerState& s) {
    save_checkpoint(best_path, n, s, yaml, zero_wall);
  };
  const Network best = fit(net, data.train, data.valid, cfg.train, state, callbacks);
  if (data.valid.empty()) save_checkpoint(best_path, best, state, yaml, zero_wall);
  csv.close();
  if (!fs::exists(ckpt_path)) save_checkpoint(ckpt_path, net, state, yaml, zero_wall);

  double test_acc = std::numeric_limits<double>::quiet_NaN();
  if (!data.test.empty()) {
    test_acc = evaluate(best, data.test, cfg.train.loss, cfg.train.forward_mode, cfg.train.threads)
                   .accuracy;
    manifest.set_result("test_accuracy", test_acc);
  }
  const EpochMetrics last = state.history.empty() ? EpochMetrics{} : state.history.back();
  manifest.set_result("train_accuracy", last.train_accuracy);
  if (!data.valid.empty()) manifest.set_result("best_val_accuracy", state.best_val_accuracy);
  for (const auto& p : {ckpt_path, best_path, csv_path, (out / "config.yaml").string()}) {
    manifest.add_output(p);
  }
  manifest.write((out / "manifest.json").string());
  std::cout << fmt::format("train: epochs={} train_acc={:.4f} best_val_acc={:.4f} test_acc={:.4f} out={}",
                           state.epoch, last.train_accuracy,
                           data.valid.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : state.best_val_accuracy,
                           test_acc,
                           o.out)
            << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  require_file(o.checkpoint, "checkpoint");
  const auto ck = load_checkpoint(o.checkpoint);
  const RunConfig cfg = resolve_config(o, ck.config_yaml);
  const bool have_cfg = !o.config.empty() || !ck.config_yaml.empty();
  const auto& net = ck.net;
  std::vector<std::string> files;
  const auto data = load_eval_data(o, cfg, have_cfg, net.population(net.input_population()).size,
                                   net.dt(), net.n_timesteps(), files);
  const auto r = evaluate(net, data, cfg.train.loss, cfg.train.forward_mode, cfg.train.threads);
  if (!o.dump_raster.empty()) {
    if (o.sample < 0 || static_cast<std::size_t>(o.sample) >= data.size()) {
      throw Error(ErrorKind::kInvalidArgument, "--sample out of range");
    }
    const auto fwd = run_forward(net, data[o.sample].spikes, net.n_timesteps(),
                                 {cfg.train.forward_mode});
    std::ofstream raster(o.dump_raster);
    write_raster(raster, fwd.record);
  }
  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    const fs::path out(o.out);
    std::ofstream pred(out / "predictions.csv");
    pred << "index,label,prediction\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      pred << i << ',' << data[i].label << ',' << r.predictions[i] << '\n';
    }
    std::ofstream conf(out / "confusion.csv");
    for (std::size_t a = 0; a < r.confusion.rows(); ++a) {
      for (std::size_t b = 0; b < r.confusion.cols(); ++b) {
        conf << (b ? "," : "") << r.confusion(a, b);
      }
      conf << '\n';
    }
    RunManifest manifest("eval", o.argv);
    manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, cfg.train.threads);
    manifest.add_input(o.checkpoint);
    manifest.add_input(o.config);
    for (const auto& f : files) manifest.add_input(f);
    manifest.add_output((out / "predictions.csv").string());
    manifest.add_output((out / "confusion.csv").string());
    if (!o.dump_raster.empty()) manifest.add_output(o.dump_raster);
    manifest.set_result("accuracy", r.accuracy);
    manifest.write((out / "manifest.json").string());
  }
  std::cout << fmt::format("eval: samples={} accuracy={:.4f} loss={:.4f} mean_rate_hz={:.3f}",
                           data.size(), r.accuracy, r.mean_loss, r.mean_rate_hz)
            << '\n';
  return 0;
}

int cmd_cv(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  if (!o.data.empty()) require_file(o.data, "dataset");
  const Network net = build_initial_network(cfg);
  const TrainingData data = load_training_data(cfg, o.data);
  spdlog::info("{}-fold cross-validation over {} samples", o.folds, data.train.size());
  const auto r = cross_validate(net, data.train, o.folds, cfg.train);
  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    const fs::path out(o.out);
    std::ofstream csv(out / "cv.csv");
    csv << "fold,n_held_out,accuracy\n";
    for (std::size_t f = 0; f < r.fold_accuracy.size(); ++f) {
      csv << f << ',' << r.folds[f].size() << ',' << r.fold_accuracy[f] << '\n';
    }
    RunManifest manifest("cv", o.argv);
    manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, cfg.train.threads);
    manifest.add_input(o.config);
    for (const auto& f : data.files) manifest.add_input(f);
    manifest.add_output((out / "cv.csv").string());
    manifest.set_result("mean_accuracy", r.mean);
    manifest.set_result("sd_accuracy", r.sd);
    manifest.write((out / "manifest.json").string());
  }
  std::cout << fmt::format("cv: folds={} mean_acc={:.4f} sd={:.4f}", o.folds, r.mean, r.sd)
            << '\n';
  return 0;
}

int cmd_gradcheck(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  if (!o.data.empty()) require_file(o.data, "dataset");
  const Network net = build_initial_network(cfg);
  const TrainingData data = load_training_data(cfg, o.data);
  if (o.sample < 0 || static_cast<std::size_t>(o.sample) >= data.train.size()) {
    throw Error(ErrorKind::kInvalidArgument, "--sample out of range");
  }
  GradcheckOptions opts;
  opts.n_weight_coords = o.gc_weights;
  opts.n_delay_coords = o.gc_delays;
  opts.seed = cfg.seed;
  const auto& s = data.train[static_cast<std::size_t>(o.sample)];
  const auto report = gradcheck(net, s.spikes, s.label, cfg.train.loss, opts);
  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    const fs::path out(o.out);
    std::ofstream csv(out / "gradcheck.csv");
    report.write_csv(csv);
    RunManifest manifest("gradcheck", o.argv);
    manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, cfg.train.threads);
    manifest.add_input(o.config);
    for (const auto& f : data.files) manifest.add_input(f);
    manifest.add_output((out / "gradcheck.csv").string());
    manifest.set_result("pass_fraction", report.pass_fraction());
    manifest.write((out / "manifest.json").string());
  }
  std::cout << report.summary() << '\n';
  if (report.pass_fraction() < o.gc_min_pass) {
    throw Error(ErrorKind::kInternal,
                fmt::format("gradcheck pass fraction {:.4f} below {:.4f}", report.pass_fraction(),
                            o.gc_min_pass));
  }
  return 0;
}

int cmd_export(const Options& o) {
  require_file(o.checkpoint, "checkpoint");
  if (o.out.empty()) throw Error(ErrorKind::kInvalidArgument, "--out is required");
  const auto ck = load_checkpoint(o.checkpoint);
  const RunConfig cfg = resolve_config(o, ck.config_yaml);
  const auto model = quantize(ck.net, cfg.train.loss.tau_loss, cfg.fixed);
  export_model(model, o.out, {o.overwrite});
  RunManifest manifest("export", o.argv);
  manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, cfg.train.threads);
  manifest.add_input(o.checkpoint);
  manifest.add_input(o.config);
  manifest.add_output(o.out);
  manifest.write(o.out + ".manifest.json");
  int max_steps = 0;
  for (const auto& p : model.projections) {
    for (auto d : p.delays.flat()) max_steps = std::max<int>(max_steps, d);
  }
  std::cout << fmt::format("export: out={} populations={} projections={} max_delay_steps={} bytes={}",
                           o.out, model.populations.size(), model.projections.size(), max_steps,
                           fs::file_size(o.out))
            << '\n';
  return 0;
}

int cmd_emulate(const Options& o) {
  require_file(o.model, "model file");
  const QuantizedModel model = import_model(o.model);
  std::optional<Checkpoint> ck;
  if (!o.compare.empty()) {
    require_file(o.compare, "checkpoint");
    ck = load_checkpoint(o.compare);
  }
  const std::string embedded = ck ? ck->config_yaml : "";
  const RunConfig cfg = resolve_config(o, embedded);
  const bool have_cfg = !o.config.empty() || !embedded.empty();
  const int n_in = model.populations[model.population_index("input") >= 0
                                         ? model.population_index("input")
                                         : 0].size;
  std::vector<std::string> files;
  const auto data = load_eval_data(o, cfg, have_cfg, n_in, model.dt, model.n_timesteps, files);
  const auto run = emulate_dataset(model, data, cfg.train.threads);
  std::optional<ParityReport> parity;
  if (ck) parity = parity_report(ck->net, model, data, cfg.train.threads);

  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    const fs::path out(o.out);
    RunManifest manifest("emulate", o.argv);
    manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, cfg.train.threads);
    manifest.add_input(o.model);
    manifest.add_input(o.compare);
    manifest.add_input(o.config);
    for (const auto& f : files) manifest.add_input(f);
    std::ofstream pred(out / "emulate.csv");
    pred << "index,label,prediction\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      pred << i << ',' << data[i].label << ',' << run.predictions[i] << '\n';
    }
    manifest.add_output((out / "emulate.csv").string());
    if (parity) {
      std::ofstream csv(out / "parity.csv");
      parity->write_csv(csv);
      manifest.add_output((out / "parity.csv").string());
      manifest.set_result("agreement", parity->agreement);
      manifest.set_result("float_accuracy", parity->accuracy_reference);
    }
    manifest.set_result("accuracy", run.accuracy);
    manifest.write((out / "manifest.json").string());
  }
  std::cout << fmt::format("emulate: samples={} accuracy={:.4f}", data.size(), run.accuracy);
  if (parity) std::cout << " parity: " << parity->summary();
  std::cout << '\n';
  return 0;
}

int cmd_parity(const Options& o) {
  require_file(o.checkpoint, "checkpoint");
  const auto ck = load_checkpoint(o.checkpoint);
  const RunConfig cfg = resolve_config(o, ck.config_yaml);
  const bool have_cfg = !o.config.empty() || !ck.config_yaml.empty();
  QuantizedModel model;
  if (!o.model.empty()) {
    require_file(o.model, "model file");
    model = import_model(o.model);
  } else {
    model = quantize(ck.net, cfg.train.loss.tau_loss, cfg.fixed);
  }
  std::vector<std::string> files;
  const auto data = load_eval_data(o, cfg, have_cfg,
                                   ck.net.population(ck.net.input_population()).size,
                                   ck.net.dt(), ck.net.n_timesteps(), files);
  const auto report = parity_report(ck.net, model, data, cfg.train.threads);
  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    const fs::path out(o.out);
    std::ofstream csv(out / "parity.csv");
    report.write_csv(csv);
    std::ofstream summary(out / "parity_summary.txt");
    summary << report.summary() << '\n';
    RunManifest manifest("parity", o.argv);
    manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, cfg.train.threads);
    manifest.add_input(o.checkpoint);
    manifest.add_input(o.model);
    manifest.add_input(o.config);
    for (const auto& f : files) manifest.add_input(f);
    manifest.add_output((out / "parity.csv").string());
    manifest.add_output((out / "parity_summary.txt").string());
    manifest.set_result("agreement", report.agreement);
    manifest.set_result("float_accuracy", report.accuracy_reference);
    manifest.set_result("quantized_accuracy", report.accuracy_candidate);
    manifest.write((out / "manifest.json").string());
  }
  std::cout << "parity: " << report.summary() << '\n';
  return 0;
}

int cmd_bench(const Options& o) {
  require_file(o.model, "model file");
  const QuantizedModel model = import_model(o.model);
  const RunConfig cfg = resolve_config(o);
  const int n_in = model.populations[static_cast<std::size_t>(
                                         std::max(model.population_index("input"), 0))]
                       .size;
  std::vector<std::string> files;
  const auto data =
      load_eval_data(o, cfg, !o.config.empty(), n_in, model.dt, model.n_timesteps, files);
  const auto report = bench(model, data, o.samples);
  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    const fs::path out(o.out);
    std::ofstream csv(out / "bench.csv");
    report.write_csv(csv);
    RunManifest manifest("bench", o.argv);
    manifest.set_config(to_yaml(cfg), cfg.seed, cfg.train.deterministic, 1);
    manifest.add_input(o.model);
    manifest.add_input(o.config);
    for (const auto& f : files) manifest.add_input(f);
    manifest.add_output((out / "bench.csv").string());
    manifest.set_result("synaptic_events_per_sample", report.synaptic_events_per_sample);
    manifest.set_result("neuron_updates_per_sample", report.neuron_updates_per_sample);
    manifest.write((out / "manifest.json").string());
  }
  std::cout << "bench: " << report.summary() << '\n';
  return 0;
}

int cmd_gen_synthetic(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  prepare_out_dir(o.out);
  const fs::path out(o.out);
  const auto task = synthetic_delay_task(cfg.data.synthetic);
  RunManifest manifest("gen-synthetic", o.argv);
  manifest.set_config(to_yaml(cfg), cfg.seed, true, 1);
  manifest.add_input(o.config);
  for (const auto* ds : {&task.train, &task.valid, &task.test}) {
    if (ds->samples.empty()) continue;
    const std::string path = (out / (std::string(to_string(ds->split)) + ".h5")).string();
    refuse_overwrite(path, o.overwrite);
    save_hdf5_dataset(*ds, path);
    manifest.add_output(path);
  }
  manifest.write((out / "manifest.json").string());
  std::cout << fmt::format("gen-synthetic: classes={} channels={} train={} valid={} test={} out={}",
                           cfg.data.synthetic.n_classes, cfg.data.synthetic.n_channels,
                           task.train.samples.size(), task.valid.samples.size(),
                           task.test.samples.size(), o.out)
            << '\n';
  return 0;
}

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kConstraint: return "constraint";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kOverflow: return "overflow";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "YAML run configuration");
  cmd->add_option("--set", o.sets, "Override a config value, e.g. --set train.epochs=5");
  cmd->add_option("--threads", o.threads,
                  "Worker threads (default: $DELAYNET_THREADS, else config, else 1)");
  cmd->add_flag("--deterministic", o.deterministic, "Fixed-order gradient reduction");
  cmd->add_option("--log-level", o.log_level, "trace, debug, info, warn, error, off");
}

void add_fixed_point(CLI::App* cmd, Options& o) {
  cmd->add_option("--weight-bits", o.weight_bits, "Override quantize.weight_bits");
  cmd->add_option("--decay-bits", o.decay_bits, "Override quantize.decay_bits");
  cmd->add_option("--threshold-bits", o.threshold_bits, "Override quantize.threshold_bits");
  cmd->add_option("--state-bits", o.state_bits, "Override quantize.state_bits");
  cmd->add_option("--accumulator-bits", o.accumulator_bits, "Override quantize.accumulator_bits");
}

}  // namespace

int run(int argc, char** argv) {
  Options o;
  o.argv.assign(argv, argv + argc);
  CLI::App app{"delaynet: spiking networks with learnable synaptic delays"};
  app.set_version_flag("--version", DELAYNET_VERSION);
  app.require_subcommand(1);
  std::function<int(const Options&)> action;

  auto* train = app.add_subcommand("train", "Train a network and write checkpoints + metrics");
  add_common(train, o);
  train->add_option("--data", o.data, "Training set (HDF5, spikes/times + spikes/units + labels)");
  train->add_option("--out", o.out, "Output directory");
  train->add_option("--resume", o.resume, "Continue from this checkpoint");
  train->add_flag("--dry-run", o.dry_run, "Validate config, build network, print counts; write nothing");
  train->add_flag("--overwrite", o.overwrite, "Replace an existing run in --out");
  train->callback([&] { action = cmd_train; });

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval, o);
  eval->add_option("--checkpoint", o.checkpoint, "Training checkpoint (HDF5)")->required();
  eval->add_option("--data", o.data, "Evaluation set (HDF5)");
  eval->add_option("--split", o.split, "Split of the configured data to use")->capture_default_str();
  eval->add_option("--out", o.out, "Directory for predictions and confusion matrix");
  eval->add_option("--dump-raster", o.dump_raster, "Write the spike raster of --sample here");
  eval->add_option("--sample", o.sample, "Sample index for --dump-raster");
  eval->callback([&] { action = cmd_eval; });

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation on the training set");
  add_common(cv, o);
  cv->add_option("--data", o.data, "Training set (HDF5)");
  cv->add_option("--folds", o.folds, "Number of folds")->capture_default_str();
  cv->add_option("--out", o.out, "Output directory");
  cv->callback([&] { action = cmd_cv; });

  auto* gc = app.add_subcommand("gradcheck", "Compare gradients with finite differences");
  add_common(gc, o);
  gc->add_option("--data", o.data, "Training set (HDF5)");
  gc->add_option("--sample", o.sample, "Training sample index")->capture_default_str();
  gc->add_option("--weights", o.gc_weights, "Weight coordinates")->capture_default_str();
  gc->add_option("--delays", o.gc_delays, "Delay coordinates")->capture_default_str();
  gc->add_option("--min-pass", o.gc_min_pass, "Required pass fraction")->capture_default_str();
  gc->add_option("--out", o.out, "Output directory");
  gc->callback([&] { action = cmd_gradcheck; });

  auto* ex = app.add_subcommand("export", "Quantize a checkpoint and write an exchange file");
  add_common(ex, o);
  add_fixed_point(ex, o);
  ex->add_option("--checkpoint", o.checkpoint, "Training checkpoint (HDF5)")->required();
  ex->add_option("--out", o.out, "Exchange file to write")->required();
  ex->add_flag("--overwrite", o.overwrite, "Replace an existing file");
  ex->callback([&] { action = cmd_export; });

  auto* em = app.add_subcommand("emulate", "Run an exchange file on the fixed-point emulator");
  add_common(em, o);
  em->add_option("--model", o.model, "Exchange file")->required();
  em->add_option("--data", o.data, "Evaluation set (HDF5)");
  em->add_option("--split", o.split, "Split of the configured data to use")->capture_default_str();
  em->add_option("--compare", o.compare, "Float checkpoint for a parity report");
  em->add_option("--out", o.out, "Report directory");
  em->callback([&] { action = cmd_emulate; });

  auto* pa = app.add_subcommand("parity", "Float-vs-quantized agreement report");
  add_common(pa, o);
  add_fixed_point(pa, o);
  pa->add_option("--checkpoint", o.checkpoint, "Training checkpoint (HDF5)")->required();
  pa->add_option("--model", o.model, "Exchange file (default: quantize the checkpoint)");
  pa->add_option("--data", o.data, "Evaluation set (HDF5)");
  pa->add_option("--split", o.split, "Split of the configured data to use")->capture_default_str();
  pa->add_option("--out", o.out, "Report directory");
  pa->callback([&] { action = cmd_parity; });

  auto* be = app.add_subcommand("bench", "Software cost proxies (not hardware energy)");
  add_common(be, o);
  be->add_option("--model", o.model, "Exchange file")->required();
  be->add_option("--data", o.data, "Evaluation set (HDF5)");
  be->add_option("--split", o.split, "Split of the configured data to use")->capture_default_str();
  be->add_option("--samples", o.samples, "Number of samples (0 = all)");
  be->add_option("--out", o.out, "Report directory");
  be->callback([&] { action = cmd_bench; });

  auto* gen = app.add_subcommand("gen-synthetic", "Write the synthetic delay task as HDF5 files");
  add_common(gen, o);
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_flag("--overwrite", o.overwrite, "Replace existing files");
  gen->callback([&] { action = cmd_gen_synthetic; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto logger = spdlog::stderr_color_mt("delaynet");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(o.log_level));
  try {
    return action(o);
  } catch (const Error& e) {
    std::cerr << "error[" << kind_name(e.kind()) << "]: " << e.what() << '\n';
    return is_input_error(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace delaynet::cli

int main(int argc, char** argv) { return delaynet::cli::run(argc, argv); }
