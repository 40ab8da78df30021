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

#include "delaynet/config.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "delaynet/error.hpp"

namespace delaynet {
namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::kInvalidArgument, msg); }

// Walks one mapping, remembering which keys were consumed so that unknown
// keys (usually typos) are reported instead of silently ignored.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) bad(path_ + ": expected a mapping");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) bad(path_ + "." + key + ": unknown key");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap() || !node_[key]) return;
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      bad(path_ + "." + key + ": cannot parse value '" + YAML::Dump(node_[key]) + "'");
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), path_ + "." + key);
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_neuron(Section s, NeuronParams& n) {
  s.get("tau_mem", n.tau_mem);
  s.get("tau_syn", n.tau_syn);
  s.get("v_threshold", n.v_threshold);
  s.get("v_reset", n.v_reset);
}

void read_init(Section s, InitConfig& c) {
  s.get("weight_mean", c.weight_mean);
  s.get("weight_sd", c.weight_sd);
  s.get("delay_low", c.delay_low);
  s.get("delay_high", c.delay_high);
}

void apply_override(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) bad("override '" + spec + "': expected key=value");
  const std::string key = spec.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(spec.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    bad("override '" + spec + "': " + e.what());
  }
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  // Walk with a chain of node copies; yaml-cpp nodes are reference-like.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    }
    if (!next.IsMap()) bad("override '" + spec + "': '" + parts[i] + "' is not a section");
    chain.push_back(next);
  }
  chain.back()[parts.back()] = value;
}

ArchitectureConfig::Type arch_type(const std::string& s) {
  if (s == "feedforward") return ArchitectureConfig::Type::kFeedforward;
  if (s == "recurrent") return ArchitectureConfig::Type::kRecurrent;
  bad("network.type: expected 'feedforward' or 'recurrent', got '" + s + "'");
}

DelayMode delay_mode(const std::string& s) {
  if (s == "rounded") return DelayMode::kRounded;
  if (s == "interpolated") return DelayMode::kInterpolated;
  bad("train.forward_mode: expected 'rounded' or 'interpolated', got '" + s + "'");
}

DataConfig::Source data_source(const std::string& s) {
  if (s == "synthetic") return DataConfig::Source::kSynthetic;
  if (s == "hdf5") return DataConfig::Source::kHdf5;
  bad("data.source: expected 'synthetic' or 'hdf5', got '" + s + "'");
}

RunConfig from_node(const YAML::Node& root) {
  RunConfig cfg;
  Section top(root, "config");
  top.get("seed", cfg.seed);
  bool synthetic_seed_given = false;
  {
    auto net = top.child("network");
    std::string type = "feedforward";
    net.get("type", type);
    cfg.arch.type = arch_type(type);
    net.get("n_inputs", cfg.arch.n_inputs);
    net.get("hidden", cfg.arch.hidden);
    net.get("n_outputs", cfg.arch.n_outputs);
    net.get("dt", cfg.arch.dt);
    net.get("n_timesteps", cfg.arch.n_timesteps);
    net.get("max_delay", cfg.arch.max_delay);
    {
      auto d = net.child("delays");
      d.get("input", cfg.arch.input_delays);
      d.get("recurrent", cfg.arch.recurrent_delays);
      d.get("output", cfg.arch.output_delays);
    }
    read_neuron(net.child("hidden_neuron"), cfg.arch.hidden_neuron);
    read_neuron(net.child("output_neuron"), cfg.arch.output_neuron);
  }
  {
    auto init = top.child("init");
    read_init(init.child("input"), cfg.init.input);
    read_init(init.child("feedforward"), cfg.init.feedforward);
    read_init(init.child("recurrent"), cfg.init.recurrent);
    read_init(init.child("output"), cfg.init.output);
  }
  {
    auto t = top.child("train");
    t.get("epochs", cfg.train.epochs);
    t.get("batch_size", cfg.train.batch_size);
    t.get("lr_weights", cfg.train.optimizer.lr_weights);
    t.get("lr_delays", cfg.train.optimizer.lr_delays);
    t.get("beta1", cfg.train.optimizer.adam.beta1);
    t.get("beta2", cfg.train.optimizer.adam.beta2);
    t.get("epsilon", cfg.train.optimizer.adam.epsilon);
    t.get("grad_clip", cfg.train.optimizer.grad_clip);
    t.get("eval_every", cfg.train.eval_every);
    std::string mode = "rounded";
    t.get("forward_mode", mode);
    cfg.train.forward_mode = delay_mode(mode);
    t.get("threads", cfg.train.threads);
    t.get("deterministic", cfg.train.deterministic);
  }
  {
    auto l = top.child("loss");
    l.get("tau_loss", cfg.train.loss.tau_loss);
    l.get("reg_strength", cfg.train.loss.reg_strength);
    l.get("target_rate", cfg.train.loss.target_rate);
  }
  {
    auto d = top.child("data");
    std::string source = "synthetic";
    d.get("source", source);
    cfg.data.source = data_source(source);
    d.get("train_path", cfg.data.train_path);
    d.get("valid_path", cfg.data.valid_path);
    d.get("test_path", cfg.data.test_path);
    d.get("valid_fraction", cfg.data.valid_fraction);
    d.get("max_duration_ms", cfg.data.max_duration_ms);
    auto s = d.child("synthetic");
    auto& sc = cfg.data.synthetic;
    s.get("n_classes", sc.n_classes);
    s.get("n_channels", sc.n_channels);
    s.get("n_train", sc.n_train);
    s.get("n_valid", sc.n_valid);
    s.get("n_test", sc.n_test);
    s.get("jitter_sd", sc.jitter_sd);
    s.get("spread", sc.spread);
    s.get("onset_jitter", sc.onset_jitter);
    s.get("min_separation", sc.min_separation);
    s.get("start", sc.start);
    s.get("n_groups", sc.n_groups);
    synthetic_seed_given = root["data"] && root["data"]["synthetic"] &&
                           root["data"]["synthetic"]["seed"];
    s.get("seed", sc.seed);
  }
  {
    auto q = top.child("quantize");
    q.get("weight_bits", cfg.fixed.weight_bits);
    q.get("decay_bits", cfg.fixed.decay_bits);
    q.get("threshold_bits", cfg.fixed.threshold_bits);
    q.get("state_bits", cfg.fixed.state_bits);
    q.get("accumulator_bits", cfg.fixed.accumulator_bits);
  }
  cfg.train.seed = cfg.seed;
  if (!synthetic_seed_given) cfg.data.synthetic.seed = cfg.seed;
  return cfg;
}

void emit_neuron(YAML::Emitter& e, const char* name, const NeuronParams& n) {
  e << YAML::Key << name << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tau_mem" << YAML::Value << n.tau_mem;
  e << YAML::Key << "tau_syn" << YAML::Value << n.tau_syn;
  e << YAML::Key << "v_threshold" << YAML::Value << n.v_threshold;
  e << YAML::Key << "v_reset" << YAML::Value << n.v_reset;
  e << YAML::EndMap;
}

void emit_init(YAML::Emitter& e, const char* name, const InitConfig& c) {
  e << YAML::Key << name << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "weight_mean" << YAML::Value << c.weight_mean;
  e << YAML::Key << "weight_sd" << YAML::Value << c.weight_sd;
  e << YAML::Key << "delay_low" << YAML::Value << c.delay_low;
  e << YAML::Key << "delay_high" << YAML::Value << c.delay_high;
  e << YAML::EndMap;
}

}  // namespace

void RunConfig::validate() const {
  if (arch.n_inputs < 1 || arch.n_outputs < 1) bad("network: sizes must be >= 1");
  for (int h : arch.hidden) {
    if (h < 1) bad("network.hidden: layer sizes must be >= 1");
  }
  if (arch.type == ArchitectureConfig::Type::kRecurrent && arch.hidden.empty()) {
    bad("network: a recurrent network needs at least one hidden layer");
  }
  if (!(arch.dt > 0.0)) bad("network.dt must be positive");
  if (arch.n_timesteps < 1) bad("network.n_timesteps must be >= 1");
  if (!(arch.max_delay >= 0.0)) bad("network.max_delay must be non-negative");
  train.validate();
  if (train.threads < 0) bad("train.threads must be >= 0");
  if (!(data.valid_fraction >= 0.0 && data.valid_fraction < 1.0)) {
    bad("data.valid_fraction must lie in [0, 1)");
  }
  if (data.synthetic.n_classes < 2) bad("data.synthetic.n_classes must be >= 2");
  fixed.validate();
}

RunConfig parse_run_config(const std::string& yaml_text, const std::vector<std::string>& overrides,
                           const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    bad(origin + ": " + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) bad(origin + ": top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);
  try {
    RunConfig cfg = from_node(root);
    cfg.validate();
    return cfg;
  } catch (const Error& e) {
    throw Error(e.kind(), origin + ": " + e.what());
  }
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kNotFound, "config not found: " + path);
  }
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), overrides, path);
}

std::string to_yaml(const RunConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;

  const auto& a = cfg.arch;
  e << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "type" << YAML::Value
    << (a.type == ArchitectureConfig::Type::kRecurrent ? "recurrent" : "feedforward");
  e << YAML::Key << "n_inputs" << YAML::Value << a.n_inputs;
  e << YAML::Key << "hidden" << YAML::Value << YAML::Flow << a.hidden;
  e << YAML::Key << "n_outputs" << YAML::Value << a.n_outputs;
  e << YAML::Key << "dt" << YAML::Value << a.dt;
  e << YAML::Key << "n_timesteps" << YAML::Value << a.n_timesteps;
  e << YAML::Key << "max_delay" << YAML::Value << a.max_delay;
  e << YAML::Key << "delays" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "input" << YAML::Value << a.input_delays;
  e << YAML::Key << "recurrent" << YAML::Value << a.recurrent_delays;
  e << YAML::Key << "output" << YAML::Value << a.output_delays;
  e << YAML::EndMap;
  emit_neuron(e, "hidden_neuron", a.hidden_neuron);
  emit_neuron(e, "output_neuron", a.output_neuron);
  e << YAML::EndMap;

  e << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
  emit_init(e, "input", cfg.init.input);
  emit_init(e, "feedforward", cfg.init.feedforward);
  emit_init(e, "recurrent", cfg.init.recurrent);
  emit_init(e, "output", cfg.init.output);
  e << YAML::EndMap;

  const auto& t = cfg.train;
  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "epochs" << YAML::Value << t.epochs;
  e << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
  e << YAML::Key << "lr_weights" << YAML::Value << t.optimizer.lr_weights;
  e << YAML::Key << "lr_delays" << YAML::Value << t.optimizer.lr_delays;
  e << YAML::Key << "beta1" << YAML::Value << t.optimizer.adam.beta1;
  e << YAML::Key << "beta2" << YAML::Value << t.optimizer.adam.beta2;
  e << YAML::Key << "epsilon" << YAML::Value << t.optimizer.adam.epsilon;
  e << YAML::Key << "grad_clip" << YAML::Value << t.optimizer.grad_clip;
  e << YAML::Key << "eval_every" << YAML::Value << t.eval_every;
  e << YAML::Key << "forward_mode" << YAML::Value << to_string(t.forward_mode);
  e << YAML::Key << "threads" << YAML::Value << t.threads;
  e << YAML::Key << "deterministic" << YAML::Value << t.deterministic;
  e << YAML::EndMap;

  e << YAML::Key << "loss" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tau_loss" << YAML::Value << t.loss.tau_loss;
  e << YAML::Key << "reg_strength" << YAML::Value << t.loss.reg_strength;
  e << YAML::Key << "target_rate" << YAML::Value << t.loss.target_rate;
  e << YAML::EndMap;

  const auto& d = cfg.data;
  e << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "source" << YAML::Value
    << (d.source == DataConfig::Source::kHdf5 ? "hdf5" : "synthetic");
  e << YAML::Key << "train_path" << YAML::Value << d.train_path;
  e << YAML::Key << "valid_path" << YAML::Value << d.valid_path;
  e << YAML::Key << "test_path" << YAML::Value << d.test_path;
  e << YAML::Key << "valid_fraction" << YAML::Value << d.valid_fraction;
  e << YAML::Key << "max_duration_ms" << YAML::Value << d.max_duration_ms;
  const auto& s = d.synthetic;
  e << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_classes" << YAML::Value << s.n_classes;
  e << YAML::Key << "n_channels" << YAML::Value << s.n_channels;
  e << YAML::Key << "n_train" << YAML::Value << s.n_train;
  e << YAML::Key << "n_valid" << YAML::Value << s.n_valid;
  e << YAML::Key << "n_test" << YAML::Value << s.n_test;
  e << YAML::Key << "jitter_sd" << YAML::Value << s.jitter_sd;
  e << YAML::Key << "spread" << YAML::Value << s.spread;
  e << YAML::Key << "onset_jitter" << YAML::Value << s.onset_jitter;
  e << YAML::Key << "min_separation" << YAML::Value << s.min_separation;
  e << YAML::Key << "start" << YAML::Value << s.start;
  e << YAML::Key << "n_groups" << YAML::Value << s.n_groups;
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "quantize" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "weight_bits" << YAML::Value << cfg.fixed.weight_bits;
  e << YAML::Key << "decay_bits" << YAML::Value << cfg.fixed.decay_bits;
  e << YAML::Key << "threshold_bits" << YAML::Value << cfg.fixed.threshold_bits;
  e << YAML::Key << "state_bits" << YAML::Value << cfg.fixed.state_bits;
  e << YAML::Key << "accumulator_bits" << YAML::Value << cfg.fixed.accumulator_bits;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::vector<InitConfig> init_configs(const Network& net, const RunConfig& cfg) {
  std::vector<InitConfig> out;
  for (std::size_t j = 0; j < net.n_projections(); ++j) {
    const auto src = net.population(static_cast<std::size_t>(net.source_of(j))).kind;
    const auto tgt = net.population(static_cast<std::size_t>(net.target_of(j))).kind;
    InitConfig c;
    if (tgt == PopulationKind::kOutput) {
      c = cfg.init.output;
    } else if (src == PopulationKind::kInput) {
      c = cfg.init.input;
    } else if (net.projection(j).recurrent()) {
      c = cfg.init.recurrent;
    } else {
      c = cfg.init.feedforward;
    }
    // Frozen delays stay at zero.
    if (!net.projection(j).delays_trainable) c.delay_low = c.delay_high = 0.0;
    c.seed = mix_seed(cfg.seed, j);
    out.push_back(c);
  }
  return out;
}

Network build_initial_network(const RunConfig& cfg) {
  cfg.validate();
  const Network shape = build_network(make_network_spec(cfg.arch));
  return init_parameters(shape, init_configs(shape, cfg));
}

}  // namespace delaynet
