// Copyright 2026 The vamo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vamo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace vamo {

namespace pt = boost::property_tree;

namespace {

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (is.fail() || !(is >> std::ws).eof())
    throw Error("config: bad value '" + text + "' for " + key);
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text,
                          bool allow_empty = false) {
  std::vector<T> out;
  if (allow_empty && text.find_first_not_of(" \t") == std::string::npos) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_value<T>(key, item));
  if (out.empty()) throw Error("config: empty list for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "on") return true;
  if (text == "0" || text == "false" || text == "off") return false;
  throw Error("config: bad boolean '" + text + "' for " + key);
}

// Reads a section while checking for unknown keys.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  template <class T>
  void get(const std::string& key, T& out) {
    if (auto v = raw(key)) out = parse_value<T>(name_ + "." + key, *v);
  }
  template <class T>
  void list(const std::string& key, std::vector<T>& out, bool allow_empty = false) {
    if (auto v = raw(key)) out = parse_list<T>(name_ + "." + key, *v, allow_empty);
  }
  void flag(const std::string& key, bool& out) {
    if (auto v = raw(key)) out = parse_bool(name_ + "." + key, *v);
  }
  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }
  bool has(const std::string& key) const {
    return tree_ && tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
  }
  void finish() const {
    if (!tree_) return;
    for (const auto& [k, _] : *tree_)
      if (!seen_.count(k)) throw Error("config: unknown key " + name_ + "." + k);
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> seen_;
};

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  auto c = root.get_child_optional(pt::ptree::path_type(name, '\0'));
  return c ? &*c : nullptr;
}

void read_task(Section& s, sim::TaskProfile& t) {
  s.get("name", t.name);
  s.get("value_mean", t.value_mean);
  s.get("value_sigma", t.value_sigma);
  s.get("budget", t.budget);
  s.get("volume_rate", t.volume_rate);
  s.get("volume_amplitude", t.volume_amplitude);
  s.get("volume_phase", t.volume_phase);
  s.get("value_amplitude", t.value_amplitude);
  s.get("price_ratio", t.price_ratio);
  s.get("price_sigma", t.price_sigma);
  s.get("value_drift", t.value_drift);
  s.get("price_drift", t.price_drift);
}

}  // namespace

eval::BenchConfig parse_config(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  std::set<std::string> known{"env", "data", "behavior", "features", "model", "train", "bench"};
  eval::BenchConfig c;

  Section env(child(root, "env"), "env");
  env.get("steps_per_day", c.env.steps_per_day);
  env.get("fundamental_period", c.env.fundamental_period);
  env.get("harmonic_period", c.env.harmonic_period);
  env.get("harmonic_amplitude", c.env.harmonic_amplitude);
  env.get("price_value_corr", c.env.price_value_corr);
  env.get("drift", c.env.drift);
  env.get("volume_jitter", c.env.volume_jitter);
  env.get("drift_seed", c.env.drift_seed);
  env.get("discount", c.env.discount);
  std::size_t ntasks = c.env.tasks.size();
  env.get("tasks", ntasks);
  env.finish();
  if (ntasks != c.env.tasks.size()) c.env.tasks.assign(ntasks, sim::TaskProfile{});
  for (std::size_t k = 0; k < ntasks; ++k) {
    const std::string name = "task." + std::to_string(k);
    known.insert(name);
    Section t(child(root, name), name);
    read_task(t, c.env.tasks[k]);
    t.finish();
    if (c.env.tasks[k].name.empty()) c.env.tasks[k].name = "task" + std::to_string(k);
  }

  Section data(child(root, "data"), "data");
  data.get("days", c.days);
  data.list("counts", c.counts);
  data.get("seed", c.data_seed);
  data.finish();

  Section beh(child(root, "behavior"), "behavior");
  beh.list("base_scale", c.behavior.base_scale);
  beh.get("pacing_gain", c.behavior.pacing_gain);
  beh.get("episode_sigma", c.behavior.episode_sigma);
  beh.get("step_sigma", c.behavior.step_sigma);
  beh.finish();

  Section feat(child(root, "features"), "features");
  feat.get("window", c.features.window);
  feat.get("history", c.features.history);
  feat.get("k_top", c.features.k_top);
  feat.finish();

  Section model(child(root, "model"), "model");
  model.list("encoder_widths", c.encoder_widths, true);
  model.list("head_widths", c.head_widths, true);
  if (auto a = model.raw("activation")) c.activation = parse_activation(*a);
  model.flag("use_temporal", c.use_temporal);
  model.finish();

  Section tr(child(root, "train"), "train");
  tr.get("iterations", c.train.iterations);
  tr.get("eta", c.train.eta);
  if (auto s = tr.raw("schedule")) {
    if (*s == "constant") c.train.schedule = Schedule::kConstant;
    else if (*s == "robbins_monro") c.train.schedule = Schedule::kRobbinsMonro;
    else throw Error("config: unknown schedule '" + *s + "'");
  }
  const bool has_lambda = tr.has("lambda");
  tr.get("lambda", c.train.lambda);
  if (auto s = tr.raw("strategy")) {
    c.train.strategy = parse_strategy(*s);
    if (has_lambda && c.train.strategy != Strategy::kVamo &&
        c.train.strategy != Strategy::kVamoNoVal)
      throw Error("config: lambda applies only to vamo strategies, not '" + *s + "'");
  }
  tr.get("batch_size", c.train.batch_size);
  tr.get("seed", c.train.seed);
  tr.get("ema_beta", c.train.ema_beta);
  tr.get("momentum", c.train.momentum);
  tr.get("dwa_temperature", c.train.dwa_temperature);
  tr.get("dwa_period", c.train.dwa_period);
  tr.get("diag_every", c.train.diag_every);
  tr.get("checkpoint_every", c.train.checkpoint_every);
  tr.get("checkpoint_dir", c.train.checkpoint_dir);
  tr.finish();

  Section bench(child(root, "bench"), "bench");
  if (auto s = bench.raw("strategies")) {
    c.strategies.clear();
    for (const auto& n : parse_list<std::string>("bench.strategies", *s))
      c.strategies.push_back(parse_strategy(n));
  }
  bench.list("lambdas", c.lambdas);
  bench.list("seeds", c.seeds);
  bench.flag("temporal_ablation", c.temporal_ablation);
  bench.get("eval_episodes", c.eval_episodes);
  bench.finish();

  for (const auto& [name, _] : root)
    if (!known.count(name)) throw Error("config: unknown section [" + name + "]");
  c.validate();
  return c;
}

eval::BenchConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io: cannot read " + path);
  return parse_config(f);
}

namespace {

std::string g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) os << g17(v[i]);
    else os << v[i];
  }
  return os.str();
}

}  // namespace

void write_config(std::ostream& os, const eval::BenchConfig& c) {
  os << "[env]\n"
     << "steps_per_day = " << c.env.steps_per_day << '\n'
     << "fundamental_period = " << c.env.fundamental_period << '\n'
     << "harmonic_period = " << c.env.harmonic_period << '\n'
     << "harmonic_amplitude = " << g17(c.env.harmonic_amplitude) << '\n'
     << "price_value_corr = " << g17(c.env.price_value_corr) << '\n'
     << "drift = " << g17(c.env.drift) << '\n'
     << "volume_jitter = " << g17(c.env.volume_jitter) << '\n'
     << "drift_seed = " << c.env.drift_seed << '\n'
     << "discount = " << g17(c.env.discount) << '\n'
     << "tasks = " << c.env.tasks.size() << '\n';
  for (std::size_t k = 0; k < c.env.tasks.size(); ++k) {
    const auto& t = c.env.tasks[k];
    os << "\n[task." << k << "]\n"
       << "name = " << t.name << '\n'
       << "value_mean = " << g17(t.value_mean) << '\n'
       << "value_sigma = " << g17(t.value_sigma) << '\n'
       << "budget = " << g17(t.budget) << '\n'
       << "volume_rate = " << g17(t.volume_rate) << '\n'
       << "volume_amplitude = " << g17(t.volume_amplitude) << '\n'
       << "volume_phase = " << g17(t.volume_phase) << '\n'
       << "value_amplitude = " << g17(t.value_amplitude) << '\n'
       << "price_ratio = " << g17(t.price_ratio) << '\n'
       << "price_sigma = " << g17(t.price_sigma) << '\n'
       << "value_drift = " << g17(t.value_drift) << '\n'
       << "price_drift = " << g17(t.price_drift) << '\n';
  }
  os << "\n[data]\ndays = " << c.days << "\ncounts = " << join(c.counts)
     << "\nseed = " << c.data_seed << '\n';
  os << "\n[behavior]\n";
  if (!c.behavior.base_scale.empty()) os << "base_scale = " << join(c.behavior.base_scale) << '\n';
  os << "pacing_gain = " << g17(c.behavior.pacing_gain) << '\n'
     << "episode_sigma = " << g17(c.behavior.episode_sigma) << '\n'
     << "step_sigma = " << g17(c.behavior.step_sigma) << '\n';
  os << "\n[features]\nwindow = " << c.features.window << "\nhistory = " << c.features.history
     << "\nk_top = " << c.features.k_top << '\n';
  os << "\n[model]\nencoder_widths = " << join(c.encoder_widths)
     << "\nhead_widths = " << join(c.head_widths) << "\nactivation = " << to_string(c.activation)
     << "\nuse_temporal = " << (c.use_temporal ? "true" : "false") << '\n';
  const auto& t = c.train;
  os << "\n[train]\niterations = " << t.iterations << "\neta = " << g17(t.eta)
     << "\nschedule = " << (t.schedule == Schedule::kConstant ? "constant" : "robbins_monro")
     << "\nstrategy = " << to_string(t.strategy);
  if (t.strategy == Strategy::kVamo || t.strategy == Strategy::kVamoNoVal)
    os << "\nlambda = " << g17(t.lambda);
  os << "\nbatch_size = " << t.batch_size << "\nseed = " << t.seed
     << "\nema_beta = " << g17(t.ema_beta) << "\nmomentum = " << g17(t.momentum)
     << "\ndwa_temperature = " << g17(t.dwa_temperature) << "\ndwa_period = " << t.dwa_period
     << "\ndiag_every = " << t.diag_every << "\ncheckpoint_every = " << t.checkpoint_every
     << '\n';
  if (!t.checkpoint_dir.empty()) os << "checkpoint_dir = " << t.checkpoint_dir << '\n';
  std::vector<std::string> names;
  for (auto s : c.strategies) names.push_back(to_string(s));
  os << "\n[bench]\nstrategies = " << join(names) << "\nlambdas = " << join(c.lambdas)
     << "\nseeds = " << join(c.seeds)
     << "\ntemporal_ablation = " << (c.temporal_ablation ? "true" : "false")
     << "\neval_episodes = " << c.eval_episodes << '\n';
}

}  // namespace vamo
