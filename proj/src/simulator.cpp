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

#include "vamo/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace vamo::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix(a ^ splitmix(b)); }
std::uint64_t day_seed(std::uint64_t seed, int day) {
  return mix_seed(seed, 0x6461790000000000ULL + static_cast<std::uint64_t>(day));
}

void EnvConfig::validate() const {
  if (steps_per_day < 1) throw Error("config: steps_per_day must be >= 1");
  if (tasks.empty()) throw Error("config: at least one task required");
  if (fundamental_period < 1 || harmonic_period < 1) throw Error("config: periods must be >= 1");
  if (price_value_corr < -1.0 || price_value_corr > 1.0)
    throw Error("config: price/value correlation must lie in [-1, 1]");
  if (drift < 0.0) throw Error("config: drift magnitude must be >= 0");
  if (discount < 0.0 || discount > 1.0) throw Error("config: discount must lie in [0, 1]");
  for (const auto& t : tasks) {
    if (!(t.budget > 0.0)) throw Error("config: budgets must be positive");
    if (!(t.value_sigma > 0.0) || !(t.price_sigma > 0.0))
      throw Error("config: dispersion must be positive");
    if (!(t.value_mean > 0.0) || !(t.price_ratio > 0.0))
      throw Error("config: value and price levels must be positive");
    if (t.volume_rate < 0.0) throw Error("config: volume rate must be >= 0");
  }
}

std::string EnvConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    feed(buf);
  };
  num(steps_per_day);
  num(fundamental_period);
  num(harmonic_period);
  num(harmonic_amplitude);
  num(price_value_corr);
  num(drift);
  num(volume_jitter);
  num(static_cast<double>(drift_seed));
  num(discount);
  for (const auto& t : tasks) {
    feed(t.name + ";");
    for (double v : {t.value_mean, t.value_sigma, t.budget, t.volume_rate, t.volume_amplitude,
                     t.volume_phase, t.value_amplitude, t.price_ratio, t.price_sigma,
                     t.value_drift, t.price_drift})
      num(v);
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EnvConfig EnvConfig::default_profile() {
  EnvConfig cfg;
  cfg.harmonic_amplitude = 0.15;
  cfg.drift = 0.15;
  cfg.drift_seed = 17;
  TaskProfile store{"store_conversion", 10.0, 0.7, 220.0, 4.0, 0.6, 0.0, 0.25, 0.9, 0.5,
                    1.0, 1.0};
  TaskProfile direct{"direct_conversion", 4.0, 0.5, 300.0, 12.0, 0.5, 4.0, 0.2, 0.85, 0.4,
                     -0.5, 1.0};
  TaskProfile cart{"add_to_cart", 1.0, 0.4, 160.0, 30.0, 0.4, -4.0, 0.15, 0.8, 0.35,
                   0.5, -0.5};
  cfg.tasks = {store, direct, cart};
  return cfg;
}

DayParams day_params(const EnvConfig& cfg, std::size_t task, int day) {
  const auto& p = cfg.tasks.at(task);
  DayParams d;
  const double age = static_cast<double>(day - 1);
  d.value_scale = std::exp(cfg.drift * p.value_drift * age);
  d.price_scale = std::exp(cfg.drift * p.price_drift * age);
  if (cfg.drift > 0.0 && cfg.volume_jitter > 0.0) {
    std::mt19937_64 rng(mix_seed(cfg.drift_seed, mix_seed(task, static_cast<std::uint64_t>(day))));
    std::normal_distribution<double> n(0.0, 1.0);
    d.volume_scale = std::exp(cfg.drift * cfg.volume_jitter * n(rng));
  }
  return d;
}

double expected_volume(const EnvConfig& cfg, std::size_t task, int day, int t) {
  const auto& p = cfg.tasks.at(task);
  const double shape = 1.0 +
                       p.volume_amplitude *
                           std::cos(kTwoPi * (t - p.volume_phase) / cfg.fundamental_period) +
                       cfg.harmonic_amplitude * std::cos(kTwoPi * t / cfg.harmonic_period);
  return p.volume_rate * std::max(shape, 0.0) * day_params(cfg, task, day).volume_scale;
}

double value_curve(const EnvConfig& cfg, std::size_t task, int t) {
  const auto& p = cfg.tasks.at(task);
  return 1.0 + p.value_amplitude *
                   std::cos(kTwoPi * (t - p.volume_phase) / cfg.fundamental_period);
}

bool AuctionDay::operator==(const AuctionDay& o) const {
  if (day != o.day || slots.size() != o.slots.size()) return false;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k].size() != o.slots[k].size()) return false;
    for (std::size_t t = 0; t < slots[k].size(); ++t) {
      const auto& a = slots[k][t];
      const auto& b = o.slots[k][t];
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].value != b[i].value || a[i].price != b[i].price) return false;
    }
  }
  return true;
}

AuctionDay generate_day(const EnvConfig& cfg, int day, std::uint64_t seed) {
  cfg.validate();
  if (day < 1) throw Error("generate_day: day must be >= 1");
  AuctionDay out;
  out.day = day;
  out.slots.resize(cfg.num_tasks());
  const double rho = cfg.price_value_corr;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  for (std::size_t k = 0; k < cfg.num_tasks(); ++k) {
    const auto& p = cfg.tasks[k];
    const DayParams dp = day_params(cfg, k, day);
    std::mt19937_64 rng(mix_seed(seed, k));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto& slots = out.slots[k];
    slots.resize(cfg.steps_per_day);
    for (int t = 0; t < cfg.steps_per_day; ++t) {
      const double rate = expected_volume(cfg, k, day, t);
      int n = 0;
      if (rate > 0.0) n = std::poisson_distribution<int>(rate)(rng);
      const double level = p.value_mean * value_curve(cfg, k, t) * dp.value_scale;
      const double mu_v = std::log(level) - 0.5 * p.value_sigma * p.value_sigma;
      const double mu_p = std::log(level * p.price_ratio * dp.price_scale) -
                          0.5 * p.price_sigma * p.price_sigma;
      auto& opps = slots[t];
      opps.reserve(n);
      for (int i = 0; i < n; ++i) {
        const double zv = normal(rng);
        const double zp = normal(rng);
        opps.push_back({std::exp(mu_v + p.value_sigma * zv),
                        std::exp(mu_p + p.price_sigma * (rho * zv + rho_c * zp))});
      }
    }
  }
  return out;
}

std::array<double, kMarketChannels> market_obs(const EnvConfig& cfg, std::size_t task,
                                               const std::vector<Opportunity>& opps) {
  const auto& p = cfg.tasks.at(task);
  std::array<double, kMarketChannels> obs{};
  obs[0] = p.volume_rate > 0.0 ? static_cast<double>(opps.size()) / p.volume_rate : 0.0;
  if (!opps.empty()) {
    double v = 0.0, pr = 0.0;
    for (const auto& o : opps) {
      v += o.value;
      pr += o.price;
    }
    obs[1] = v / static_cast<double>(opps.size()) / p.value_mean;
    obs[2] = pr / static_cast<double>(opps.size()) / p.value_mean;
  }
  return obs;
}

std::vector<double> market_stream(const EnvConfig& cfg, const AuctionDay& day,
                                  std::size_t task) {
  std::vector<double> out;
  out.reserve(cfg.steps_per_day * kMarketChannels);
  for (int t = 0; t < cfg.steps_per_day; ++t) {
    const auto obs = market_obs(cfg, task, day.at(task, t));
    out.insert(out.end(), obs.begin(), obs.end());
  }
  return out;
}

BidState initial_state(const EnvConfig& cfg, std::size_t task) {
  BidState s;
  s.budget_left = cfg.tasks.at(task).budget;
  return s;
}

std::array<double, kStateFeatures> state_features(const BidState& s, double budget,
                                                  double value_mean, int steps_per_day) {
  const bool finite = std::isfinite(budget);
  return {finite ? s.budget_left / budget : 1.0, s.time_left_frac,
          finite ? s.spend_rate / budget * steps_per_day : 0.0, s.recent_win_rate,
          s.recent_avg_value / value_mean};
}

StepResult step(const EnvConfig& cfg, const BidState& state, double action,
                const std::vector<Opportunity>& opportunities) {
  if (!(action >= 0.0) || !std::isfinite(action)) throw Error("invalid bid scale");
  StepResult r;
  r.next = state;
  BidState& n = r.next;
  double wins = 0.0, vsum = 0.0;
  for (const auto& o : opportunities) {
    vsum += o.value;
    const double bid = action * o.value;
    if (bid > o.price && n.budget_left >= o.price) {
      n.budget_left -= o.price;
      r.cost += o.price;
      r.reward += o.value;
      wins += 1.0;
    }
  }
  for (int i = kRecent - 1; i > 0; --i) n.recent[i] = n.recent[i - 1];
  n.recent[0] = {r.cost, wins, static_cast<double>(opportunities.size()), vsum};
  n.step = state.step + 1;
  n.time_left_frac =
      static_cast<double>(cfg.steps_per_day - n.step) / static_cast<double>(cfg.steps_per_day);
  const int seen = std::min(n.step, kRecent);
  double c = 0.0, w = 0.0, o = 0.0, v = 0.0;
  for (int i = 0; i < seen; ++i) {
    c += n.recent[i][0];
    w += n.recent[i][1];
    o += n.recent[i][2];
    v += n.recent[i][3];
  }
  n.spend_rate = c / seen;
  n.recent_win_rate = o > 0.0 ? w / o : 0.0;
  n.recent_avg_value = o > 0.0 ? v / o : 0.0;
  return r;
}

double Trajectory::total_reward() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.reward;
  return s;
}

double Trajectory::total_cost() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.cost;
  return s;
}

double Trajectory::discounted_return(double discount) const {
  double s = 0.0, f = 1.0;
  for (const auto& st : steps) {
    s += f * st.reward;
    f *= discount;
  }
  return s;
}

Trajectory rollout(const EnvConfig& cfg, const Policy& policy, std::size_t task,
                   const AuctionDay& day) {
  if (!policy) throw Error("rollout: empty policy");
  if (task >= cfg.num_tasks() || task >= day.slots.size())
    throw Error("unknown task " + std::to_string(task));
  Trajectory tr;
  tr.task = task;
  tr.day = day.day;
  tr.steps.reserve(cfg.steps_per_day);
  std::vector<BidState> states;
  states.reserve(cfg.steps_per_day);
  BidState s = initial_state(cfg, task);
  for (int t = 0; t < cfg.steps_per_day; ++t) {
    states.push_back(s);
    const double a = policy(task, states);
    if (!std::isfinite(a)) throw Error("policy produced non-finite action");
    StepResult r = step(cfg, s, a, day.at(task, t));
    tr.steps.push_back({s, a, r.reward, r.cost});
    s = r.next;
  }
  return tr;
}

Trajectory rollout(const EnvConfig& cfg, const Policy& policy, std::size_t task, int day,
                   std::uint64_t seed) {
  return rollout(cfg, policy, task, generate_day(cfg, day, seed));
}

Policy behavior_policy(const EnvConfig& cfg, const BehaviorSpec& spec, std::uint64_t seed) {
  struct State {
    std::mt19937_64 rng;
    double episode = 1.0;
  };
  auto st = std::make_shared<State>(State{std::mt19937_64(seed), 1.0});
  const int horizon = cfg.steps_per_day;
  std::vector<double> budgets;
  for (const auto& t : cfg.tasks) budgets.push_back(t.budget);
  return [st, spec, horizon, budgets](std::size_t task, std::span<const BidState> states) {
    std::normal_distribution<double> n(0.0, 1.0);
    const BidState& s = states.back();
    if (states.size() == 1) st->episode = std::exp(spec.episode_sigma * n(st->rng));
    const double base = task < spec.base_scale.size() ? spec.base_scale[task] : 1.0;
    const double budget = budgets[task];
    const double planned = static_cast<double>(s.step) / horizon;
    const double spent = std::isfinite(budget) ? 1.0 - s.budget_left / budget : 0.0;
    const double noise = std::exp(spec.step_sigma * n(st->rng));
    return base * std::exp(spec.pacing_gain * (planned - spent)) * st->episode * noise;
  };
}

Corpus generate_dataset(const EnvConfig& cfg, int days, const std::vector<std::size_t>& counts,
                        const BehaviorSpec& behavior, std::uint64_t seed) {
  cfg.validate();
  if (days < 1) throw Error("generate_dataset: days must be >= 1");
  if (counts.size() != cfg.num_tasks())
    throw Error("generate_dataset: one count per task required");
  for (auto c : counts)
    if (c < 1) throw Error("generate_dataset: counts must be >= 1");

  Corpus corpus;
  corpus.env = cfg;
  corpus.days = days;
  corpus.seed = seed;
  corpus.counts = counts;
  corpus.market.resize(days);

  for (int d = 1; d <= days; ++d) {
    const AuctionDay day = generate_day(cfg, d, day_seed(seed, d));
    for (std::size_t k = 0; k < cfg.num_tasks(); ++k)
      corpus.market[d - 1].push_back(market_stream(cfg, day, k));
    for (std::size_t k = 0; k < cfg.num_tasks(); ++k) {
      const std::size_t base = counts[k] / days;
      const std::size_t extra = counts[k] % days;
      const std::size_t n = base + (static_cast<std::size_t>(days - d) < extra ? 1 : 0);
      for (std::size_t j = 0; j < n; ++j) {
        const auto pseed = mix_seed(mix_seed(seed, k + 1), mix_seed(d, j + 1));
        corpus.trajectories.push_back(
            rollout(cfg, behavior_policy(cfg, behavior, pseed), k, day));
      }
    }
  }

  const int last_train = days - 2;
  corpus.reference_return.assign(cfg.num_tasks(), 0.0);
  for (std::size_t k = 0; k < cfg.num_tasks(); ++k) {
    double sum = 0.0, all = 0.0;
    std::size_t n = 0, n_all = 0;
    for (const auto& tr : corpus.trajectories) {
      if (tr.task != k) continue;
      all += tr.total_reward();
      ++n_all;
      if (tr.day <= last_train) {
        sum += tr.total_reward();
        ++n;
      }
    }
    double ref = n > 0 ? sum / n : (n_all > 0 ? all / n_all : 0.0);
    corpus.reference_return[k] = ref > 0.0 ? ref : 1.0;
  }
  for (auto& tr : corpus.trajectories)
    tr.quality = tr.total_reward() / corpus.reference_return[tr.task];
  return corpus;
}

// ---------------------------------------------------------------------------
// Files

void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs) {
  os << kTrajectoryHeader << '\n'
     << "traj,day,task,t,budget_left,time_left_frac,spend_rate,win_rate,avg_value,action,"
        "reward,cost,quality\n";
  char buf[512];
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& tr = trajs[i];
    for (std::size_t t = 0; t < tr.steps.size(); ++t) {
      const auto& s = tr.steps[t];
      std::snprintf(buf, sizeof buf,
                    "%zu,%d,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                    tr.day, tr.task, t, s.state.budget_left, s.state.time_left_frac,
                    s.state.spend_rate, s.state.recent_win_rate, s.state.recent_avg_value,
                    s.action, s.reward, s.cost, tr.quality);
      os << buf;
    }
  }
}

std::vector<Trajectory> read_trajectories(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryHeader)
    throw Error("trajectory file: missing or unsupported schema header");
  if (!std::getline(is, line)) throw Error("trajectory file: missing column header");
  std::vector<Trajectory> out;
  long prev = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> f;
    while (std::getline(ss, tok, ',')) f.push_back(std::strtod(tok.c_str(), nullptr));
    if (f.size() != 13) throw Error("trajectory file: expected 13 fields, got " +
                                    std::to_string(f.size()));
    const long id = static_cast<long>(f[0]);
    if (id != prev) {
      out.emplace_back();
      out.back().day = static_cast<int>(f[1]);
      out.back().task = static_cast<std::size_t>(f[2]);
      out.back().quality = f[12];
      prev = id;
    }
    StepRecord r;
    r.state.step = static_cast<int>(f[3]);
    r.state.budget_left = f[4];
    r.state.time_left_frac = f[5];
    r.state.spend_rate = f[6];
    r.state.recent_win_rate = f[7];
    r.state.recent_avg_value = f[8];
    r.action = f[9];
    r.reward = f[10];
    r.cost = f[11];
    out.back().steps.push_back(r);
  }
  return out;
}

void write_market(std::ostream& os, const Corpus& corpus) {
  os << kMarketHeader << '\n' << "day,task,t,count,mean_value,mean_price\n";
  char buf[256];
  for (std::size_t d = 0; d < corpus.market.size(); ++d)
    for (std::size_t k = 0; k < corpus.market[d].size(); ++k) {
      const auto& m = corpus.market[d][k];
      for (std::size_t t = 0; t * kMarketChannels < m.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g,%.17g\n", d + 1, k, t,
                      m[t * kMarketChannels], m[t * kMarketChannels + 1],
                      m[t * kMarketChannels + 2]);
        os << buf;
      }
    }
}

namespace {

nlohmann::ordered_json env_to_json(const EnvConfig& c) {
  nlohmann::ordered_json j;
  j["steps_per_day"] = c.steps_per_day;
  j["fundamental_period"] = c.fundamental_period;
  j["harmonic_period"] = c.harmonic_period;
  j["harmonic_amplitude"] = c.harmonic_amplitude;
  j["price_value_corr"] = c.price_value_corr;
  j["drift"] = c.drift;
  j["volume_jitter"] = c.volume_jitter;
  j["drift_seed"] = c.drift_seed;
  j["discount"] = c.discount;
  for (const auto& t : c.tasks) {
    j["tasks"].push_back({{"name", t.name},
                          {"value_mean", t.value_mean},
                          {"value_sigma", t.value_sigma},
                          {"budget", t.budget},
                          {"volume_rate", t.volume_rate},
                          {"volume_amplitude", t.volume_amplitude},
                          {"volume_phase", t.volume_phase},
                          {"value_amplitude", t.value_amplitude},
                          {"price_ratio", t.price_ratio},
                          {"price_sigma", t.price_sigma},
                          {"value_drift", t.value_drift},
                          {"price_drift", t.price_drift}});
  }
  return j;
}

EnvConfig env_from_json(const nlohmann::json& j) {
  EnvConfig c;
  c.steps_per_day = j.at("steps_per_day");
  c.fundamental_period = j.at("fundamental_period");
  c.harmonic_period = j.at("harmonic_period");
  c.harmonic_amplitude = j.at("harmonic_amplitude");
  c.price_value_corr = j.at("price_value_corr");
  c.drift = j.at("drift");
  c.volume_jitter = j.at("volume_jitter");
  c.drift_seed = j.at("drift_seed");
  c.discount = j.at("discount");
  for (const auto& t : j.at("tasks")) {
    TaskProfile p;
    p.name = t.at("name");
    p.value_mean = t.at("value_mean");
    p.value_sigma = t.at("value_sigma");
    p.budget = t.at("budget");
    p.volume_rate = t.at("volume_rate");
    p.volume_amplitude = t.at("volume_amplitude");
    p.volume_phase = t.at("volume_phase");
    p.value_amplitude = t.at("value_amplitude");
    p.price_ratio = t.at("price_ratio");
    p.price_sigma = t.at("price_sigma");
    p.value_drift = t.at("value_drift");
    p.price_drift = t.at("price_drift");
    c.tasks.push_back(p);
  }
  return c;
}

}  // namespace

void save_corpus(const std::string& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir + "/trajectories.csv");
    if (!os) throw Error("cannot write " + dir + "/trajectories.csv");
    write_trajectories(os, corpus.trajectories);
  }
  {
    std::ofstream os(dir + "/market.csv");
    if (!os) throw Error("cannot write " + dir + "/market.csv");
    write_market(os, corpus);
  }
  nlohmann::ordered_json m;
  m["schema"] = "vamo-dataset v1";
  m["config_hash"] = corpus.env.hash();
  m["seed"] = corpus.seed;
  m["days"] = corpus.days;
  m["counts"] = corpus.counts;
  m["reference_return"] = corpus.reference_return;
  m["trajectories"] = corpus.trajectories.size();
  m["env"] = env_to_json(corpus.env);
  std::ofstream os(dir + "/manifest.json");
  if (!os) throw Error("cannot write " + dir + "/manifest.json");
  os << m.dump(2) << '\n';
}

Corpus load_corpus(const std::string& dir) {
  Corpus c;
  nlohmann::json m;
  {
    std::ifstream is(dir + "/manifest.json");
    if (!is) throw Error("cannot open " + dir + "/manifest.json");
    is >> m;
  }
  c.env = env_from_json(m.at("env"));
  if (c.env.hash() != m.at("config_hash").get<std::string>())
    throw Error("manifest: config hash does not match the embedded config");
  c.seed = m.at("seed");
  c.days = m.at("days");
  c.counts = m.at("counts").get<std::vector<std::size_t>>();
  c.reference_return = m.at("reference_return").get<std::vector<double>>();
  {
    std::ifstream is(dir + "/trajectories.csv");
    if (!is) throw Error("cannot open " + dir + "/trajectories.csv");
    c.trajectories = read_trajectories(is);
  }
  std::ifstream is(dir + "/market.csv");
  if (!is) throw Error("cannot open " + dir + "/market.csv");
  std::string line;
  if (!std::getline(is, line) || line != kMarketHeader)
    throw Error("market file: missing or unsupported schema header");
  std::getline(is, line);
  c.market.assign(c.days, std::vector<std::vector<double>>(c.env.num_tasks()));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> f;
    while (std::getline(ss, tok, ',')) f.push_back(std::strtod(tok.c_str(), nullptr));
    if (f.size() != 6) throw Error("market file: expected 6 fields");
    auto& stream = c.market.at(static_cast<std::size_t>(f[0]) - 1).at(static_cast<std::size_t>(f[1]));
    stream.insert(stream.end(), {f[3], f[4], f[5]});
  }
  return c;
}

}  // namespace vamo::sim
