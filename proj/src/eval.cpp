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

#include "vamo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "vamo/common.hpp"

namespace vamo::eval {

namespace fs = std::filesystem;

double delta_m(std::span<const double> stl, std::span<const double> method) {
  if (stl.size() != method.size() || stl.empty())
    throw Error("shape: delta_m needs one metric per task for both methods");
  double sum = 0.0;
  for (std::size_t k = 0; k < stl.size(); ++k) {
    if (stl[k] == 0.0) throw Error("undefined relative drop");
    sum += -(method[k] - stl[k]) / stl[k];
  }
  return sum / static_cast<double>(stl.size()) * 100.0;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

TaskMetrics summarize(std::size_t task, std::vector<double> returns, std::vector<double> costs) {
  if (returns.empty() || returns.size() != costs.size())
    throw Error("summarize: need matching, non-empty returns and costs");
  TaskMetrics m;
  m.task = task;
  m.runs = returns.size();
  m.mean_return = mean_of(returns);
  m.std_return = std_of(returns, m.mean_return);
  m.mean_cost = mean_of(costs);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.roi = m.mean_cost > 0.0 ? m.mean_return / m.mean_cost : nan;
  m.cost_per_unit = m.mean_return > 0.0 ? m.mean_cost / m.mean_return : nan;
  m.returns = std::move(returns);
  m.costs = std::move(costs);
  return m;
}

std::uint64_t eval_day_seed(std::uint64_t seed, int day) {
  return sim::day_seed(sim::mix_seed(seed, 0x7e57da7aULL), day);
}

TaskMetrics evaluate_policy(const sim::EnvConfig& env, const PolicyFactory& factory,
                            std::size_t task, int day, std::span<const std::uint64_t> seeds) {
  if (task >= env.num_tasks()) throw Error("unknown task " + std::to_string(task));
  if (seeds.empty()) throw Error("evaluate_policy: at least one seed required");
  std::vector<double> returns, costs;
  for (auto s : seeds) {
    const auto d = sim::generate_day(env, day, eval_day_seed(s, day));
    const auto tr = sim::rollout(env, factory(d), task, d);
    returns.push_back(tr.total_reward());
    costs.push_back(tr.total_cost());
  }
  return summarize(task, std::move(returns), std::move(costs));
}

sim::Policy model_policy(const SharedBottomModel& model, const sim::EnvConfig& env,
                         const data::FeatureOptions& opts, std::span<const double> prev_day,
                         const sim::AuctionDay& day, std::size_t task, double quality) {
  if (task >= env.num_tasks() || task >= model.config().num_tasks)
    throw Error("unknown task " + std::to_string(task));
  auto periodic = std::make_shared<const std::vector<double>>(
      data::periodic_rows(prev_day, sim::market_stream(env, day, task), opts));
  const auto& prof = env.tasks[task];
  const double budget = prof.budget, value_mean = prof.value_mean;
  const int steps = env.steps_per_day;
  return [&model, periodic, opts, budget, value_mean, steps, quality](
             std::size_t k, std::span<const sim::BidState> states) {
    std::vector<std::array<double, sim::kStateFeatures>> rows;
    rows.reserve(states.size());
    for (const auto& s : states) rows.push_back(sim::state_features(s, budget, value_mean, steps));
    const auto w = data::build_window(rows, *periodic, states.size() - 1, opts);
    return std::max(0.0, model.forward(k, w, quality));
  };
}

TaskMetrics evaluate_model(const SharedBottomModel& model, const sim::Corpus& corpus,
                           const data::FeatureOptions& opts, std::size_t task, double quality,
                           std::span<const std::uint64_t> seeds) {
  if (corpus.days < 2) throw Error("evaluate_model: corpus needs a day before the test day");
  if (task >= corpus.env.num_tasks()) throw Error("unknown task " + std::to_string(task));
  const auto& prev = corpus.market[corpus.days - 2][task];
  const PolicyFactory factory = [&](const sim::AuctionDay& d) {
    return model_policy(model, corpus.env, opts, prev, d, task, quality);
  };
  return evaluate_policy(corpus.env, factory, task, corpus.days, seeds);
}

// ---------------------------------------------------------------------------
// Benchmark

void BenchConfig::validate() const {
  env.validate();
  if (days < 3) throw Error("config: benchmark needs at least 3 days");
  if (counts.size() != env.num_tasks()) throw Error("config: one count per task required");
  if (strategies.empty()) throw Error("config: at least one strategy required");
  if (seeds.empty()) throw Error("config: at least one seed required");
  if (eval_episodes < 1) throw Error("config: eval_episodes must be >= 1");
  for (auto s : strategies)
    if (s == Strategy::kStl) throw Error("config: stl is the built-in baseline, not a strategy");
  if (std::find(strategies.begin(), strategies.end(), Strategy::kVamo) != strategies.end() &&
      lambdas.empty())
    throw Error("config: vamo needs at least one lambda");
  train.validate(env.num_tasks());
  model_config(use_temporal).validate();
}

std::vector<Variant> BenchConfig::variants() const {
  std::vector<Variant> out;
  for (auto s : strategies) {
    if (s == Strategy::kVamo) {
      for (double l : lambdas) out.push_back({"vamo@" + short_num(l), s, l, use_temporal});
    } else {
      out.push_back({to_string(s), s, train.lambda, use_temporal});
    }
  }
  if (temporal_ablation)
    out.push_back({"vamo_notemporal", Strategy::kVamo, train.lambda, false});
  return out;
}

ModelConfig BenchConfig::model_config(bool temporal) const {
  ModelConfig c = features.model_shape(env.num_tasks());
  c.encoder_widths = encoder_widths;
  c.head_widths = head_widths;
  c.activation = activation;
  c.use_temporal = temporal;
  return c;
}

const VariantResult& BenchmarkResult::find(const std::string& label) const {
  for (const auto& v : variants)
    if (v.variant.label == label) return v;
  throw Error("benchmark: no variant '" + label + "'");
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io: cannot write " + path.string());
  f << text;
}

std::vector<double> mean_returns(const std::vector<TaskMetrics>& m) {
  std::vector<double> out;
  for (const auto& t : m) out.push_back(t.mean_return);
  return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchConfig& cfg, const std::string& output_dir) {
  cfg.validate();
  if (!output_dir.empty()) {
    if (fs::exists(output_dir) && !fs::is_empty(output_dir))
      throw Error("output path exists and is not empty: " + output_dir);
    fs::create_directories(fs::path(output_dir) / "traces");
  }
  const std::size_t k = cfg.env.num_tasks();
  BenchmarkResult res;
  res.seeds = cfg.seeds;
  for (const auto& t : cfg.env.tasks) res.task_names.push_back(t.name);
  for (const auto& v : cfg.variants()) res.variants.push_back({v, {}, {}, 0.0, 0.0});

  for (auto seed : cfg.seeds) {
    const auto corpus =
        sim::generate_dataset(cfg.env, cfg.days, cfg.counts, cfg.behavior,
                              sim::mix_seed(cfg.data_seed, seed));
    const data::BatchSampler sampler(
        corpus, data::temporal_split(corpus.trajectories, k, cfg.days - 1, cfg.days),
        cfg.features);
    std::vector<double> quality;
    for (std::size_t t = 0; t < k; ++t) quality.push_back(sampler.max_train_quality(t));
    std::vector<std::uint64_t> eval_seeds;
    for (std::size_t e = 0; e < cfg.eval_episodes; ++e)
      eval_seeds.push_back(sim::mix_seed(seed, 100 + e));

    TrainConfig tc = cfg.train;
    tc.seed = sim::mix_seed(seed, 2);

    // Single-task baseline.
    {
      const SharedBottomModel init(cfg.model_config(cfg.use_temporal), sim::mix_seed(seed, 1));
      tc.strategy = Strategy::kStl;
      const auto tr = train(init, sampler, tc);
      std::vector<TaskMetrics> m;
      for (std::size_t t = 0; t < k; ++t) {
        SharedBottomModel model = init;
        model.set_params(tr.params[t]);
        m.push_back(evaluate_model(model, corpus, cfg.features, t, quality[t], eval_seeds));
      }
      res.stl.push_back(std::move(m));
    }
    const auto stl_returns = mean_returns(res.stl.back());

    for (auto& vr : res.variants) {
      const auto& v = vr.variant;
      const SharedBottomModel init(cfg.model_config(v.use_temporal), sim::mix_seed(seed, 1));
      tc.strategy = v.strategy;
      tc.lambda = v.lambda;
      std::ostringstream trace;
      const auto tr = train(init, sampler, tc, &trace);
      SharedBottomModel model = init;
      model.set_params(tr.params.front());
      std::vector<TaskMetrics> m;
      for (std::size_t t = 0; t < k; ++t)
        m.push_back(evaluate_model(model, corpus, cfg.features, t, quality[t], eval_seeds));
      vr.delta_m.push_back(delta_m(stl_returns, mean_returns(m)));
      vr.per_seed.push_back(std::move(m));
      if (!output_dir.empty())
        write_file(fs::path(output_dir) / "traces" /
                       (v.label + "_seed" + std::to_string(seed) + ".jsonl"),
                   trace.str());
    }
  }
  for (auto& vr : res.variants) {
    vr.delta_m_mean = mean_of(vr.delta_m);
    vr.delta_m_std = std_of(vr.delta_m, vr.delta_m_mean);
  }

  if (!output_dir.empty()) {
    std::ostringstream runs, summary, deltas;
    write_runs(runs, res);
    write_summary(summary, res);
    write_deltas(deltas, res);
    write_file(fs::path(output_dir) / "runs.csv", runs.str());
    write_file(fs::path(output_dir) / "summary.csv", summary.str());
    write_file(fs::path(output_dir) / "deltas.csv", deltas.str());
  }
  return res;
}

void write_runs(std::ostream& os, const BenchmarkResult& r) {
  os << "label,strategy,lambda,temporal,seed,task,mean_return,mean_cost,roi,cost_per_unit\n";
  auto emit = [&](const std::string& label, const std::string& strategy, double lambda,
                  bool temporal, const std::vector<std::vector<TaskMetrics>>& per_seed) {
    for (std::size_t s = 0; s < per_seed.size(); ++s)
      for (const auto& m : per_seed[s])
        os << label << ',' << strategy << ',' << num(lambda) << ',' << (temporal ? 1 : 0) << ','
           << r.seeds[s] << ',' << r.task_names.at(m.task) << ',' << num(m.mean_return) << ','
           << num(m.mean_cost) << ',' << num(m.roi) << ',' << num(m.cost_per_unit) << '\n';
  };
  emit("stl", "stl", std::numeric_limits<double>::quiet_NaN(), true, r.stl);
  for (const auto& v : r.variants)
    emit(v.variant.label, to_string(v.variant.strategy), v.variant.lambda, v.variant.use_temporal,
         v.per_seed);
}

void write_summary(std::ostream& os, const BenchmarkResult& r) {
  os << "label,strategy,lambda,temporal,delta_m_mean,delta_m_std";
  for (const auto& n : r.task_names)
    os << ',' << n << "_return_mean," << n << "_return_std," << n << "_roi_mean";
  os << '\n';
  auto task_cols = [&](const std::vector<std::vector<TaskMetrics>>& per_seed) {
    for (std::size_t t = 0; t < r.task_names.size(); ++t) {
      std::vector<double> ret, roi;
      for (const auto& seed : per_seed) {
        ret.push_back(seed[t].mean_return);
        roi.push_back(seed[t].roi);
      }
      const double m = mean_of(ret);
      os << ',' << num(m) << ',' << num(std_of(ret, m)) << ',' << num(mean_of(roi));
    }
    os << '\n';
  };
  os << "stl,stl,nan,1,0,0";
  task_cols(r.stl);
  for (const auto& v : r.variants) {
    os << v.variant.label << ',' << to_string(v.variant.strategy) << ',' << num(v.variant.lambda)
       << ',' << (v.variant.use_temporal ? 1 : 0) << ',' << num(v.delta_m_mean) << ','
       << num(v.delta_m_std);
    task_cols(v.per_seed);
  }
}

void write_deltas(std::ostream& os, const BenchmarkResult& r) {
  os << "label,seed,delta_m\n";
  for (const auto& v : r.variants)
    for (std::size_t s = 0; s < v.delta_m.size(); ++s)
      os << v.variant.label << ',' << r.seeds[s] << ',' << num(v.delta_m[s]) << '\n';
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("io: cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw Error("io: empty table " + path.string());
  return rows;
}

}  // namespace

void write_report(const std::string& result_dir, std::ostream& table) {
  const fs::path dir(result_dir);
  const auto summary = read_csv(dir / "summary.csv");
  const auto& header = summary.front();
  std::ostringstream out, bars, sweep;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %12s %10s", "method", "dm%_mean", "dm%_std");
  out << line;
  for (std::size_t c = 6; c < header.size(); c += 3)
    out << ' ' << std::string(14 - std::min<std::size_t>(14, header[c].size() - 12), ' ')
        << header[c].substr(0, header[c].size() - 12);
  out << '\n';
  std::map<double, double> lambda_points;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto& row = summary[i];
    if (row.size() != header.size()) throw Error("report: malformed summary row");
    const double dm = std::stod(row[4]), sd = std::stod(row[5]);
    std::snprintf(line, sizeof line, "%-20s %12.2f %10.2f", row[0].c_str(), dm, sd);
    out << line;
    for (std::size_t c = 6; c < row.size(); c += 3) {
      std::snprintf(line, sizeof line, " %14.2f", std::stod(row[c]));
      out << line;
    }
    out << '\n';
    if (row[0] != "stl") bars << i << ' ' << row[4] << '\n';
    if (row[1] == "vamo" && row[3] == "1") lambda_points[std::stod(row[2])] = dm;
  }
  for (const auto& [l, dm] : lambda_points) sweep << num(l) << ' ' << num(dm) << '\n';
  table << out.str();
  write_file(dir / "report.txt", out.str());
  write_file(dir / "delta_m.dat", bars.str());
  if (!lambda_points.empty()) write_file(dir / "lambda_sweep.dat", sweep.str());
}

}  // namespace vamo::eval
