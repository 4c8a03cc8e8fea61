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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vamo/dataset.hpp"
#include "vamo/model.hpp"
#include "vamo/simulator.hpp"
#include "vamo/trainer.hpp"

namespace vamo::eval {

// Average relative drop versus the single-task baseline, in percent; more
// negative is better. Throws "undefined relative drop" on a zero baseline.
double delta_m(std::span<const double> stl, std::span<const double> method);

// Per-task outcome over evaluation episodes.
struct TaskMetrics {
  std::size_t task = 0;
  std::vector<double> returns;  // one per episode
  std::vector<double> costs;
  std::size_t runs = 0;
  double mean_return = 0.0;
  double std_return = 0.0;  // population standard deviation
  double mean_cost = 0.0;
  double roi = 0.0;            // mean return / mean cost; NaN when cost is 0
  double cost_per_unit = 0.0;  // mean cost / mean return; NaN when return is 0
};

TaskMetrics summarize(std::size_t task, std::vector<double> returns, std::vector<double> costs);

// Builds the policy for one freshly generated evaluation day.
using PolicyFactory = std::function<sim::Policy(const sim::AuctionDay& day)>;

// Seed of the s-th evaluation day; disjoint from the corpus streams.
std::uint64_t eval_day_seed(std::uint64_t seed, int day);

// Rolls the policy out on `day` once per seed (fresh auctions each time).
TaskMetrics evaluate_policy(const sim::EnvConfig& env, const PolicyFactory& factory,
                            std::size_t task, int day, std::span<const std::uint64_t> seeds);

// Greedy model policy: action = max(0, prediction) with the quality condition
// fixed, features rebuilt causally from the episode so far and the market
// history (prev_day stream, then the current day's observed steps).
sim::Policy model_policy(const SharedBottomModel& model, const sim::EnvConfig& env,
                         const data::FeatureOptions& opts, std::span<const double> prev_day,
                         const sim::AuctionDay& day, std::size_t task, double quality);

// Parameter vector per task for evaluation (one shared vector or K for STL).
TaskMetrics evaluate_model(const SharedBottomModel& model, const sim::Corpus& corpus,
                           const data::FeatureOptions& opts, std::size_t task, double quality,
                           std::span<const std::uint64_t> seeds);

// One benchmark row: a strategy with its temperature and temporal setting.
struct Variant {
  std::string label;
  Strategy strategy = Strategy::kVamo;
  double lambda = 1.0;
  bool use_temporal = true;
};

struct BenchConfig {
  sim::EnvConfig env = sim::EnvConfig::default_profile();
  int days = 10;
  std::vector<std::size_t> counts{20, 20, 10};
  sim::BehaviorSpec behavior;
  std::uint64_t data_seed = 7;

  data::FeatureOptions features;
  std::vector<std::size_t> encoder_widths{64, 64};
  std::vector<std::size_t> head_widths{32};
  Activation activation = Activation::kTanh;
  bool use_temporal = true;

  TrainConfig train;
  std::vector<Strategy> strategies{Strategy::kVamo, Strategy::kVamoNoVal, Strategy::kVanilla};
  std::vector<double> lambdas{1.0};  // one vamo row per entry
  bool temporal_ablation = false;    // adds a vamo row with z = 0
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t eval_episodes = 16;

  void validate() const;
  std::vector<Variant> variants() const;
  ModelConfig model_config(bool use_temporal) const;
};

struct VariantResult {
  Variant variant;
  // per_seed[s][k]
  std::vector<std::vector<TaskMetrics>> per_seed;
  std::vector<double> delta_m;  // per seed
  double delta_m_mean = 0.0;
  double delta_m_std = 0.0;
};

struct BenchmarkResult {
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<TaskMetrics>> stl;  // [seed][task]
  std::vector<VariantResult> variants;
  std::vector<std::string> task_names;

  const VariantResult& find(const std::string& label) const;
};

// Trains STL and every variant per seed on identical data and evaluation days.
// With a non-empty output_dir writes runs.csv, summary.csv, deltas.csv and
// per-run weight traces; an existing non-empty directory is an error.
BenchmarkResult run_benchmark(const BenchConfig& cfg, const std::string& output_dir = "");

// runs.csv: label,strategy,lambda,temporal,seed,task,mean_return,mean_cost,roi,cost_per_unit
void write_runs(std::ostream& os, const BenchmarkResult& r);
// summary.csv: label,delta_m_mean,delta_m_std, then per task mean/std return and roi
void write_summary(std::ostream& os, const BenchmarkResult& r);
// deltas.csv: label,seed,delta_m
void write_deltas(std::ostream& os, const BenchmarkResult& r);

// Reads a benchmark directory and writes report.txt plus two-column .dat plot
// series (Δm% per variant index, Δm% against lambda for the vamo sweep).
void write_report(const std::string& result_dir, std::ostream& table);

}  // namespace vamo::eval
