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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"
#include "vamo/eval.hpp"

using namespace vamo;
using namespace vamo::eval;
using vamo::testing::scratch_dir;
using vamo::testing::slurp;

namespace {

double delta_m_oracle(const std::vector<double>& b, const std::vector<double>& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) s += -(m[k] - b[k]) / b[k] * 100.0;
  return s / static_cast<double>(b.size());
}

BenchConfig tiny_bench() {
  BenchConfig c;
  c.days = 4;
  c.counts = {4, 4, 3};
  c.encoder_widths = {8};
  c.head_widths = {4};
  c.train.iterations = 25;
  c.train.batch_size = 12;
  c.train.diag_every = 5;
  c.strategies = {Strategy::kVamo, Strategy::kVamoNoVal, Strategy::kVanilla};
  c.lambdas = {0.1, 1.0, 1e4};
  c.temporal_ablation = true;
  c.seeds = {1, 2};
  c.eval_episodes = 2;
  return c;
}

}  // namespace

TEST_CASE("relative drop from published tuples") {
  // Store conversion, direct conversion, add-to-cart returns.
  const std::vector<double> stl{12.06, 17.88, 2.87};

  const std::vector<std::pair<std::vector<double>, double>> rows{
      {{24.23, 24.25, 3.77}, -55.97}, {{17.67, 23.72, 2.92}, -26.97},
      {{18.42, 20.64, 2.55}, -19.01}, {{18.68, 19.56, 3.31}, -26.54},
      {{17.12, 21.92, 1.94}, -10.72}, {{15.18, 19.49, 2.40}, -6.17}};
  for (const auto& [m, published] : rows) {
    const double d = delta_m(stl, m);
    CHECK(std::abs(d - published) <= 0.01);
    CHECK(d == doctest::Approx(delta_m_oracle(stl, m)).epsilon(1e-12));
  }
  CHECK(delta_m(stl, stl) == 0.0);
  CHECK_THROWS_WITH_AS(delta_m(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}),
                       doctest::Contains("undefined relative drop"), Error);
  CHECK_THROWS_AS(delta_m(stl, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(delta_m(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("metric summary") {
  const auto m = summarize(1, {1.0, 2.0, 6.0}, {2.0, 2.0, 2.0});
  CHECK(m.task == 1);
  CHECK(m.runs == 3);
  CHECK(m.mean_return == doctest::Approx(3.0));
  CHECK(m.std_return == doctest::Approx(std::sqrt(14.0 / 3.0)));
  CHECK(m.roi == doctest::Approx(1.5));
  CHECK(m.cost_per_unit == doctest::Approx(2.0 / 3.0));
  const auto z = summarize(0, {0.0}, {0.0});
  CHECK(z.std_return == 0.0);
  CHECK(std::isnan(z.roi));
  CHECK(std::isnan(z.cost_per_unit));
}

TEST_CASE("policy evaluation replays fresh days") {
  const auto env = sim::EnvConfig::default_profile();
  const std::vector<std::uint64_t> seeds{3, 4, 5};
  // The behaviour policy carries its own noise stream, so each day gets a fresh one.
  const auto factory = [&](const sim::AuctionDay&) { return sim::behavior_policy(env, {}, 21); };
  const auto m = evaluate_policy(env, factory, 1, 6, seeds);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto d = sim::generate_day(env, 6, eval_day_seed(seeds[i], 6));
    const auto tr = sim::rollout(env, sim::behavior_policy(env, {}, 21), 1, d);
    CHECK(m.returns[i] == tr.total_reward());
    CHECK(m.costs[i] == tr.total_cost());
  }
  CHECK(eval_day_seed(3, 6) != sim::day_seed(3, 6));
  CHECK_THROWS_AS(evaluate_policy(env, factory, 1, 6, std::span<const std::uint64_t>{}), Error);
}

TEST_CASE("zero model bids nothing") {
  const auto corpus = sim::generate_dataset(sim::EnvConfig::default_profile(), 3, {3, 3, 3}, {}, 1);
  const data::FeatureOptions opts;
  auto shape = opts.model_shape(3);
  shape.encoder_widths = {4};
  shape.head_widths = {};
  shape.use_temporal = true;
  const SharedBottomModel zero(shape);
  const std::vector<std::uint64_t> one{9};
  const auto m = evaluate_model(zero, corpus, opts, 0, 1.0, one);
  CHECK(m.mean_return == 0.0);
  CHECK(m.mean_cost == 0.0);
  CHECK(m.std_return == 0.0);
}

TEST_CASE("benchmark end to end") {
  const auto cfg = tiny_bench();
  const auto labels = cfg.variants();
  std::vector<std::string> names;
  for (const auto& v : labels) names.push_back(v.label);
  CHECK(names == std::vector<std::string>{"vamo@0.1", "vamo@1", "vamo@10000", "vamo_noval",
                                          "vanilla", "vamo_notemporal"});
  CHECK_FALSE(labels.back().use_temporal);
  CHECK_FALSE(cfg.model_config(false).use_temporal);

  const auto dir = scratch_dir("bench");
  const auto r = run_benchmark(cfg, dir.string());
  REQUIRE(r.variants.size() == 6);
  CHECK(r.stl.size() == 2);

  {  // relative drops follow from the per-seed returns
    for (const auto& v : r.variants) {
      double mean = 0.0;
      for (std::size_t s = 0; s < r.seeds.size(); ++s) {
        std::vector<double> b, m;
        for (std::size_t k = 0; k < 3; ++k) {
          b.push_back(r.stl[s][k].mean_return);
          m.push_back(v.per_seed[s][k].mean_return);
        }
        CHECK(v.delta_m[s] == doctest::Approx(delta_m_oracle(b, m)).epsilon(1e-12));
        mean += v.delta_m[s] / 2.0;
      }
      CHECK(v.delta_m_mean == doctest::Approx(mean).epsilon(1e-12));
    }
  }
  {  // very high temperature traces are uniform
    std::ifstream in(dir / "traces" / "vamo@10000_seed1.jsonl");
    REQUIRE(in.good());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      for (const char* w : {"w1", "w2", "w3"})
        CHECK(std::abs(j.at(w).get<double>() - 1.0 / 3.0) <= 1e-3);
      ++n;
    }
    CHECK(n == 6);  // every fifth iteration plus the last
  }
  {  // the ablation without periodic features has zero temporal input
    const SharedBottomModel m(cfg.model_config(false), 3);
    const std::vector<double> stats(cfg.features.periodic_dim(), 0.7);
    for (double z : m.temporal_feature(stats)) CHECK(z == 0.0);
  }
  {  // tables and report
    for (const char* f : {"runs.csv", "summary.csv", "deltas.csv"})
      CHECK(std::filesystem::exists(dir / f));
    const auto summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("label,strategy,lambda,temporal,delta_m_mean,delta_m_std", 0) == 0);
    CHECK(summary.find("\nstl,stl,nan,1,0,0") != std::string::npos);
    std::ostringstream table;
    write_report(dir.string(), table);
    CHECK(table.str().find("vamo_noval") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "lambda_sweep.dat"));
    const auto sweep = slurp(dir / "lambda_sweep.dat");
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 3);
  }
  {  // existing output is never overwritten
    CHECK_THROWS_WITH_AS(run_benchmark(cfg, dir.string()), doctest::Contains("output path exists"),
                         Error);
  }
  {  // identical configs give identical tables
    const auto again = scratch_dir("bench_again");
    run_benchmark(cfg, again.string());
    for (const char* f : {"runs.csv", "summary.csv", "deltas.csv"})
      CHECK(slurp(dir / f) == slurp(again / f));
    std::filesystem::remove_all(again);
  }
}

TEST_CASE("benchmark config errors") {
  auto c = tiny_bench();
  c.strategies.push_back(Strategy::kStl);
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_bench();
  c.days = 2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_bench();
  c.counts = {1, 1};
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_bench();
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), Error);
}
