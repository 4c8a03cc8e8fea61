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

// Command-line front end: gen-data, train, evaluate, benchmark, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vamo/config.hpp"
#include "vamo/eval.hpp"
#include "vamo/trainer.hpp"

namespace fs = std::filesystem;
using namespace vamo;

namespace {

data::SplitDataset split_of(const sim::Corpus& corpus) {
  return data::temporal_split(corpus.trajectories, corpus.env.num_tasks(), corpus.days - 1,
                              corpus.days);
}

void check_env(const eval::BenchConfig& cfg, const sim::Corpus& corpus) {
  if (cfg.env.hash() != corpus.env.hash())
    throw Error("config: [env] does not match the dataset's generating config");
}

std::string checkpoint_name(std::size_t k, std::size_t n) {
  return n == 1 ? "final.params" : "final_task" + std::to_string(k) + ".params";
}

int gen_data(const std::string& config, const std::string& out) {
  const auto cfg = load_config(config);
  const auto corpus =
      sim::generate_dataset(cfg.env, cfg.days, cfg.counts, cfg.behavior, cfg.data_seed);
  sim::save_corpus(out, corpus);
  std::ofstream split(out + "/split.csv");
  data::write_split_manifest(split, corpus.trajectories, split_of(corpus));
  std::printf("wrote %zu trajectories over %d days to %s (config %s)\n",
              corpus.trajectories.size(), corpus.days, out.c_str(), corpus.env.hash().c_str());
  return 0;
}

int train_cmd(const std::string& config, const std::string& data_dir, const std::string& out) {
  const auto cfg = load_config(config);
  const auto corpus = sim::load_corpus(data_dir);
  check_env(cfg, corpus);
  const data::BatchSampler sampler(corpus, split_of(corpus), cfg.features);
  const SharedBottomModel init(cfg.model_config(cfg.use_temporal),
                               sim::mix_seed(cfg.train.seed, 1));
  fs::create_directories(out);
  std::ofstream weights(out + "/weights.jsonl");
  const auto res = train(init, sampler, cfg.train, &weights);
  for (std::size_t k = 0; k < res.params.size(); ++k)
    save_checkpoint(out + "/" + checkpoint_name(k, res.params.size()), res.params[k]);
  std::ofstream diag(out + "/diagnostics.jsonl");
  write_diagnostics(diag, res.diagnostics);
  std::ofstream used(out + "/config.ini");
  write_config(used, cfg);
  const auto& last = res.diagnostics.records.back();
  std::printf("%s: %zu iterations, final validation loss %.6g\n",
              res.diagnostics.strategy.c_str(), cfg.train.iterations, last.val_loss_after);
  return 0;
}

int evaluate_cmd(const std::string& config, const std::string& data_dir,
                 const std::string& run_dir, std::size_t episodes, std::uint64_t seed) {
  const auto cfg = load_config(config);
  const auto corpus = sim::load_corpus(data_dir);
  check_env(cfg, corpus);
  const data::BatchSampler sampler(corpus, split_of(corpus), cfg.features);
  SharedBottomModel model(cfg.model_config(cfg.use_temporal));
  const std::size_t k = corpus.env.num_tasks();
  const bool stl = fs::exists(run_dir + "/final_task0.params");
  std::vector<std::uint64_t> seeds;
  for (std::size_t e = 0; e < episodes; ++e) seeds.push_back(sim::mix_seed(seed, 100 + e));
  std::printf("task,episodes,mean_return,std_return,mean_cost,roi,cost_per_unit\n");
  for (std::size_t t = 0; t < k; ++t) {
    model.set_params(load_checkpoint(run_dir + "/" + checkpoint_name(t, stl ? k : 1)));
    const auto m = eval::evaluate_model(model, corpus, cfg.features, t,
                                        sampler.max_train_quality(t), seeds);
    std::printf("%s,%zu,%.6g,%.6g,%.6g,%.6g,%.6g\n", corpus.env.tasks[t].name.c_str(), m.runs,
                m.mean_return, m.std_return, m.mean_cost, m.roi, m.cost_per_unit);
  }
  return 0;
}

int benchmark_cmd(const std::string& config, const std::string& out) {
  const auto cfg = load_config(config);
  const auto res = eval::run_benchmark(cfg, out);
  {
    std::ofstream used(out + "/config.ini");
    write_config(used, cfg);
  }
  eval::write_report(out, std::cout);
  (void)res;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validation-aligned multi-task optimisation toolkit"};
  app.require_subcommand(1);
  std::string config, out, data_dir, run_dir;
  std::size_t episodes = 8;
  std::uint64_t seed = 1;

  auto* gen = app.add_subcommand("gen-data", "Simulate the behaviour dataset");
  gen->add_option("-c,--config", config, "INI config")->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--out", out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train one strategy; writes checkpoints and diagnostics");
  tr->add_option("-c,--config", config, "INI config")->required()->check(CLI::ExistingFile);
  tr->add_option("-d,--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("-o,--out", out, "Run directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Roll out trained checkpoints on the test day");
  ev->add_option("-c,--config", config, "INI config")->required()->check(CLI::ExistingFile);
  ev->add_option("-d,--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("-r,--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("-n,--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  ev->add_option("-s,--seed", seed, "Evaluation seed");

  auto* bm = app.add_subcommand("benchmark", "STL plus every configured strategy over seeds");
  bm->add_option("-c,--config", config, "INI config")->required()->check(CLI::ExistingFile);
  bm->add_option("-o,--out", out, "Result directory (must be new or empty)")->required();

  auto* rp = app.add_subcommand("report", "Comparison table and plot data from a result directory");
  rp->add_option("-r,--results", run_dir, "Result directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return gen_data(config, out);
    if (*tr) return train_cmd(config, data_dir, out);
    if (*ev) return evaluate_cmd(config, data_dir, run_dir, episodes, seed);
    if (*bm) return benchmark_cmd(config, out);
    if (*rp) {
      eval::write_report(run_dir, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
