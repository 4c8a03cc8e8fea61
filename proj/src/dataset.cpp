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

#include "vamo/dataset.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <random>

namespace vamo::data {

const std::vector<std::size_t>& SplitDataset::indices(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    default: return test;
  }
}

SplitDataset temporal_split(std::span<const sim::Trajectory> trajectories, std::size_t num_tasks,
                            int d_val, int d_test) {
  if (!(d_val < d_test)) throw Error("split: validation day must precede the test day");
  SplitDataset s;
  s.d_val = d_val;
  s.d_test = d_test;
  s.task_histogram.assign(num_tasks, 0);
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& tr = trajectories[i];
    if (tr.task >= num_tasks) throw Error("unknown task " + std::to_string(tr.task));
    ++s.task_histogram[tr.task];
    if (tr.day < d_val) s.train.push_back(i);
    else if (tr.day == d_val) s.val.push_back(i);
    else if (tr.day == d_test) s.test.push_back(i);
    else throw Error("split: trajectory on day " + std::to_string(tr.day) +
                     " falls between or after the validation and test days");
  }
  if (s.train.empty() || s.val.empty() || s.test.empty()) throw Error("empty split");
  return s;
}

void write_split_manifest(std::ostream& os, std::span<const sim::Trajectory> trajectories,
                          const SplitDataset& split) {
  std::map<int, std::size_t> days;
  for (const auto& tr : trajectories) ++days[tr.day];
  os << "day,split,trajectories\n";
  for (const auto& [day, n] : days) {
    const char* name = day < split.d_val ? "train" : day == split.d_val ? "val" : "test";
    os << day << ',' << name << ',' << n << '\n';
  }
}

std::vector<std::size_t> apportion(std::span<const std::size_t> histogram, std::size_t total) {
  const std::size_t k = histogram.size();
  if (k == 0) throw Error("apportion: empty histogram");
  if (total < k) throw Error("apportion: batch size must be >= number of tasks");
  std::size_t n = 0;
  for (auto h : histogram) n += h;
  if (n == 0) throw Error("apportion: empty histogram");

  std::vector<std::size_t> quota(k);
  std::vector<std::pair<std::size_t, std::size_t>> rem;  // (remainder numerator, task)
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t num = histogram[j] * total;
    quota[j] = num / n;
    rem.emplace_back(num % n, j);
    assigned += quota[j];
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++quota[rem[i].second];

  for (std::size_t j = 0; j < k; ++j) {
    if (quota[j] > 0) continue;
    const auto donor = static_cast<std::size_t>(
        std::max_element(quota.begin(), quota.end()) - quota.begin());
    --quota[donor];
    quota[j] = 1;
  }
  return quota;
}

ModelConfig FeatureOptions::model_shape(std::size_t num_tasks) const {
  ModelConfig c;
  c.num_tasks = num_tasks;
  c.window = window;
  c.state_dim = sim::kStateFeatures;
  c.periodic_dim = periodic_dim();
  c.pad_flag = true;
  return c;
}

temporal::HistoryWindow market_history(std::span<const double> prev_day,
                                       std::span<const double> day, std::size_t t,
                                       std::size_t history) {
  constexpr std::size_t d = sim::kMarketChannels;
  std::vector<double> rows(history * d, 0.0);
  // Fill from the most recent step backwards.
  const std::size_t prev_steps = prev_day.size() / d;
  for (std::size_t back = 1; back <= history; ++back) {
    const double* src = nullptr;
    if (back <= t) src = &day[(t - back) * d];
    else if (back - t <= prev_steps) src = &prev_day[(prev_steps - (back - t)) * d];
    if (src) std::copy(src, src + d, rows.begin() + (history - back) * d);
  }
  return temporal::HistoryWindow(std::move(rows), d);
}

std::vector<double> periodic_rows(std::span<const double> prev_day, std::span<const double> day,
                                  const FeatureOptions& opts) {
  const std::size_t steps = day.size() / sim::kMarketChannels;
  const std::size_t p = opts.periodic_dim();
  std::vector<double> out(steps * p);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(steps); ++t) {
    const auto hist = market_history(prev_day, day, static_cast<std::size_t>(t), opts.history);
    const auto decomp = temporal::top_periods(temporal::spectrum(hist, Exec::kSerial), opts.k_top);
    const auto stats = temporal::aggregated_stats(decomp, hist);
    std::copy(stats.begin(), stats.end(), out.begin() + t * p);
  }
  return out;
}

std::vector<double> build_window(std::span<const std::array<double, sim::kStateFeatures>> states,
                                 std::span<const double> periodic, std::size_t t,
                                 const FeatureOptions& opts) {
  const std::size_t width = opts.row_width();
  const std::size_t p = opts.periodic_dim();
  std::vector<double> w(opts.window * width, 0.0);
  for (std::size_t r = 0; r < opts.window; ++r) {
    double* row = &w[r * width];
    const std::size_t back = opts.window - 1 - r;
    if (back > t) {
      row[width - 1] = 1.0;
      continue;
    }
    const std::size_t tau = t - back;
    std::copy(states[tau].begin(), states[tau].end(), row);
    std::copy(periodic.begin() + tau * p, periodic.begin() + (tau + 1) * p,
              row + sim::kStateFeatures);
  }
  return w;
}

BatchSampler::BatchSampler(const sim::Corpus& corpus, SplitDataset split, FeatureOptions opts)
    : corpus_(&corpus), split_(std::move(split)), opts_(opts), num_tasks_(corpus.env.num_tasks()) {
  if (opts_.window < 1) throw Error("config: window width must be >= 1");
  const auto& env = corpus.env;
  states_.reserve(corpus.trajectories.size());
  for (const auto& tr : corpus.trajectories) {
    const auto& prof = env.tasks.at(tr.task);
    std::vector<std::array<double, sim::kStateFeatures>> rows;
    rows.reserve(tr.steps.size());
    for (const auto& st : tr.steps)
      rows.push_back(sim::state_features(st.state, prof.budget, prof.value_mean,
                                         env.steps_per_day));
    states_.push_back(std::move(rows));
  }
  periodic_.resize(corpus.market.size() * num_tasks_);
  const std::vector<double> none;
  for (std::size_t d = 0; d < corpus.market.size(); ++d)
    for (std::size_t k = 0; k < num_tasks_; ++k) {
      const auto& prev = d > 0 ? corpus.market[d - 1][k] : none;
      periodic_[d * num_tasks_ + k] = periodic_rows(prev, corpus.market[d][k], opts_);
    }
}

std::vector<std::size_t> BatchSampler::quotas(std::size_t batch_size) const {
  return apportion(split_.task_histogram, batch_size);
}

Sample BatchSampler::make_sample(std::size_t traj, std::size_t t) const {
  const auto& tr = corpus_->trajectories[traj];
  const auto& periodic = periodic_[(tr.day - 1) * num_tasks_ + tr.task];
  return Sample{build_window(states_[traj], periodic, t, opts_), tr.quality, tr.steps[t].action};
}

Batch BatchSampler::sample_batch(Split which, std::size_t batch_size, std::uint64_t seed) const {
  if (batch_size < num_tasks_) throw Error("sample_batch: batch size must be >= number of tasks");
  Batch b;
  b.sizes = quotas(batch_size);
  for (std::size_t k = 0; k < num_tasks_; ++k)
    b.per_task.push_back(sample_task(which, k, b.sizes[k], sim::mix_seed(seed, k)));
  return b;
}

std::vector<Sample> BatchSampler::sample_task(Split which, std::size_t task, std::size_t n,
                                              std::uint64_t seed) const {
  std::vector<std::size_t> trajs;
  std::size_t pairs = 0;
  for (auto i : split_.indices(which))
    if (corpus_->trajectories[i].task == task) {
      trajs.push_back(i);
      pairs += corpus_->trajectories[i].steps.size();
    }
  if (pairs == 0) throw Error("task missing in split: task " + std::to_string(task));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pairs - 1);
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t r = pick(rng);
    for (auto i : trajs) {
      const std::size_t len = corpus_->trajectories[i].steps.size();
      if (r < len) {
        out.push_back(make_sample(i, r));
        break;
      }
      r -= len;
    }
  }
  return out;
}

std::vector<Sample> BatchSampler::all_samples(Split which, std::size_t task) const {
  std::vector<Sample> out;
  for (auto i : split_.indices(which)) {
    const auto& tr = corpus_->trajectories[i];
    if (tr.task != task) continue;
    for (std::size_t t = 0; t < tr.steps.size(); ++t) out.push_back(make_sample(i, t));
  }
  return out;
}

double BatchSampler::max_train_quality(std::size_t task) const {
  double best = 0.0;
  bool any = false;
  for (auto i : split_.train) {
    const auto& tr = corpus_->trajectories[i];
    if (tr.task != task) continue;
    best = any ? std::max(best, tr.quality) : tr.quality;
    any = true;
  }
  if (!any) throw Error("task missing in split: task " + std::to_string(task));
  return best;
}

}  // namespace vamo::data
