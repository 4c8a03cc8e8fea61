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
#include <iosfwd>
#include <span>
#include <vector>

#include "vamo/model.hpp"
#include "vamo/simulator.hpp"
#include "vamo/temporal.hpp"

namespace vamo::data {

enum class Split { kTrain, kVal, kTest };

// Trajectory indices per split; days strictly ordered train < val < test.
struct SplitDataset {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::vector<std::size_t> task_histogram;  // trajectories per task, whole corpus
  int d_val = 0;
  int d_test = 0;

  const std::vector<std::size_t>& indices(Split s) const;
};

SplitDataset temporal_split(std::span<const sim::Trajectory> trajectories, std::size_t num_tasks,
                            int d_val, int d_test);

// day -> split audit listing.
void write_split_manifest(std::ostream& os, std::span<const sim::Trajectory> trajectories,
                          const SplitDataset& split);

// Largest-remainder apportionment of `total` by histogram proportions, then
// every zero quota borrows one sample from the largest quota.
std::vector<std::size_t> apportion(std::span<const std::size_t> histogram, std::size_t total);

struct FeatureOptions {
  std::size_t window = 8;
  std::size_t history = 96;
  std::size_t k_top = 2;

  std::size_t periodic_dim() const { return temporal::kStatsPerChannel * sim::kMarketChannels; }
  std::size_t row_width() const { return sim::kStateFeatures + periodic_dim() + 1; }
  ModelConfig model_shape(std::size_t num_tasks) const;
};

// Trailing market history ending just before step t, over the previous day's
// stream and the current day's first t steps (zeros before the first day).
temporal::HistoryWindow market_history(std::span<const double> prev_day,
                                       std::span<const double> day, std::size_t t,
                                       std::size_t history);

// Aggregated periodic statistics for every step of a day: [T x periodic_dim].
std::vector<double> periodic_rows(std::span<const double> prev_day, std::span<const double> day,
                                  const FeatureOptions& opts);

// Window of W rows ending at step t built from per-step state features and
// periodic rows; steps before the episode start are zero rows with pad = 1.
std::vector<double> build_window(std::span<const std::array<double, sim::kStateFeatures>> states,
                                 std::span<const double> periodic, std::size_t t,
                                 const FeatureOptions& opts);

struct Batch {
  std::vector<std::vector<Sample>> per_task;
  std::vector<std::size_t> sizes;
};

// Precomputed feature rows over a corpus plus the temporal split.
class BatchSampler {
 public:
  BatchSampler(const sim::Corpus& corpus, SplitDataset split, FeatureOptions opts);

  const SplitDataset& split() const { return split_; }
  const FeatureOptions& options() const { return opts_; }
  std::size_t num_tasks() const { return num_tasks_; }
  std::vector<std::size_t> quotas(std::size_t batch_size) const;

  Batch sample_batch(Split split, std::size_t batch_size, std::uint64_t seed) const;
  // n samples of one task, uniform with replacement over (trajectory, step).
  std::vector<Sample> sample_task(Split split, std::size_t task, std::size_t n,
                                  std::uint64_t seed) const;
  // Every (trajectory, step) of one task in a split.
  std::vector<Sample> all_samples(Split split, std::size_t task) const;
  // Highest quality among the task's training trajectories.
  double max_train_quality(std::size_t task) const;

 private:
  Sample make_sample(std::size_t traj, std::size_t t) const;

  const sim::Corpus* corpus_;
  SplitDataset split_;
  FeatureOptions opts_;
  std::size_t num_tasks_;
  std::vector<std::vector<std::array<double, sim::kStateFeatures>>> states_;  // per trajectory
  std::vector<std::vector<double>> periodic_;  // per (day - 1) * K + task
};

}  // namespace vamo::data
