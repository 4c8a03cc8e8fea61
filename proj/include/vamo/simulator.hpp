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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vamo/common.hpp"

namespace vamo::sim {

// Per-task market and campaign parameters.
struct TaskProfile {
  std::string name;
  double value_mean = 1.0;        // mean impression value at curve level 1
  double value_sigma = 0.5;       // lognormal dispersion of values
  double budget = 100.0;          // daily budget B
  double volume_rate = 10.0;      // base expected impressions per step
  double volume_amplitude = 0.5;  // diurnal volume swing, fraction of base
  double volume_phase = 0.0;      // steps
  double value_amplitude = 0.2;   // diurnal value swing
  double price_ratio = 0.8;       // median market price relative to value
  double price_sigma = 0.4;
  double value_drift = 0.0;       // direction of the per-day value shift
  double price_drift = 0.0;       // direction of the per-day price shift
};

struct EnvConfig {
  int steps_per_day = 96;
  int fundamental_period = 96;
  int harmonic_period = 8;
  double harmonic_amplitude = 0.0;
  double price_value_corr = 0.5;
  double drift = 0.0;          // per-day log shift magnitude
  double volume_jitter = 0.5;  // per-day volume noise, in units of drift
  std::uint64_t drift_seed = 0;
  double discount = 1.0;
  std::vector<TaskProfile> tasks;

  std::size_t num_tasks() const { return tasks.size(); }
  void validate() const;
  // Stable FNV-1a hash of every field, hex encoded.
  std::string hash() const;

  // Three campaigns: high value / few impressions, mid value, low value /
  // many impressions.
  static EnvConfig default_profile();
};

// Day-level multipliers applied on top of the diurnal curves.
struct DayParams {
  double value_scale = 1.0;
  double price_scale = 1.0;
  double volume_scale = 1.0;
};

DayParams day_params(const EnvConfig& cfg, std::size_t task, int day);
double expected_volume(const EnvConfig& cfg, std::size_t task, int day, int t);
double value_curve(const EnvConfig& cfg, std::size_t task, int t);

struct Opportunity {
  double value = 0.0;
  double price = 0.0;
};

// One simulated day: opportunities per task per step.
struct AuctionDay {
  int day = 0;
  std::vector<std::vector<std::vector<Opportunity>>> slots;  // [task][t]

  const std::vector<Opportunity>& at(std::size_t task, int t) const { return slots[task][t]; }
  bool operator==(const AuctionDay&) const;
};

AuctionDay generate_day(const EnvConfig& cfg, int day, std::uint64_t seed);

// Observable market aggregates for one step: impression count and mean value /
// price, each normalised by the task's base level.
inline constexpr std::size_t kMarketChannels = 3;
std::array<double, kMarketChannels> market_obs(const EnvConfig& cfg, std::size_t task,
                                               const std::vector<Opportunity>& opps);
// [T x kMarketChannels] for one task over one day.
std::vector<double> market_stream(const EnvConfig& cfg, const AuctionDay& day,
                                  std::size_t task);

inline constexpr int kRecent = 4;

struct BidState {
  int step = 0;
  double budget_left = 0.0;
  double time_left_frac = 1.0;
  double spend_rate = 0.0;
  double recent_win_rate = 0.0;
  double recent_avg_value = 0.0;

  // Trailing per-step (cost, wins, opportunities, value sum) feeding the rates.
  std::array<std::array<double, 4>, kRecent> recent{};
};

BidState initial_state(const EnvConfig& cfg, std::size_t task);

// Normalised model features of a state.
inline constexpr std::size_t kStateFeatures = 5;
std::array<double, kStateFeatures> state_features(const BidState& s, double budget,
                                                  double value_mean, int steps_per_day);

struct StepResult {
  BidState next;
  double reward = 0.0;
  double cost = 0.0;
};

// Bid action * v on each opportunity; win when the bid beats the market price
// and the price fits in the remaining budget; the winner pays the price.
StepResult step(const EnvConfig& cfg, const BidState& state, double action,
                const std::vector<Opportunity>& opportunities);

struct StepRecord {
  BidState state;
  double action = 0.0;
  double reward = 0.0;
  double cost = 0.0;
};

struct Trajectory {
  std::size_t task = 0;
  int day = 0;
  std::vector<StepRecord> steps;
  double quality = 0.0;

  double total_reward() const;
  double total_cost() const;
  double discounted_return(double discount) const;
};

// states.back() is the current state; earlier entries are the episode so far.
using Policy = std::function<double(std::size_t task, std::span<const BidState> states)>;

// Runs one episode; quality is left at zero (set by the caller that owns the
// reference returns).
Trajectory rollout(const EnvConfig& cfg, const Policy& policy, std::size_t task,
                   const AuctionDay& day);
Trajectory rollout(const EnvConfig& cfg, const Policy& policy, std::size_t task, int day,
                   std::uint64_t seed);

// Budget-pacing behaviour policy: scale grows when spend lags the uniform
// plan, with lognormal per-episode and per-step noise.
struct BehaviorSpec {
  std::vector<double> base_scale;  // per task; empty means 1.0
  double pacing_gain = 2.0;
  double episode_sigma = 0.3;
  double step_sigma = 0.1;
};

Policy behavior_policy(const EnvConfig& cfg, const BehaviorSpec& spec, std::uint64_t seed);

// A generated corpus: trajectories plus the market streams needed to rebuild
// periodic features, and the per-task reference returns used for quality.
struct Corpus {
  EnvConfig env;
  int days = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> counts;
  std::vector<double> reference_return;
  std::vector<Trajectory> trajectories;
  // market[day - 1][task] is a [T x kMarketChannels] stream.
  std::vector<std::vector<std::vector<double>>> market;
};

// Distributes counts[k] trajectories of task k over days 1..days (remainders
// go to the latest days). Quality = return / mean behaviour return over the
// training days 1..days-2.
Corpus generate_dataset(const EnvConfig& cfg, int days, const std::vector<std::size_t>& counts,
                        const BehaviorSpec& behavior, std::uint64_t seed);

std::uint64_t day_seed(std::uint64_t seed, int day);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// File formats.
inline constexpr const char* kTrajectoryHeader = "# vamo-trajectories v1";
inline constexpr const char* kMarketHeader = "# vamo-market v1";
void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories(std::istream& is);
void write_market(std::ostream& os, const Corpus& corpus);
void save_corpus(const std::string& dir, const Corpus& corpus);
Corpus load_corpus(const std::string& dir);

}  // namespace vamo::sim
