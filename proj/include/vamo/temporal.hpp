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
#include <span>
#include <vector>

#include "vamo/common.hpp"

// Periodicity-aware features: amplitude spectrum, dominant periods,
// period-phase folding and the amplitude-weighted aggregate z.
namespace vamo::temporal {

// H past steps of d channels, row-major [H x d], oldest first.
class HistoryWindow {
 public:
  HistoryWindow(std::vector<double> samples, std::size_t channels, int step_minutes = 15);

  std::size_t length() const { return samples_.size() / channels_; }
  std::size_t channels() const { return channels_; }
  int step_minutes() const { return step_minutes_; }
  double at(std::size_t h, std::size_t c) const { return samples_[h * channels_ + c]; }
  std::span<const double> samples() const { return samples_; }

 private:
  std::vector<double> samples_;
  std::size_t channels_;
  int step_minutes_;
};

struct Period {
  std::size_t q = 0;
  double amplitude = 0.0;
  double weight = 0.0;
};

struct PeriodDecomposition {
  std::vector<double> spectrum;  // S(f), f = 0..H-1; index 0 is DC
  std::vector<Period> periods;
  std::size_t k_top = 0;
};

// Channel-averaged DFT amplitude |sum_h x_h exp(-2 pi i f h / H)|.
std::vector<double> spectrum(const HistoryWindow& window, Exec exec = Exec::kParallel);

// Picks the k_top strongest non-DC frequencies in 1..H/2 (ties: lower f),
// maps f -> floor(H / f), dedups and weights by softmax of amplitude.
PeriodDecomposition top_periods(std::span<const double> spectrum, std::size_t k_top);

// [q x floor(H/q) x d] tensor; rows index phase, columns index cycle.
struct PeriodTensor {
  std::size_t q = 0;
  std::size_t cycles = 0;
  std::size_t channels = 0;
  std::vector<double> data;  // (phase * cycles + cycle) * channels + c

  double at(std::size_t phase, std::size_t cycle, std::size_t c) const {
    return data[(phase * cycles + cycle) * channels + c];
  }
};

// Drops the oldest H mod q samples and folds the rest column by column.
PeriodTensor reshape_period(const HistoryWindow& window, std::size_t q);

// Statistics per channel: overall mean, overall max, peak of the mean
// intra-period profile, and the cycle-mean at the phase that comes next.
inline constexpr std::size_t kStatsPerChannel = 4;
std::vector<double> pool_stats(const PeriodTensor& tensor);

// sum_q weight_q * pool_stats(reshape_q(window)).
std::vector<double> aggregated_stats(const PeriodDecomposition& decomp,
                                     const HistoryWindow& window);

// Dense map from pooled statistics to the augmentation width.
struct FeatureParams {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // [out x in]
  std::vector<double> bias;    // [out]

  FeatureParams(std::size_t in, std::size_t out);
  FeatureParams(std::size_t in, std::size_t out, std::uint64_t seed);
  std::vector<double> apply(std::span<const double> x) const;
};

// z = sum_q weight_q * Dense(pool_stats(reshape_q(window))).
std::vector<double> period_features(const PeriodDecomposition& decomp,
                                    const HistoryWindow& window, const FeatureParams& params);

// Gradient of <upstream, z> with respect to (weight, bias), flattened weight
// first. z is affine in the parameters so this is exact.
std::vector<double> period_features_param_grad(const PeriodDecomposition& decomp,
                                               const HistoryWindow& window,
                                               const FeatureParams& params,
                                               std::span<const double> upstream);

// s~ = s + z.
std::vector<double> augment_state(std::span<const double> s, std::span<const double> z);

}  // namespace vamo::temporal
