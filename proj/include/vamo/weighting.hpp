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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vamo/common.hpp"
#include "vamo/param_vector.hpp"

namespace vamo {

// K per-task training gradients plus the validation gradient, all sharing one
// parameter layout.
class GradientBundle {
 public:
  GradientBundle(std::vector<ParamVector> train_grads, ParamVector val_grad,
                 std::size_t iteration = 0);

  std::size_t num_tasks() const { return train_.size(); }
  std::size_t dim() const { return val_.size(); }
  const std::vector<ParamVector>& train_grads() const { return train_; }
  const ParamVector& val_grad() const { return val_; }
  std::size_t iteration() const { return iteration_; }

 private:
  std::vector<ParamVector> train_;
  ParamVector val_;
  std::size_t iteration_;
};

// A point on the simplex and the gains that produced it. temperature == 0
// marks hard-max weights; +inf marks exact uniform weights.
struct TaskWeights {
  std::vector<double> weights;
  std::vector<double> gains;
  double temperature = 1.0;
};

// m_k = <g_val, g_k>.
std::vector<double> marginal_gains(const GradientBundle& bundle);

// softmax(m / lambda); lambda == 0 gives one-hot at the lowest-index argmax and
// lambda == +inf gives exact uniform weights.
TaskWeights vamo_weights(std::span<const double> gains, double lambda);

// sum_k w_k m_k - lambda sum_k w_k log w_k with 0 log 0 = 0.
double entropy_objective(std::span<const double> w, std::span<const double> gains,
                         double lambda);

struct GridOptimum {
  std::vector<double> weights;
  double value = -std::numeric_limits<double>::infinity();
};

// Exhaustive maximisation of entropy_objective over the simplex lattice with
// spacing `step` (K <= 4). Ties keep the lexicographically first point.
GridOptimum simplex_grid_oracle(std::span<const double> gains, double lambda, double step,
                                Exec exec = Exec::kParallel);

// d = sum_k w_k g_k, summed in task order.
ParamVector combine(const GradientBundle& bundle, std::span<const double> weights);

struct Lemma1Certificate {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Checks <g_val, d_lambda> >= max_k m_k - lambda log K.
Lemma1Certificate lemma1_certificate(const GradientBundle& bundle, double lambda);

struct LseSandwich {
  double max = 0.0;
  double lse = 0.0;    // lambda * log sum exp(x / lambda)
  double upper = 0.0;  // max + lambda log K
};

LseSandwich lse_sandwich(std::span<const double> x, double lambda);

struct AlignmentStats {
  double gamma_hat = 0.0;
  double m_hat = 0.0;
};

AlignmentStats alignment_stats(const GradientBundle& bundle);

// Loss-ratio weights r_k = L_k(i-1)/L_k(i-2), softmax(r / T), on the simplex.
// Any task with fewer than two recorded losses yields uniform weights.
std::vector<double> dwa_weights(const std::vector<std::vector<double>>& loss_history,
                                double temperature);

// Gradient surgery: project each task gradient off the normal plane of every
// conflicting gradient (random order per task), then average.
ParamVector pcgrad_combine(const GradientBundle& bundle, std::uint64_t seed);

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

// Exponential moving average on gains; beta == 0 passes gains through.
class GainSmoother {
 public:
  explicit GainSmoother(double beta = 0.0);
  std::vector<double> update(std::span<const double> gains);

 private:
  double beta_;
  std::vector<double> state_;
};

}  // namespace vamo
