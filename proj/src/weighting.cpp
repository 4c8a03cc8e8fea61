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

#include "vamo/weighting.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <numeric>
#include <random>

#include "vamo/linalg.hpp"

namespace vamo {

GradientBundle::GradientBundle(std::vector<ParamVector> train_grads, ParamVector val_grad,
                               std::size_t iteration)
    : train_(std::move(train_grads)), val_(std::move(val_grad)), iteration_(iteration) {
  if (train_.empty()) throw Error("bundle: at least one task gradient required");
  for (const auto& g : train_)
    if (!g.same_layout(val_) || g.size() != val_.size())
      throw Error("layout: task and validation gradients differ in layout");
}

std::vector<double> marginal_gains(const GradientBundle& bundle) {
  std::vector<double> m;
  m.reserve(bundle.num_tasks());
  for (const auto& g : bundle.train_grads())
    m.push_back(linalg::dot(bundle.val_grad().values(), g.values()));
  return m;
}

namespace {

std::size_t argmax_lowest(std::span<const double> x) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < x.size(); ++k)
    if (x[k] > x[best]) best = k;
  return best;
}

void require_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw Error("non-finite gain");
}

}  // namespace

TaskWeights vamo_weights(std::span<const double> gains, double lambda) {
  if (gains.empty()) throw Error("weights: no gains");
  if (std::isnan(lambda) || lambda < 0.0) throw Error("weights: temperature must be >= 0");
  require_finite(gains);
  const std::size_t k = gains.size();
  TaskWeights out{std::vector<double>(k, 0.0), {gains.begin(), gains.end()}, lambda};
  if (lambda == 0.0) {
    out.weights[argmax_lowest(gains)] = 1.0;
    return out;
  }
  if (std::isinf(lambda)) {
    std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(k));
    return out;
  }
  const double top = gains[argmax_lowest(gains)];
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out.weights[j] = std::exp((gains[j] - top) / lambda);
    sum += out.weights[j];
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

double entropy_objective(std::span<const double> w, std::span<const double> gains,
                         double lambda) {
  linalg::require_same_size(w.size(), gains.size());
  double total = 0.0;
  for (double v : w) {
    if (v < -1e-9) throw Error("entropy_objective: weight off the simplex");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("entropy_objective: weight off the simplex");
  double linear = 0.0, entropy = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    linear += w[k] * gains[k];
    if (w[k] > 0.0) entropy -= w[k] * std::log(w[k]);
  }
  return linear + lambda * entropy;
}

namespace {

// Objective on the lattice point i / n, using c_i = i log i so that
// H = log n - (1/n) sum_k c_{i_k}.
struct Lattice {
  std::size_t n;
  std::vector<double> c;  // c[i] = i log i
  Lattice(std::size_t n) : n(n), c(n + 1, 0.0) {
    for (std::size_t i = 1; i <= n; ++i) c[i] = static_cast<double>(i) * std::log(static_cast<double>(i));
  }
};

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  std::array<std::size_t, 4> idx{};
};

// Scans all points with first coordinate i0 fixed; the remaining coordinates
// are enumerated lexicographically.
Best scan_slice(const Lattice& lat, std::span<const double> m, double lambda, std::size_t i0) {
  const std::size_t k = m.size();
  const std::size_t n = lat.n;
  const double inv = 1.0 / static_cast<double>(n);
  const double logn = std::log(static_cast<double>(n));
  // term(k, i) = (i m_k - lambda c_i) / n; objective = sum term + lambda log n.
  auto term = [&](std::size_t t, std::size_t i) {
    return (static_cast<double>(i) * m[t] - lambda * lat.c[i]) * inv;
  };
  Best best;
  auto consider = [&](double v, std::array<std::size_t, 4> idx) {
    if (v > best.value) {
      best.value = v;
      best.idx = idx;
    }
  };
  const double t0 = term(0, i0) + lambda * logn;
  const std::size_t r0 = n - i0;
  if (k == 2) {
    consider(t0 + term(1, r0), {i0, r0, 0, 0});
  } else if (k == 3) {
    for (std::size_t i1 = 0; i1 <= r0; ++i1)
      consider(t0 + term(1, i1) + term(2, r0 - i1), {i0, i1, r0 - i1, 0});
  } else {
    for (std::size_t i1 = 0; i1 <= r0; ++i1) {
      const double t1 = t0 + term(1, i1);
      const std::size_t r1 = r0 - i1;
      for (std::size_t i2 = 0; i2 <= r1; ++i2)
        consider(t1 + term(2, i2) + term(3, r1 - i2), {i0, i1, i2, r1 - i2});
    }
  }
  return best;
}

}  // namespace

GridOptimum simplex_grid_oracle(std::span<const double> gains, double lambda, double step,
                                Exec exec) {
  const std::size_t k = gains.size();
  if (k > 4) throw Error("oracle limited to small K");
  if (k < 2) throw Error("oracle requires K >= 2");
  if (!(step > 0.0) || step > 1.0) throw Error("oracle: step must lie in (0, 1]");
  if (lambda < 0.0) throw Error("oracle: temperature must be >= 0");
  require_finite(gains);
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  const Lattice lat(n);

  std::vector<Best> slices(n + 1);
  if (exec == Exec::kSerial) {
    for (std::size_t i0 = 0; i0 <= n; ++i0) slices[i0] = scan_slice(lat, gains, lambda, i0);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i0 = 0; i0 <= static_cast<std::ptrdiff_t>(n); ++i0)
      slices[i0] = scan_slice(lat, gains, lambda, static_cast<std::size_t>(i0));
  }
  // Reduce in slice order so both paths pick the same lexicographic point.
  Best best;
  for (const auto& s : slices)
    if (s.value > best.value) best = s;

  GridOptimum out;
  out.value = best.value;
  for (std::size_t t = 0; t < k; ++t)
    out.weights.push_back(static_cast<double>(best.idx[t]) / static_cast<double>(n));
  return out;
}

ParamVector combine(const GradientBundle& bundle, std::span<const double> weights) {
  if (weights.size() != bundle.num_tasks())
    throw Error("combine: " + std::to_string(weights.size()) + " weights for " +
                std::to_string(bundle.num_tasks()) + " tasks");
  ParamVector d = bundle.val_grad().zeros_like();
  for (std::size_t k = 0; k < weights.size(); ++k)
    linalg::axpy(weights[k], bundle.train_grads()[k].values(), d.values());
  return d;
}

Lemma1Certificate lemma1_certificate(const GradientBundle& bundle, double lambda) {
  if (!(lambda > 0.0)) throw Error("lemma1: temperature must be positive");
  const auto m = marginal_gains(bundle);
  const auto w = vamo_weights(m, lambda);
  const ParamVector d = combine(bundle, w.weights);
  Lemma1Certificate c;
  c.lhs = linalg::dot(bundle.val_grad().values(), d.values());
  c.rhs = *std::max_element(m.begin(), m.end()) -
          lambda * std::log(static_cast<double>(bundle.num_tasks()));
  c.holds = c.lhs >= c.rhs - 1e-9;
  return c;
}

LseSandwich lse_sandwich(std::span<const double> x, double lambda) {
  if (x.empty()) throw Error("lse: empty input");
  if (!(lambda > 0.0)) throw Error("lse: temperature must be positive");
  LseSandwich s;
  s.max = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double v : x) sum += std::exp((v - s.max) / lambda);
  s.lse = s.max + lambda * std::log(sum);
  s.upper = s.max + lambda * std::log(static_cast<double>(x.size()));
  return s;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) tau = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - tau, 0.0);
  return out;
}

namespace {

// min over the simplex of sqrt(w^T G w) with G the Gram matrix of task grads.
double min_combination_norm(const std::vector<std::vector<double>>& gram) {
  const std::size_t k = gram.size();
  auto quad = [&](std::span<const double> w) {
    double q = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) q += w[a] * gram[a][b] * w[b];
    return std::max(q, 0.0);
  };
  if (k == 1) return std::sqrt(gram[0][0]);
  double best = std::numeric_limits<double>::infinity();
  if (k <= 4) {
    const std::size_t n = 100;  // lattice step 1e-2
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> w(k);
    // Enumerate compositions of n into k parts.
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t t, std::size_t left) {
      if (t + 1 == k) {
        idx[t] = left;
        for (std::size_t j = 0; j < k; ++j) w[j] = static_cast<double>(idx[j]) / n;
        best = std::min(best, quad(w));
        return;
      }
      for (std::size_t i = 0; i <= left; ++i) {
        idx[t] = i;
        rec(t + 1, left - i);
      }
    };
    rec(0, n);
    return std::sqrt(best);
  }
  // Projected gradient descent from the barycentre; step from the Gram trace.
  std::vector<double> w(k, 1.0 / static_cast<double>(k)), grad(k);
  double trace = 0.0;
  for (std::size_t a = 0; a < k; ++a) trace += gram[a][a];
  const double lr = trace > 0.0 ? 1.0 / (2.0 * trace) : 0.0;
  best = quad(w);
  for (int it = 0; it < 500; ++it) {
    for (std::size_t a = 0; a < k; ++a) {
      grad[a] = 0.0;
      for (std::size_t b = 0; b < k; ++b) grad[a] += 2.0 * gram[a][b] * w[b];
    }
    for (std::size_t a = 0; a < k; ++a) w[a] -= lr * grad[a];
    w = project_to_simplex(w);
    best = std::min(best, quad(w));
  }
  return std::sqrt(best);
}

}  // namespace

AlignmentStats alignment_stats(const GradientBundle& bundle) {
  const double vv = linalg::squared_norm(bundle.val_grad().values());
  if (!(vv > 0.0)) throw Error("degenerate validation gradient");
  const auto m = marginal_gains(bundle);
  AlignmentStats s;
  s.gamma_hat = *std::max_element(m.begin(), m.end()) / vv;
  const std::size_t k = bundle.num_tasks();
  std::vector<std::vector<double>> gram(k, std::vector<double>(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b)
      gram[a][b] = gram[b][a] =
          linalg::dot(bundle.train_grads()[a].values(), bundle.train_grads()[b].values());
  s.m_hat = min_combination_norm(gram) / std::sqrt(vv);
  return s;
}

std::vector<double> dwa_weights(const std::vector<std::vector<double>>& loss_history,
                                double temperature) {
  const std::size_t k = loss_history.size();
  if (k == 0) throw Error("dwa: no tasks");
  if (!(temperature > 0.0)) throw Error("dwa: temperature must be positive");
  std::vector<double> uniform(k, 1.0 / static_cast<double>(k));
  for (const auto& h : loss_history)
    if (h.size() < 2) return uniform;
  std::vector<double> r(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& h = loss_history[j];
    const double prev = h[h.size() - 1], prev2 = h[h.size() - 2];
    if (!(prev > 0.0) || !(prev2 > 0.0)) throw Error("dwa: losses must be positive");
    r[j] = prev / prev2 / temperature;
  }
  // The source scales by K; weights here stay on the simplex.
  return vamo_weights(r, 1.0).weights;
}

ParamVector pcgrad_combine(const GradientBundle& bundle, std::uint64_t seed) {
  const std::size_t k = bundle.num_tasks();
  if (k < 2) throw Error("pcgrad: requires K >= 2");
  const auto& g = bundle.train_grads();
  std::vector<double> sq(k);
  for (std::size_t j = 0; j < k; ++j) sq[j] = linalg::squared_norm(g[j].values());

  std::mt19937_64 rng(seed);
  ParamVector out = bundle.val_grad().zeros_like();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < k; ++i) {
    ParamVector pc = g[i];
    order.clear();
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) order.push_back(j);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j : order) {
      if (!(sq[j] > 0.0)) continue;
      const double d = linalg::dot(pc.values(), g[j].values());
      if (d < 0.0) linalg::axpy(-d / sq[j], g[j].values(), pc.values());
    }
    linalg::axpy(1.0 / static_cast<double>(k), pc.values(), out.values());
  }
  return out;
}

GainSmoother::GainSmoother(double beta) : beta_(beta) {
  if (beta < 0.0 || beta >= 1.0) throw Error("config: EMA beta must lie in [0, 1)");
}

std::vector<double> GainSmoother::update(std::span<const double> gains) {
  if (beta_ == 0.0) return {gains.begin(), gains.end()};
  if (state_.empty()) {
    state_.assign(gains.begin(), gains.end());
  } else {
    for (std::size_t k = 0; k < gains.size(); ++k)
      state_[k] = beta_ * state_[k] + (1.0 - beta_) * gains[k];
  }
  return state_;
}

}  // namespace vamo
