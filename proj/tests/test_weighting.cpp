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

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "test_util.hpp"
#include "vamo/weighting.hpp"

using namespace vamo;
using vamo::testing::flat;
using vamo::testing::naive_softmax;
using vamo::testing::random_bundle;

namespace {

GradientBundle bundle2(std::vector<double> val, std::vector<std::vector<double>> train) {
  std::vector<ParamVector> g;
  for (auto& t : train) g.push_back(flat(t));
  return GradientBundle(std::move(g), flat(std::move(val)));
}

void check_simplex(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) {
    CHECK(x >= 0.0);
    s += x;
  }
  CHECK(std::abs(s - 1.0) <= 1e-12);
}

}  // namespace

TEST_CASE("marginal gains are dot products with the validation gradient") {
  CHECK(marginal_gains(bundle2({1, 0}, {{1, 0}}))[0] == 1.0);
  const auto m = marginal_gains(bundle2({1, 0}, {{1, 0}, {0, 1}}));
  CHECK(m == std::vector<double>{1.0, 0.0});
  const auto z = marginal_gains(bundle2({0, 0, 1}, {{1, 0, 0}, {0, 3, 0}}));
  CHECK(z == std::vector<double>{0.0, 0.0});
}

TEST_CASE("bundle rejects mixed layouts") {
  std::vector<ParamVector> g{flat({1, 2}), ParamVector({{"other", {2}}}, {1, 2})};
  CHECK_THROWS_WITH_AS(GradientBundle(g, flat({1, 2})), doctest::Contains("layout"), Error);
  CHECK_THROWS_AS(GradientBundle({flat({1, 2})}, flat({1, 2, 3})), Error);
}

TEST_CASE("closed-form weights") {
  SUBCASE("equal gains give uniform weights") {
    for (double l : {0.1, 1.0, 7.0}) {
      const auto w = vamo_weights(std::vector<double>{2.5, 2.5, 2.5, 2.5}, l).weights;
      for (double x : w) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
    }
  }
  SUBCASE("K=2, m=(ln 2, 0), lambda=1") {
    const auto w = vamo_weights(std::vector<double>{std::log(2.0), 0.0}, 1.0).weights;
    CHECK(std::abs(w[0] - 2.0 / 3.0) < 1e-15);
    CHECK(std::abs(w[1] - 1.0 / 3.0) < 1e-15);
  }
  SUBCASE("matches an independent long-double softmax") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
      const auto m = vamo::testing::normal_vector(rng, 2 + t % 7, 3.0);
      const double l = 0.05 + (t % 5);
      const auto w = vamo_weights(m, l).weights;
      const auto o = naive_softmax(m, l);
      for (std::size_t k = 0; k < m.size(); ++k) CHECK(std::abs(w[k] - o[k]) < 1e-14);
    }
  }
  SUBCASE("lambda = 0 is one-hot at the lowest-index argmax") {
    const auto w = vamo_weights(std::vector<double>{0.3, 0.9, 0.9, -1.0}, 0.0);
    CHECK(w.weights == std::vector<double>{0, 1, 0, 0});
    CHECK(w.temperature == 0.0);
  }
  SUBCASE("lambda = inf is exactly uniform") {
    const auto w = vamo_weights(std::vector<double>{5, -3, 1}, std::numeric_limits<double>::infinity());
    for (double x : w.weights) CHECK(x == 1.0 / 3.0);
  }
  SUBCASE("large gains do not overflow") {
    const auto w = vamo_weights(std::vector<double>{1e6, 1e6 - 1.0}, 1.0).weights;
    check_simplex(w);
    CHECK(w[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(vamo_weights(std::vector<double>{1.0, std::nan("")}, 1.0),
                         doctest::Contains("non-finite gain"), Error);
    CHECK_THROWS_WITH_AS(
        vamo_weights(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}, 1.0),
        doctest::Contains("non-finite gain"), Error);
    CHECK_THROWS_AS(vamo_weights(std::vector<double>{1.0}, -1.0), Error);
  }
}

TEST_CASE("property: simplex closure and shift invariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t k = 1 + t % 8;
    const auto m = vamo::testing::normal_vector(rng, k, 2.0);
    for (double l : {0.0, 0.01, 1.0, 100.0}) {
      const auto w = vamo_weights(m, l).weights;
      check_simplex(w);
      const double c = shift(rng);
      auto mc = m;
      for (auto& x : mc) x += c;
      const auto wc = vamo_weights(mc, l).weights;
      for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(w[i] - wc[i]) <= 1e-12);
    }
  }
}

TEST_CASE("property: hard-max weights are invariant to validation-gradient scaling") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    auto b = random_bundle(rng, 2 + t % 5, 8);
    auto m = marginal_gains(b);
    auto w = vamo_weights(m, 0.0).weights;
    for (auto& x : m) x *= 3.7;
    CHECK(vamo_weights(m, 0.0).weights == w);
  }
}

TEST_CASE("entropy objective") {
  CHECK(entropy_objective(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 0}, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(entropy_objective(std::vector<double>{0, 1, 0}, std::vector<double>{3, -2, 9}, 4.0) ==
        -2.0);
  CHECK_THROWS_AS(entropy_objective(std::vector<double>{0.6, 0.6}, std::vector<double>{0, 0}, 1),
                  Error);
  CHECK_THROWS_AS(entropy_objective(std::vector<double>{1.1, -0.1}, std::vector<double>{0, 0}, 1),
                  Error);
}

TEST_CASE("simplex grid oracle") {
  SUBCASE("lambda = 0 picks the vertex at argmax") {
    const auto g = simplex_grid_oracle(std::vector<double>{0.2, 1.5, -0.3}, 0.0, 0.01);
    CHECK(g.weights[1] == doctest::Approx(1.0));
    CHECK(g.value == doctest::Approx(1.5));
  }
  SUBCASE("K=2, m=(ln 2, 0), lambda=1, step 1e-4 agrees with the closed form") {
    const std::vector<double> m{std::log(2.0), 0.0};
    const auto g = simplex_grid_oracle(m, 1.0, 1e-4);
    CHECK(g.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
    const auto w = vamo_weights(m, 1.0).weights;
    CHECK(std::abs(g.value - entropy_objective(w, m, 1.0)) < 1e-6);
  }
  SUBCASE("zero gains give the uniform point") {
    const auto g = simplex_grid_oracle(std::vector<double>{0, 0, 0, 0}, 1.0, 0.05);
    for (double x : g.weights) CHECK(x == doctest::Approx(0.25));
  }
  SUBCASE("vamo weights attain the grid maximum for random K=2 and K=3 gains") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const auto m = vamo::testing::normal_vector(rng, 2 + t % 2);
      const auto g = simplex_grid_oracle(m, 1.0, 1e-3);
      CHECK(entropy_objective(vamo_weights(m, 1.0).weights, m, 1.0) >= g.value - 1e-9);
    }
  }
  SUBCASE("serial and parallel scans agree bit for bit") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 5; ++t) {
      const auto m = vamo::testing::normal_vector(rng, 4);
      const auto a = simplex_grid_oracle(m, 0.5, 0.02, Exec::kSerial);
      const auto b = simplex_grid_oracle(m, 0.5, 0.02, Exec::kParallel);
      CHECK(a.value == b.value);
      CHECK(a.weights == b.weights);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(simplex_grid_oracle(std::vector<double>(5, 0.0), 1.0, 0.1),
                         doctest::Contains("oracle limited to small K"), Error);
    CHECK_THROWS_AS(simplex_grid_oracle(std::vector<double>{1.0}, 1.0, 0.1), Error);
    CHECK_THROWS_AS(simplex_grid_oracle(std::vector<double>{1.0, 2.0}, 1.0, 0.0), Error);
  }
}

TEST_CASE("combine") {
  const auto b = bundle2({0, 0}, {{1, 0}, {0, 1}});
  CHECK(combine(b, std::vector<double>{0.25, 0.75}).values()[0] == 0.25);
  CHECK(combine(b, std::vector<double>{0.25, 0.75}).values()[1] == 0.75);
  const auto b3 = bundle2({0, 0}, {{1, 2}, {3, 4}, {5, 9}});
  const auto one = combine(b3, std::vector<double>{0, 1, 0});
  CHECK(one == b3.train_grads()[1]);
  const auto mean = combine(b3, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(mean[0] == doctest::Approx(3.0));
  CHECK(mean[1] == doctest::Approx(5.0));
  CHECK_THROWS_AS(combine(b3, std::vector<double>{0.5, 0.5}), Error);
}

TEST_CASE("lemma certificate") {
  const auto c = lemma1_certificate(bundle2({1, 0}, {{1, 0}, {0, 1}}), 1.0);
  CHECK(c.lhs == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(c.rhs == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK(c.holds);
  const auto same = lemma1_certificate(bundle2({1, 2}, {{3, 1}, {3, 1}, {3, 1}}), 2.0);
  CHECK(same.lhs == doctest::Approx(5.0));
  CHECK(same.holds);

  std::mt19937_64 rng(21);
  int violations = 0;
  for (int t = 0; t < 300; ++t) {
    const auto b = random_bundle(rng, 2 + t % 7, 32);
    for (double l : {0.1, 1.0, 10.0})
      if (!lemma1_certificate(b, l).holds) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("log-sum-exp sandwich") {
  const auto s = lse_sandwich(std::vector<double>{0, 0}, 1.0);
  CHECK(s.max == 0.0);
  CHECK(s.lse == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(s.upper == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const auto one = lse_sandwich(std::vector<double>{4.2}, 0.3);
  CHECK(one.max == one.lse);
  CHECK(one.lse == one.upper);
  std::mt19937_64 rng(22);
  for (int t = 0; t < 300; ++t) {
    const auto x = vamo::testing::normal_vector(rng, 1 + t % 9, 10.0);
    const double l = std::exp(std::normal_distribution<double>(0.0, 2.0)(rng));
    const auto r = lse_sandwich(x, l);
    CHECK(r.max <= r.lse);
    CHECK(r.lse <= r.upper);
  }
}

TEST_CASE("alignment statistics") {
  CHECK(alignment_stats(bundle2({1, 2}, {{1, 2}, {0, 1}})).gamma_hat == doctest::Approx(1.0));
  CHECK(alignment_stats(bundle2({1, 0}, {{0, 1}, {0, -3}})).gamma_hat == 0.0);
  const auto s = alignment_stats(bundle2({1, 0}, {{2, 0}, {0, 1}}));
  CHECK(s.gamma_hat == doctest::Approx(2.0));
  // min over the simplex of ||(2w, 1-w)|| is at w = 1/5: sqrt(4/25 + 16/25).
  CHECK(s.m_hat == doctest::Approx(std::sqrt(0.8)).epsilon(1e-3));
  CHECK_THROWS_WITH_AS(alignment_stats(bundle2({0, 0}, {{1, 0}})),
                       doctest::Contains("degenerate validation gradient"), Error);

  SUBCASE("projected-gradient estimate for K > 4 is close to a fine oracle") {
    // Orthonormal task gradients: min ||sum w e_k|| = 1/sqrt(K) at uniform w.
    std::vector<std::vector<double>> e;
    for (int k = 0; k < 6; ++k) {
      std::vector<double> v(6, 0.0);
      v[k] = 1.0;
      e.push_back(v);
    }
    const auto r = alignment_stats(bundle2({1, 0, 0, 0, 0, 0}, e));
    CHECK(r.m_hat == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-4));
  }
}

TEST_CASE("loss-ratio weights") {
  const auto w = dwa_weights({{2.0, 2.0}, {2.0, 1.0}}, 1.0);
  CHECK(w[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(0.5))).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(0.6225).epsilon(1e-4));
  CHECK(w[1] == doctest::Approx(0.3775).epsilon(1e-4));
  const auto eq = dwa_weights({{4.0, 2.0}, {1.0, 0.5}, {8.0, 4.0}}, 2.0);
  for (double x : eq) CHECK(x == doctest::Approx(1.0 / 3.0));
  const auto warm = dwa_weights({{1.0}, {2.0}}, 1.0);
  CHECK(warm == std::vector<double>{0.5, 0.5});
  CHECK(dwa_weights({{}, {}}, 1.0) == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(dwa_weights({{1.0, 0.0}, {1.0, 1.0}}, 1.0), Error);
}

TEST_CASE("gradient surgery") {
  SUBCASE("hand projection") {
    // g1' = (1/2, 1/2); g2' = (-1,1) - (-1/1)(1,0) = (0, 1); mean = (1/4, 3/4).
    const auto d = pcgrad_combine(bundle2({0, 0}, {{1, 0}, {-1, 1}}), 1);
    CHECK(d[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("no conflict keeps the mean") {
    const auto d = pcgrad_combine(bundle2({0, 0}, {{1, 1}, {2, 0}, {0, 3}}), 9);
    CHECK(d[0] == doctest::Approx(1.0));
    CHECK(d[1] == doctest::Approx(4.0 / 3.0));
  }
  SUBCASE("antiparallel gradients annihilate") {
    const auto d = pcgrad_combine(bundle2({0, 0}, {{1, -2}, {-1, 2}}), 3);
    CHECK(std::abs(d[0]) < 1e-15);
    CHECK(std::abs(d[1]) < 1e-15);
  }
  SUBCASE("zero-norm projector is skipped") {
    const auto d = pcgrad_combine(bundle2({0, 0}, {{1, 2}, {0, 0}}), 3);
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(1.0));
  }
  SUBCASE("property: a single projection leaves a non-negative dot with the projector") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 200; ++t) {
      auto b = random_bundle(rng, 2, 16);
      const auto& g = b.train_grads();
      double dot = 0.0, n1 = 0.0;
      for (std::size_t i = 0; i < 16; ++i) {
        dot += g[0][i] * g[1][i];
        n1 += g[1][i] * g[1][i];
      }
      if (dot >= 0.0) continue;
      // With K = 2 each gradient is projected once, against the other's original.
      std::vector<double> p0(16);
      for (std::size_t i = 0; i < 16; ++i) p0[i] = g[0][i] - dot / n1 * g[1][i];
      double after = 0.0;
      for (std::size_t i = 0; i < 16; ++i) after += p0[i] * g[1][i];
      CHECK(after >= -1e-12);
    }
  }
  CHECK_THROWS_AS(pcgrad_combine(bundle2({0}, {{1}}), 1), Error);
}

TEST_CASE("simplex projection and gain smoothing") {
  const auto p = project_to_simplex(std::vector<double>{0.5, 0.5, 0.5});
  for (double x : p) CHECK(x == doctest::Approx(1.0 / 3.0));
  const auto q = project_to_simplex(std::vector<double>{2.0, 0.0});
  CHECK(q == std::vector<double>{1.0, 0.0});
  GainSmoother off;
  CHECK(off.update(std::vector<double>{1, 2}) == std::vector<double>{1, 2});
  GainSmoother ema(0.5);
  ema.update(std::vector<double>{2, 0});
  const auto s = ema.update(std::vector<double>{0, 4});
  CHECK(s == std::vector<double>{1, 2});
}
