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
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "test_util.hpp"
#include "vamo/temporal.hpp"

using namespace vamo;
using namespace vamo::temporal;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sinusoids(std::size_t h, const std::vector<std::pair<double, double>>& parts,
                              double phase = 0.0) {
  std::vector<double> x(h, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (auto [period, amp] : parts) x[i] += amp * std::sin(2 * kPi * (i + phase) / period);
  return x;
}

// Independent DFT oracle: std::complex with directly evaluated angles.
std::vector<double> dft_oracle(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> s(n);
  for (std::size_t f = 0; f < n; ++f) {
    std::complex<long double> acc = 0;
    for (std::size_t h = 0; h < n; ++h)
      acc += static_cast<long double>(x[h]) *
             std::polar<long double>(1.0L, -2.0L * std::numbers::pi_v<long double> * f * h / n);
    s[f] = static_cast<double>(std::abs(acc));
  }
  return s;
}

std::set<std::size_t> period_set(const PeriodDecomposition& d) {
  std::set<std::size_t> s;
  for (const auto& p : d.periods) s.insert(p.q);
  return s;
}

}  // namespace

TEST_CASE("history window validation") {
  CHECK_THROWS_WITH_AS(HistoryWindow(std::vector<double>(3, 0.0), 1), doctest::Contains("window too short"), Error);
  CHECK_THROWS_AS(HistoryWindow(std::vector<double>(9, 0.0), 2), Error);
  CHECK_THROWS_AS(HistoryWindow({0, 1, std::nan(""), 3}, 1), Error);
  CHECK(HistoryWindow(std::vector<double>(8, 0.0), 2).length() == 4);
  CHECK(HistoryWindow(std::vector<double>(8, 0.0), 2).step_minutes() == 15);
}

TEST_CASE("spectrum") {
  SUBCASE("constant signal is DC only") {
    const auto s = spectrum(HistoryWindow(std::vector<double>(96, 2.5), 1));
    CHECK(s[0] == doctest::Approx(240.0));
    for (std::size_t f = 1; f < 96; ++f) CHECK(s[f] < 1e-10);
  }
  SUBCASE("single sinusoid peaks at f = 4") {
    const auto x = sinusoids(96, {{24, 1.0}});
    const auto s = spectrum(HistoryWindow(x, 1));
    const auto oracle = dft_oracle(x);
    for (std::size_t f = 0; f < 96; ++f) CHECK(std::abs(s[f] - oracle[f]) < 1e-10);
    const auto peak = std::max_element(s.begin() + 1, s.begin() + 49) - s.begin();
    CHECK(peak == 4);
    CHECK(s[4] == doctest::Approx(48.0));
  }
  SUBCASE("two sinusoids peak at f = 4 and f = 12") {
    const auto s = spectrum(HistoryWindow(sinusoids(96, {{24, 1.0}, {8, 0.7}}), 1));
    std::vector<std::size_t> f(48);
    for (std::size_t i = 0; i < 48; ++i) f[i] = i + 1;
    std::sort(f.begin(), f.end(), [&](auto a, auto b) { return s[a] > s[b]; });
    CHECK(std::set<std::size_t>{f[0], f[1]} == std::set<std::size_t>{4, 12});
  }
  SUBCASE("channels are averaged") {
    const auto a = sinusoids(16, {{4, 1.0}});
    const auto b = sinusoids(16, {{8, 3.0}});
    std::vector<double> both;
    for (std::size_t i = 0; i < 16; ++i) {
      both.push_back(a[i]);
      both.push_back(b[i]);
    }
    const auto s = spectrum(HistoryWindow(both, 2));
    const auto sa = dft_oracle(a), sb = dft_oracle(b);
    for (std::size_t f = 0; f < 16; ++f) CHECK(s[f] == doctest::Approx((sa[f] + sb[f]) / 2));
  }
  SUBCASE("serial and parallel agree bit for bit") {
    std::mt19937_64 rng(4);
    const HistoryWindow w(vamo::testing::normal_vector(rng, 96 * 3), 3);
    CHECK(spectrum(w, Exec::kSerial) == spectrum(w, Exec::kParallel));
  }
}

TEST_CASE("property: Parseval for single-channel windows") {
  // Unnormalised DFT: sum_f S(f)^2 = H * sum_h x_h^2.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t h = 4 + t * 3;
    const auto x = vamo::testing::normal_vector(rng, h);
    const auto s = spectrum(HistoryWindow(x, 1));
    double lhs = 0.0, rhs = 0.0;
    for (double v : s) lhs += v * v;
    for (double v : x) rhs += v * v;
    rhs *= static_cast<double>(h);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * rhs);
  }
}

TEST_CASE("top periods") {
  SUBCASE("single sinusoid") {
    const auto d = top_periods(spectrum(HistoryWindow(sinusoids(96, {{24, 1.0}}), 1)), 1);
    REQUIRE(d.periods.size() == 1);
    CHECK(d.periods[0].q == 24);
    CHECK(d.periods[0].weight == 1.0);
  }
  SUBCASE("two equal sinusoids share the weight") {
    const auto d = top_periods(spectrum(HistoryWindow(sinusoids(96, {{24, 1.0}, {8, 1.0}}), 1)), 2);
    CHECK(period_set(d) == std::set<std::size_t>{24, 8});
    for (const auto& p : d.periods) CHECK(p.weight == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("softmax of the selected amplitudes") {
    std::vector<double> s(16, 0.0);
    s[0] = 100.0;
    s[2] = 3.0;
    s[5] = 1.0;
    const auto d = top_periods(s, 2);
    REQUIRE(d.periods.size() == 2);
    CHECK(d.periods[0].q == 8);
    CHECK(d.periods[1].q == 3);
    const auto o = vamo::testing::naive_softmax({3.0, 1.0}, 1.0);
    CHECK(d.periods[0].weight == doctest::Approx(o[0]).epsilon(1e-14));
  }
  SUBCASE("ties go to the lower frequency and periods are deduplicated") {
    std::vector<double> s(20, 0.0);
    s[6] = 2.0;
    s[3] = 2.0;
    s[7] = 1.5;  // floor(20 / 7) = 2 is distinct
    auto d = top_periods(s, 1);
    CHECK(d.periods[0].q == 6);  // f = 3
    // f = 7..10 all map to q = 2; only the strongest survives.
    std::vector<double> t(20, 0.0);
    t[7] = 1.0;
    t[8] = 2.0;
    t[9] = 0.5;
    t[3] = 0.7;
    d = top_periods(t, 3);
    REQUIRE(d.periods.size() == 2);
    CHECK(d.periods[0].q == 2);
    CHECK(d.periods[0].amplitude == 2.0);
  }
  SUBCASE("constant signal falls back to the whole window") {
    const auto d = top_periods(spectrum(HistoryWindow(std::vector<double>(32, 1.0), 1)), 3);
    REQUIRE(d.periods.size() == 1);
    CHECK(d.periods[0].q == 32);
    CHECK(d.periods[0].weight == 1.0);
  }
  SUBCASE("invariants on random spectra") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
      const std::size_t h = 4 + t % 60;
      auto s = vamo::testing::normal_vector(rng, h);
      for (auto& x : s) x = std::abs(x);
      const auto d = top_periods(s, 1 + t % 5);
      double sum = 0.0;
      std::set<std::size_t> seen;
      for (const auto& p : d.periods) {
        CHECK(p.weight >= 0.0);
        CHECK(p.q >= 2);
        CHECK(p.q <= h);
        CHECK(seen.insert(p.q).second);
        sum += p.weight;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(top_periods(std::vector<double>(8, 1.0), 0), Error);
}

TEST_CASE("property: circular shift leaves the period set unchanged") {
  for (int shift = 0; shift < 96; shift += 7) {
    const auto base = sinusoids(96, {{24, 1.0}, {8, 0.6}, {32, 0.3}});
    auto rotated = base;
    std::rotate(rotated.begin(), rotated.begin() + shift, rotated.end());
    const auto a = top_periods(spectrum(HistoryWindow(base, 1)), 3);
    const auto b = top_periods(spectrum(HistoryWindow(rotated, 1)), 3);
    CHECK(period_set(a) == period_set(b));
  }
}

TEST_CASE("property: injected periods are recovered") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 96.0);
  int recovered = 0;
  for (int t = 0; t < 100; ++t) {
    auto x = sinusoids(96, {{24, 1.0}}, u(rng));
    const auto y = sinusoids(96, {{8, 1.0}}, u(rng));
    // SNR 10: noise variance = signal variance / 10.
    const auto noise = vamo::testing::normal_vector(rng, 96, std::sqrt(1.0 / 10.0));
    for (std::size_t i = 0; i < 96; ++i) x[i] += y[i] + noise[i];
    if (period_set(top_periods(spectrum(HistoryWindow(x, 1)), 2)) == std::set<std::size_t>{24, 8})
      ++recovered;
  }
  CHECK(recovered == 100);
}

TEST_CASE("reshape by period") {
  const auto t = reshape_period(HistoryWindow({1, 2, 3, 4, 5, 6}, 1), 3);
  CHECK(t.cycles == 2);
  CHECK(t.at(0, 0, 0) == 1);
  CHECK(t.at(2, 0, 0) == 3);
  CHECK(t.at(0, 1, 0) == 4);
  CHECK(t.at(2, 1, 0) == 6);
  const auto u = reshape_period(HistoryWindow({0, 1, 2, 3, 4, 5, 6}, 1), 3);
  CHECK(u.data == t.data);
  const auto p = reshape_period(HistoryWindow(sinusoids(96, {{12, 1.0}}), 1), 12);
  for (std::size_t ph = 0; ph < 12; ++ph)
    for (std::size_t c = 1; c < p.cycles; ++c) CHECK(p.at(ph, c, 0) == doctest::Approx(p.at(ph, 0, 0)));
  CHECK_THROWS_AS(reshape_period(HistoryWindow({1, 2, 3, 4}, 1), 1), Error);
  CHECK_THROWS_AS(reshape_period(HistoryWindow({1, 2, 3, 4}, 1), 5), Error);
}

TEST_CASE("pooling statistics") {
  // Two channels over q = 2, 3 cycles.
  const HistoryWindow w({1, 10, 2, 20, 3, 30, 4, 40, 5, 50, 6, 60}, 2);
  const auto s = pool_stats(reshape_period(w, 2));
  // Channel 0: phases (1,3,5) and (2,4,6); means 3 and 4.
  CHECK(s[0] == 3.5);
  CHECK(s[1] == 6.0);
  CHECK(s[2] == 4.0);
  CHECK(s[3] == 3.0);
  CHECK(s[4] == 35.0);
  CHECK(s[5] == 60.0);
}

TEST_CASE("period features") {
  std::mt19937_64 rng(21);
  const HistoryWindow w(vamo::testing::normal_vector(rng, 48 * 2), 2);
  const FeatureParams params(kStatsPerChannel * 2, 3, 21);
  SUBCASE("zero window gives the bias") {
    const HistoryWindow zero(std::vector<double>(48 * 2, 0.0), 2);
    const auto z = period_features(top_periods(spectrum(zero), 2), zero, params);
    for (std::size_t o = 0; o < 3; ++o) CHECK(z[o] == params.bias[o]);
  }
  SUBCASE("a single period is the dense output of its statistics") {
    PeriodDecomposition d;
    d.periods = {{12, 1.0, 1.0}};
    const auto z = period_features(d, w, params);
    const auto y = params.apply(pool_stats(reshape_period(w, 12)));
    CHECK(z == y);
  }
  SUBCASE("finite-difference check on the dense parameters") {
    const auto d = top_periods(spectrum(w), 3);
    const std::vector<double> up{0.3, -1.2, 0.7};
    const auto g = period_features_param_grad(d, w, params, up);
    auto objective = [&](const FeatureParams& p) {
      const auto z = period_features(d, w, p);
      return up[0] * z[0] + up[1] * z[1] + up[2] * z[2];
    };
    const double eps = 1e-5;
    for (std::size_t i = 0; i < g.size(); ++i) {
      FeatureParams a = params, b = params;
      const bool is_w = i < params.weight.size();
      double& pa = is_w ? a.weight[i] : a.bias[i - params.weight.size()];
      double& pb = is_w ? b.weight[i] : b.bias[i - params.weight.size()];
      pa += eps;
      pb -= eps;
      const double fd = (objective(a) - objective(b)) / (2 * eps);
      CHECK(vamo::testing::rel_err(fd, g[i]) <= 1e-4);
    }
  }
  CHECK_THROWS_AS(period_features(top_periods(spectrum(w), 1), w, FeatureParams(5, 3)), Error);
}

TEST_CASE("golden period features, seed 13") {
  std::ifstream in(VAMO_GOLDEN_DIR "/period_window_seed13.txt");
  REQUIRE(in);
  std::size_t h = 0, d = 0;
  in >> h >> d;
  std::vector<double> x(h * d);
  for (auto& v : x) in >> v;
  REQUIRE(in);
  const HistoryWindow w(x, d);
  const FeatureParams params(kStatsPerChannel * d, 5, 13);
  std::ifstream pin(VAMO_GOLDEN_DIR "/period_params_seed13.txt");
  for (double v : params.weight) {
    double c = 0.0;
    pin >> c;
    CHECK(c == v);
  }
  for (double v : params.bias) {
    double c = 0.0;
    pin >> c;
    CHECK(c == v);
  }
  std::ifstream zin(VAMO_GOLDEN_DIR "/period_features_seed13.txt");
  const auto z = period_features(top_periods(spectrum(w), 2), w, params);
  for (double v : z) {
    double expected = 0.0;
    zin >> expected;
    REQUIRE(zin);
    CHECK(std::abs(v - expected) <= 1e-10);
  }
}

TEST_CASE("augment state") {
  CHECK(augment_state(std::vector<double>{1, 2}, std::vector<double>{0.5, -2}) ==
        std::vector<double>{1.5, 0});
  CHECK(augment_state(std::vector<double>{1, 2}, std::vector<double>{0, 0}) ==
        std::vector<double>{1, 2});
  CHECK(augment_state(std::vector<double>{0, 0}, std::vector<double>{3, 4}) ==
        std::vector<double>{3, 4});
  CHECK_THROWS_AS(augment_state(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}
