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

#include "vamo/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace vamo::temporal {

HistoryWindow::HistoryWindow(std::vector<double> samples, std::size_t channels,
                             int step_minutes)
    : samples_(std::move(samples)), channels_(channels), step_minutes_(step_minutes) {
  if (channels_ == 0 || samples_.size() % channels_ != 0)
    throw Error("shape: history samples do not divide into channels");
  if (samples_.size() / channels_ < 4) throw Error("window too short");
  if (step_minutes_ <= 0) throw Error("history: step_minutes must be positive");
  for (double v : samples_)
    if (!std::isfinite(v)) throw Error("history: non-finite sample");
}

std::vector<double> spectrum(const HistoryWindow& window, Exec exec) {
  const std::size_t h_len = window.length();
  const std::size_t d = window.channels();
  // Twiddles indexed by (f * h) mod H keep every angle exact in [0, 2 pi).
  std::vector<double> cs(h_len), sn(h_len);
  for (std::size_t i = 0; i < h_len; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(h_len);
    cs[i] = std::cos(a);
    sn[i] = std::sin(a);
  }
  std::vector<double> out(h_len, 0.0);
  auto one = [&](std::size_t f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      double re = 0.0, im = 0.0;
      for (std::size_t h = 0; h < h_len; ++h) {
        const std::size_t idx = (f * h) % h_len;
        const double x = window.at(h, c);
        re += x * cs[idx];
        im -= x * sn[idx];
      }
      acc += std::hypot(re, im);
    }
    out[f] = acc / static_cast<double>(d);
  };
  if (exec == Exec::kSerial) {
    for (std::size_t f = 0; f < h_len; ++f) one(f);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(h_len); ++f)
      one(static_cast<std::size_t>(f));
  }
  return out;
}

PeriodDecomposition top_periods(std::span<const double> spec, std::size_t k_top) {
  if (k_top == 0) throw Error("top_periods: k_top must be >= 1");
  const std::size_t h_len = spec.size();
  if (h_len < 4) throw Error("window too short");
  PeriodDecomposition out;
  out.spectrum.assign(spec.begin(), spec.end());
  out.k_top = k_top;

  const std::size_t f_max = h_len / 2;
  double peak = 0.0;
  for (std::size_t f = 1; f <= f_max; ++f) peak = std::max(peak, spec[f]);
  if (peak <= 1e-10 * std::max(1.0, spec[0])) {
    out.periods.push_back({h_len, 0.0, 1.0});
    return out;
  }

  std::vector<std::size_t> freqs;
  for (std::size_t f = 1; f <= f_max; ++f) freqs.push_back(f);
  std::stable_sort(freqs.begin(), freqs.end(),
                   [&](std::size_t a, std::size_t b) { return spec[a] > spec[b]; });
  freqs.resize(std::min(k_top, freqs.size()));

  for (std::size_t f : freqs) {
    const std::size_t q = std::clamp<std::size_t>(h_len / f, 2, h_len);
    auto it = std::find_if(out.periods.begin(), out.periods.end(),
                           [&](const Period& p) { return p.q == q; });
    // Frequencies arrive strongest first, so an existing entry already holds
    // the larger amplitude.
    if (it == out.periods.end()) out.periods.push_back({q, spec[f], 0.0});
  }
  const double top = out.periods.front().amplitude;
  double sum = 0.0;
  for (auto& p : out.periods) {
    p.weight = std::exp(p.amplitude - top);
    sum += p.weight;
  }
  for (auto& p : out.periods) p.weight /= sum;
  return out;
}

PeriodTensor reshape_period(const HistoryWindow& window, std::size_t q) {
  const std::size_t h_len = window.length();
  if (q < 2 || q > h_len) throw Error("reshape: period out of range");
  PeriodTensor t;
  t.q = q;
  t.cycles = h_len / q;
  t.channels = window.channels();
  t.data.resize(q * t.cycles * t.channels);
  const std::size_t skip = h_len % q;
  for (std::size_t cyc = 0; cyc < t.cycles; ++cyc)
    for (std::size_t ph = 0; ph < q; ++ph)
      for (std::size_t c = 0; c < t.channels; ++c)
        t.data[(ph * t.cycles + cyc) * t.channels + c] = window.at(skip + cyc * q + ph, c);
  return t;
}

std::vector<double> pool_stats(const PeriodTensor& t) {
  std::vector<double> out;
  out.reserve(kStatsPerChannel * t.channels);
  const double cycles = static_cast<double>(t.cycles);
  for (std::size_t c = 0; c < t.channels; ++c) {
    double sum = 0.0;
    double mx = -std::numeric_limits<double>::infinity();
    double profile_peak = -std::numeric_limits<double>::infinity();
    for (std::size_t ph = 0; ph < t.q; ++ph) {
      double row = 0.0;
      for (std::size_t cyc = 0; cyc < t.cycles; ++cyc) {
        const double v = t.at(ph, cyc, c);
        row += v;
        mx = std::max(mx, v);
      }
      sum += row;
      profile_peak = std::max(profile_peak, row / cycles);
    }
    double next_phase = 0.0;
    for (std::size_t cyc = 0; cyc < t.cycles; ++cyc) next_phase += t.at(0, cyc, c);
    out.push_back(sum / (cycles * static_cast<double>(t.q)));
    out.push_back(mx);
    out.push_back(profile_peak);
    out.push_back(next_phase / cycles);
  }
  return out;
}

std::vector<double> aggregated_stats(const PeriodDecomposition& decomp,
                                     const HistoryWindow& window) {
  std::vector<double> out(kStatsPerChannel * window.channels(), 0.0);
  for (const auto& p : decomp.periods) {
    const auto stats = pool_stats(reshape_period(window, p.q));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.weight * stats[i];
  }
  return out;
}

FeatureParams::FeatureParams(std::size_t in, std::size_t out)
    : in(in), out(out), weight(in * out, 0.0), bias(out, 0.0) {}

FeatureParams::FeatureParams(std::size_t in, std::size_t out, std::uint64_t seed)
    : FeatureParams(in, out) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& w : weight) w = u(rng);
  for (double& b : bias) b = u(rng);
}

std::vector<double> FeatureParams::apply(std::span<const double> x) const {
  if (x.size() != in) throw Error("shape: feature map input width");
  std::vector<double> y(bias);
  for (std::size_t o = 0; o < out; ++o)
    for (std::size_t i = 0; i < in; ++i) y[o] += weight[o * in + i] * x[i];
  return y;
}

namespace {

void check_feature_width(const HistoryWindow& window, const FeatureParams& params) {
  if (params.in != kStatsPerChannel * window.channels())
    throw Error("shape: feature map expects " + std::to_string(params.in) +
                " statistics, window provides " +
                std::to_string(kStatsPerChannel * window.channels()));
}

}  // namespace

std::vector<double> period_features(const PeriodDecomposition& decomp,
                                    const HistoryWindow& window, const FeatureParams& params) {
  check_feature_width(window, params);
  std::vector<double> z(params.out, 0.0);
  for (const auto& p : decomp.periods) {
    const auto y = params.apply(pool_stats(reshape_period(window, p.q)));
    for (std::size_t o = 0; o < z.size(); ++o) z[o] += p.weight * y[o];
  }
  return z;
}

std::vector<double> period_features_param_grad(const PeriodDecomposition& decomp,
                                               const HistoryWindow& window,
                                               const FeatureParams& params,
                                               std::span<const double> upstream) {
  check_feature_width(window, params);
  if (upstream.size() != params.out) throw Error("shape: upstream gradient width");
  const auto u = aggregated_stats(decomp, window);
  double wsum = 0.0;
  for (const auto& p : decomp.periods) wsum += p.weight;
  std::vector<double> g(params.in * params.out + params.out, 0.0);
  for (std::size_t o = 0; o < params.out; ++o) {
    for (std::size_t i = 0; i < params.in; ++i) g[o * params.in + i] = upstream[o] * u[i];
    g[params.in * params.out + o] = upstream[o] * wsum;
  }
  return g;
}

std::vector<double> augment_state(std::span<const double> s, std::span<const double> z) {
  if (s.size() != z.size()) throw Error("shape: state and feature lengths differ");
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] + z[i];
  return out;
}

}  // namespace vamo::temporal
