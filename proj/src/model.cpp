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

#include "vamo/model.hpp"

#include <cmath>
#include <random>

#include "vamo/linalg.hpp"

namespace vamo {

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw Error("config: unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  return a == Activation::kTanh ? "tanh" : "identity";
}

void ModelConfig::validate() const {
  if (num_tasks == 0) throw Error("config: model needs at least one task");
  if (window == 0 || state_dim == 0) throw Error("config: empty model input");
  if (encoder_widths.empty()) throw Error("config: encoder needs at least one layer");
  for (auto w : encoder_widths)
    if (w == 0) throw Error("config: zero-width encoder layer");
  for (auto w : head_widths)
    if (w == 0) throw Error("config: zero-width head layer");
  if (use_temporal && periodic_dim == 0)
    throw Error("config: temporal map requires periodic statistics");
}

struct SharedBottomModel::Scratch {
  std::vector<double> input;                 // encoder input
  std::vector<std::vector<double>> enc;      // post-activation per encoder layer
  std::vector<std::vector<double>> head;     // head inputs/activations, [0] = [hidden|y]
  std::vector<double> delta, next;
};

namespace {

inline double activate(Activation a, double x) {
  return a == Activation::kTanh ? std::tanh(x) : x;
}

// Derivative expressed through the activation output.
inline double activate_grad(Activation a, double y) {
  return a == Activation::kTanh ? 1.0 - y * y : 1.0;
}

}  // namespace

SharedBottomModel::SharedBottomModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  build_layout();
}

SharedBottomModel::SharedBottomModel(ModelConfig config, std::uint64_t seed)
    : SharedBottomModel(std::move(config)) {
  std::mt19937_64 rng(seed);
  auto fill = [&](const Dense& d) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < d.in * d.out; ++i) params_[d.weight + i] = u(rng);
    for (std::size_t i = 0; i < d.out; ++i) params_[d.bias + i] = u(rng);
  };
  if (config_.use_temporal) fill(temporal_);
  for (const auto& d : encoder_) fill(d);
  for (const auto& head : heads_)
    for (const auto& d : head) fill(d);
}

void SharedBottomModel::build_layout() {
  Layout layout;
  std::size_t offset = 0;
  auto add = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    Dense d{in, out, offset, offset + in * out};
    layout.push_back({prefix + ".weight", {out, in}});
    layout.push_back({prefix + ".bias", {out}});
    offset += in * out + out;
    return d;
  };
  if (config_.use_temporal)
    temporal_ = add("temporal", config_.periodic_dim, config_.state_dim);
  std::size_t in = config_.encoder_input();
  for (std::size_t l = 0; l < config_.encoder_widths.size(); ++l) {
    encoder_.push_back(add("encoder." + std::to_string(l), in, config_.encoder_widths[l]));
    in = config_.encoder_widths[l];
  }
  const std::size_t hidden = in;
  for (std::size_t k = 0; k < config_.num_tasks; ++k) {
    std::vector<Dense> head;
    std::size_t hin = hidden + 1;
    std::size_t l = 0;
    for (; l < config_.head_widths.size(); ++l) {
      head.push_back(add("head." + std::to_string(k) + "." + std::to_string(l), hin,
                         config_.head_widths[l]));
      hin = config_.head_widths[l];
    }
    head.push_back(add("head." + std::to_string(k) + "." + std::to_string(l), hin, 1));
    heads_.push_back(std::move(head));
  }
  params_ = ParamVector(std::move(layout));
}

void SharedBottomModel::set_params(ParamVector params) {
  if (!params.same_layout(params_)) throw Error("layout: parameter layout mismatch");
  params_ = std::move(params);
}

void SharedBottomModel::check_task(std::size_t task) const {
  if (task >= config_.num_tasks) throw Error("unknown task " + std::to_string(task));
}

void SharedBottomModel::check_window(std::span<const double> window) const {
  if (window.size() != config_.window * config_.feature_dim())
    throw Error("shape: window has " + std::to_string(window.size()) + " entries, expected " +
                std::to_string(config_.window * config_.feature_dim()));
}

std::vector<double> SharedBottomModel::temporal_feature(
    std::span<const double> periodic_stats) const {
  std::vector<double> z(config_.state_dim, 0.0);
  if (!config_.use_temporal) return z;
  if (periodic_stats.size() != config_.periodic_dim) throw Error("shape: periodic stats");
  const auto p = params_.values();
  for (std::size_t o = 0; o < config_.state_dim; ++o) {
    double acc = p[temporal_.bias + o];
    const double* w = &p[temporal_.weight + o * temporal_.in];
    for (std::size_t i = 0; i < temporal_.in; ++i) acc += w[i] * periodic_stats[i];
    z[o] = acc;
  }
  return z;
}

double SharedBottomModel::run(std::size_t task, std::span<const double> window,
                              double quality, Scratch& s) const {
  const auto p = params_.values();
  const std::size_t fd = config_.feature_dim();
  const std::size_t row_in = config_.state_dim + (config_.pad_flag ? 1 : 0);
  const Activation act = config_.activation;

  s.input.assign(config_.encoder_input(), 0.0);
  for (std::size_t r = 0; r < config_.window; ++r) {
    const double* row = &window[r * fd];
    double* dst = &s.input[r * row_in];
    const bool padded = config_.pad_flag && row[fd - 1] != 0.0;
    for (std::size_t c = 0; c < config_.state_dim; ++c) dst[c] = row[c];
    if (config_.use_temporal && !padded) {
      const double* stats = row + config_.state_dim;
      for (std::size_t o = 0; o < config_.state_dim; ++o) {
        double acc = p[temporal_.bias + o];
        const double* w = &p[temporal_.weight + o * temporal_.in];
        for (std::size_t i = 0; i < temporal_.in; ++i) acc += w[i] * stats[i];
        dst[o] += acc;
      }
    }
    if (config_.pad_flag) dst[config_.state_dim] = row[fd - 1];
  }

  auto dense = [&](const Dense& d, const std::vector<double>& x, std::vector<double>& y,
                   bool apply) {
    y.resize(d.out);
    for (std::size_t o = 0; o < d.out; ++o) {
      double acc = p[d.bias + o];
      const double* w = &p[d.weight + o * d.in];
      for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * x[i];
      y[o] = apply ? activate(act, acc) : acc;
    }
  };

  s.enc.resize(encoder_.size());
  const std::vector<double>* x = &s.input;
  for (std::size_t l = 0; l < encoder_.size(); ++l) {
    dense(encoder_[l], *x, s.enc[l], true);
    x = &s.enc[l];
  }

  const auto& head = heads_[task];
  s.head.resize(head.size() + 1);
  s.head[0] = *x;
  s.head[0].push_back(quality);
  for (std::size_t l = 0; l < head.size(); ++l)
    dense(head[l], s.head[l], s.head[l + 1], l + 1 < head.size());
  return s.head.back()[0];
}

double SharedBottomModel::forward(std::size_t task, std::span<const double> window,
                                  double quality) const {
  check_task(task);
  check_window(window);
  Scratch s;
  return run(task, window, quality, s);
}

double SharedBottomModel::backprop(std::size_t task, const Sample& sample, Scratch& s,
                                   std::span<double> g) const {
  const double pred = run(task, sample.window, sample.quality, s);
  const double err = pred - sample.target;
  const auto p = params_.values();
  const Activation act = config_.activation;

  // delta holds dLoss/d(pre-activation) of the current layer.
  s.delta.assign(1, 2.0 * err);
  const auto& head = heads_[task];
  for (std::size_t li = head.size(); li-- > 0;) {
    const Dense& d = head[li];
    const auto& in = s.head[li];
    s.next.assign(d.in, 0.0);
    for (std::size_t o = 0; o < d.out; ++o) {
      const double dz = s.delta[o];
      g[d.bias + o] += dz;
      double* gw = &g[d.weight + o * d.in];
      const double* w = &p[d.weight + o * d.in];
      for (std::size_t i = 0; i < d.in; ++i) {
        gw[i] += dz * in[i];
        s.next[i] += dz * w[i];
      }
    }
    if (li > 0)
      for (std::size_t i = 0; i < d.in; ++i) s.next[i] *= activate_grad(act, in[i]);
    s.delta.swap(s.next);
  }
  // Drop the quality slot and pass through the last encoder activation.
  s.delta.pop_back();
  for (std::size_t li = encoder_.size(); li-- > 0;) {
    const auto& out = s.enc[li];
    for (std::size_t o = 0; o < out.size(); ++o) s.delta[o] *= activate_grad(act, out[o]);
    const Dense& d = encoder_[li];
    const auto& in = li == 0 ? s.input : s.enc[li - 1];
    s.next.assign(d.in, 0.0);
    for (std::size_t o = 0; o < d.out; ++o) {
      const double dz = s.delta[o];
      g[d.bias + o] += dz;
      double* gw = &g[d.weight + o * d.in];
      const double* w = &p[d.weight + o * d.in];
      for (std::size_t i = 0; i < d.in; ++i) {
        gw[i] += dz * in[i];
        s.next[i] += dz * w[i];
      }
    }
    s.delta.swap(s.next);
  }

  if (config_.use_temporal) {
    const std::size_t fd = config_.feature_dim();
    const std::size_t row_in = config_.state_dim + (config_.pad_flag ? 1 : 0);
    for (std::size_t r = 0; r < config_.window; ++r) {
      const double* row = &sample.window[r * fd];
      if (config_.pad_flag && row[fd - 1] != 0.0) continue;
      const double* stats = row + config_.state_dim;
      for (std::size_t o = 0; o < config_.state_dim; ++o) {
        const double dz = s.delta[r * row_in + o];
        g[temporal_.bias + o] += dz;
        double* gw = &g[temporal_.weight + o * temporal_.in];
        for (std::size_t i = 0; i < temporal_.in; ++i) gw[i] += dz * stats[i];
      }
    }
  }
  return err * err;
}

double SharedBottomModel::loss(std::size_t task, std::span<const Sample> batch) const {
  check_task(task);
  if (batch.empty()) throw Error("empty batch");
  Scratch s;
  double total = 0.0;
  for (const auto& sample : batch) {
    check_window(sample.window);
    const double e = run(task, sample.window, sample.quality, s) - sample.target;
    total += e * e;
  }
  return total / static_cast<double>(batch.size());
}

LossGrad SharedBottomModel::loss_and_grad(std::size_t task, std::span<const Sample> batch,
                                          Exec exec) const {
  check_task(task);
  if (batch.empty()) throw Error("empty batch");
  for (const auto& sample : batch) check_window(sample.window);

  const std::size_t n = batch.size();
  const std::size_t dim = params_.size();
  LossGrad out{0.0, params_.zeros_like()};
  auto total = out.grad.values();

  if (exec == Exec::kSerial) {
    Scratch s;
    std::vector<double> g(dim);
    for (std::size_t b = 0; b < n; ++b) {
      std::fill(g.begin(), g.end(), 0.0);
      out.loss += backprop(task, batch[b], s, g);
      for (std::size_t j = 0; j < dim; ++j) total[j] += g[j];
    }
  } else {
    // Per-sample buffers, reduced afterwards in sample order so the result is
    // identical to the serial loop for any thread count.
    std::vector<double> per_sample(n * dim, 0.0);
    std::vector<double> sq(n, 0.0);
#pragma omp parallel
    {
      Scratch s;
#pragma omp for schedule(static)
      for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n); ++b)
        sq[b] = backprop(task, batch[b], s,
                         std::span<double>(per_sample).subspan(b * dim, dim));
    }
    for (std::size_t b = 0; b < n; ++b) {
      out.loss += sq[b];
      const double* g = &per_sample[b * dim];
      for (std::size_t j = 0; j < dim; ++j) total[j] += g[j];
    }
  }
  const double inv = static_cast<double>(n);
  out.loss /= inv;
  for (double& v : total) v /= inv;
  return out;
}

ParamVector fd_gradient(const std::function<double(const ParamVector&)>& loss,
                        const ParamVector& at, double step) {
  if (!(step > 0.0)) throw Error("fd_gradient: step must be positive");
  ParamVector probe = at;
  ParamVector grad = at.zeros_like();
  for (std::size_t j = 0; j < at.size(); ++j) {
    const double orig = at[j];
    probe[j] = orig + step;
    const double up = loss(probe);
    probe[j] = orig - step;
    const double down = loss(probe);
    probe[j] = orig;
    grad[j] = (up - down) / (2.0 * step);
  }
  return grad;
}

ParamVector fd_gradient(const SharedBottomModel& model, std::size_t task,
                        std::span<const Sample> batch, double step) {
  SharedBottomModel probe = model;
  return fd_gradient(
      [&](const ParamVector& theta) {
        probe.params() = theta;
        return probe.loss(task, batch);
      },
      model.params(), step);
}

}  // namespace vamo
