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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vamo/common.hpp"
#include "vamo/param_vector.hpp"

namespace vamo {

enum class Activation { kTanh, kIdentity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

// Shape of the shared-bottom network.
//
// Each window row is laid out as [state (state_dim) | periodic stats
// (periodic_dim) | pad flag (0 or 1)]. When use_temporal is set the model owns
// a dense map from the periodic stats to a state_dim vector z, and every
// non-padded row is augmented to s + z before entering the encoder. The encoder
// sees W rows of [s~ | pad]; each task head sees [hidden | quality].
struct ModelConfig {
  std::size_t num_tasks = 3;
  std::size_t window = 8;
  std::size_t state_dim = 5;
  std::size_t periodic_dim = 0;
  bool pad_flag = true;
  bool use_temporal = false;
  std::vector<std::size_t> encoder_widths{64, 64};
  std::vector<std::size_t> head_widths{32};
  Activation activation = Activation::kTanh;

  std::size_t feature_dim() const { return state_dim + periodic_dim + (pad_flag ? 1 : 0); }
  std::size_t encoder_input() const { return window * (state_dim + (pad_flag ? 1 : 0)); }
  void validate() const;
};

// One behaviour-cloning example: a [window x feature_dim] row-major window,
// the quality condition y, and the logged action.
struct Sample {
  std::vector<double> window;
  double quality = 0.0;
  double target = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

class SharedBottomModel {
 public:
  explicit SharedBottomModel(ModelConfig config);
  // Parameters drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  SharedBottomModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ParamVector& params() const { return params_; }
  ParamVector& params() { return params_; }
  void set_params(ParamVector params);
  Layout layout() const { return params_.layout(); }

  // Predicted action for one window.
  double forward(std::size_t task, std::span<const double> window, double quality) const;

  // Mean squared error over the batch (all samples belong to `task`).
  double loss(std::size_t task, std::span<const Sample> batch) const;
  // Loss plus its gradient. Slots of other task heads are exactly zero.
  LossGrad loss_and_grad(std::size_t task, std::span<const Sample> batch,
                         Exec exec = Exec::kParallel) const;

  // z for one row of periodic statistics; zero vector when temporal is off.
  std::vector<double> temporal_feature(std::span<const double> periodic_stats) const;

 private:
  struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight = 0;  // offset of [out x in] row-major weights
    std::size_t bias = 0;
  };

  struct Scratch;

  void build_layout();
  void check_task(std::size_t task) const;
  void check_window(std::span<const double> window) const;
  double run(std::size_t task, std::span<const double> window, double quality,
             Scratch& s) const;
  // Adds d(pred-target)^2 / d(theta) for one sample into `grad`; returns the
  // squared error.
  double backprop(std::size_t task, const Sample& sample, Scratch& s,
                  std::span<double> grad) const;

  ModelConfig config_;
  ParamVector params_;
  std::vector<Dense> encoder_;
  std::vector<std::vector<Dense>> heads_;
  Dense temporal_;
};

// Central-difference gradient of an arbitrary scalar function of the
// parameters. Used as the independent oracle for loss_and_grad.
ParamVector fd_gradient(const std::function<double(const ParamVector&)>& loss,
                        const ParamVector& at, double step);
ParamVector fd_gradient(const SharedBottomModel& model, std::size_t task,
                        std::span<const Sample> batch, double step);

}  // namespace vamo
