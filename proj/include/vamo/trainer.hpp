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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vamo/dataset.hpp"
#include "vamo/model.hpp"
#include "vamo/weighting.hpp"

namespace vamo {

enum class Strategy {
  kVamo,       // softmax of validation-aligned gains
  kVamoNoVal,  // alignment target = sum of task gradients (no held-out data)
  kVanilla,    // uniform weights
  kDwa,
  kPcgrad,
  kStl,        // one independent model per task
};

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy s);

enum class Schedule { kConstant, kRobbinsMonro };

struct TrainConfig {
  std::size_t iterations = 1000;
  double eta = 0.05;
  Schedule schedule = Schedule::kConstant;
  double lambda = 1.0;  // 0 = hard max, +inf = exact uniform
  Strategy strategy = Strategy::kVamo;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double ema_beta = 0.0;
  double momentum = 0.0;  // heavy-ball coefficient; envelope checks assume 0
  double dwa_temperature = 2.0;
  std::size_t dwa_period = 20;  // iterations per DWA "epoch"
  std::size_t diag_every = 1;
  std::size_t checkpoint_every = 0;  // 0 disables
  std::string checkpoint_dir;

  void validate(std::size_t num_tasks) const;
  // eta_i: constant, or eta / (1 + i)^0.6.
  double step_size(std::size_t i) const;
};

struct DiagRecord {
  std::size_t iteration = 0;
  std::size_t task_model = 0;  // STL sub-run index, 0 otherwise
  double eta = 0.0;
  std::vector<double> train_loss;
  double val_loss = 0.0;        // before the update
  double val_loss_after = 0.0;  // same validation batch, after the update
  double val_grad_sq = 0.0;
  std::vector<double> gains;    // <g_val, g_k>
  std::vector<double> weights;
  double gamma_hat = 0.0;
  double max_task_grad_norm = 0.0;
  double step_norm = 0.0;        // ||theta_{i+1} - theta_i||
  double val_grad_change = -1.0; // ||g_val,i - g_val,i-1|| when the previous iteration was recorded
  double predicted_delta = 0.0;  // -eta <g_val, d>
  double actual_delta = 0.0;
};

struct RunDiagnostics {
  std::string strategy;
  std::vector<DiagRecord> records;
};

// Loss/gradient provider for the weighted-descent loop.
class MultiTaskObjective {
 public:
  virtual ~MultiTaskObjective() = default;
  virtual std::size_t num_tasks() const = 0;
  // Draws whatever minibatches iteration i uses.
  virtual void prepare(std::size_t iteration) = 0;
  virtual LossGrad task_loss_grad(std::size_t task, const ParamVector& theta) = 0;
  virtual LossGrad validation_loss_grad(const ParamVector& theta) = 0;
  virtual double validation_loss(const ParamVector& theta) = 0;
};

// Behaviour-cloning objective over the shared-bottom model. With `only_task`
// set, exposes a single task (for single-task learning) whose train and
// validation batches come entirely from that task.
class ModelObjective : public MultiTaskObjective {
 public:
  ModelObjective(const SharedBottomModel& model, const data::BatchSampler& sampler,
                 std::size_t batch_size, std::uint64_t seed,
                 std::optional<std::size_t> only_task = std::nullopt);

  std::size_t num_tasks() const override;
  void prepare(std::size_t iteration) override;
  LossGrad task_loss_grad(std::size_t task, const ParamVector& theta) override;
  LossGrad validation_loss_grad(const ParamVector& theta) override;
  double validation_loss(const ParamVector& theta) override;

 private:
  std::size_t model_task(std::size_t k) const;
  const std::vector<Sample>& train_samples(std::size_t k) const;
  const std::vector<Sample>& val_samples(std::size_t k) const;

  SharedBottomModel model_;
  const data::BatchSampler* sampler_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::optional<std::size_t> only_task_;
  data::Batch train_, val_;
};

// Separable quadratic tasks 0.5 sum_j a_kj (theta_j - c_kj)^2 with a
// quadratic validation loss of the same form. Deterministic (full batch).
struct QuadraticProblem {
  std::vector<std::vector<double>> task_curvature;
  std::vector<std::vector<double>> task_center;
  std::vector<double> val_curvature;
  std::vector<double> val_center;

  double smoothness() const;  // max validation curvature
  // Lower bound on max_k <g_val, g_k> / ||g_val||^2 when all tasks share the
  // validation centre; capped at 1.
  double coverage() const;
};

class QuadraticObjective : public MultiTaskObjective {
 public:
  explicit QuadraticObjective(QuadraticProblem problem);
  std::size_t num_tasks() const override { return p_.task_curvature.size(); }
  void prepare(std::size_t) override {}
  LossGrad task_loss_grad(std::size_t task, const ParamVector& theta) override;
  LossGrad validation_loss_grad(const ParamVector& theta) override;
  double validation_loss(const ParamVector& theta) override;

 private:
  QuadraticProblem p_;
};

// Linear tasks <a_k, theta> and validation <a_val, theta>.
class LinearObjective : public MultiTaskObjective {
 public:
  LinearObjective(std::vector<std::vector<double>> task_slopes, std::vector<double> val_slope);
  std::size_t num_tasks() const override { return slopes_.size(); }
  void prepare(std::size_t) override {}
  LossGrad task_loss_grad(std::size_t task, const ParamVector& theta) override;
  LossGrad validation_loss_grad(const ParamVector& theta) override;
  double validation_loss(const ParamVector& theta) override;

 private:
  std::vector<std::vector<double>> slopes_;
  std::vector<double> val_;
};

ParamVector flat_params(std::vector<double> values);

struct DescentResult {
  ParamVector params;
  RunDiagnostics diagnostics;
};

// The weighted update loop: per-task gradients, validation gradient, gains,
// strategy weights, theta <- theta - eta sum_k w_k g_k. Strategy kStl is not
// accepted here (see train()).
DescentResult weighted_descent(MultiTaskObjective& objective, ParamVector theta0,
                               const TrainConfig& cfg, std::ostream* weight_trace = nullptr);

struct TrainResult {
  // One parameter vector, or K for single-task learning (index = task).
  std::vector<ParamVector> params;
  RunDiagnostics diagnostics;
};

TrainResult train(const SharedBottomModel& model, const data::BatchSampler& sampler,
                  const TrainConfig& cfg, std::ostream* weight_trace = nullptr);

// Pearson correlation between predicted and actual validation-loss changes.
double first_order_check(const RunDiagnostics& diag);

struct Theorem1Envelope {
  double bound = 0.0;    // at the final iteration count
  double average = 0.0;  // mean ||g_val||^2 over all records
  bool holds = false;    // average <= bound for every prefix
  std::size_t first_violation = 0;
};

// Gap proxy: L_val(theta_0) - min observed L_val. Requires records at every
// iteration with a constant step size.
Theorem1Envelope theorem1_envelope(const RunDiagnostics& diag, double l_hat, double g_hat,
                                   double lambda, double eta, double gamma_hat);

struct EmpiricalConstants {
  double l_hat = 0.0;  // max ||g_val change|| / ||step||
  double g_hat = 0.0;  // max task-gradient norm
  double gamma_hat = 0.0;  // min recorded gamma_hat
};
EmpiricalConstants estimate_constants(const RunDiagnostics& diag);

// Line-delimited JSON, fields in declaration order of DiagRecord.
void write_diagnostics(std::ostream& os, const RunDiagnostics& diag);

}  // namespace vamo
