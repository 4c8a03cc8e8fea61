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

#include "vamo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "vamo/linalg.hpp"
#include "vamo/simulator.hpp"

namespace vamo {

Strategy parse_strategy(const std::string& name) {
  if (name == "vamo") return Strategy::kVamo;
  if (name == "vamo_noval" || name == "noval") return Strategy::kVamoNoVal;
  if (name == "vanilla") return Strategy::kVanilla;
  if (name == "dwa") return Strategy::kDwa;
  if (name == "pcgrad") return Strategy::kPcgrad;
  if (name == "stl") return Strategy::kStl;
  throw Error("config: unknown strategy '" + name + "'");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kVamo: return "vamo";
    case Strategy::kVamoNoVal: return "vamo_noval";
    case Strategy::kVanilla: return "vanilla";
    case Strategy::kDwa: return "dwa";
    case Strategy::kPcgrad: return "pcgrad";
    case Strategy::kStl: return "stl";
  }
  return "unknown";
}

void TrainConfig::validate(std::size_t num_tasks) const {
  if (iterations < 1) throw Error("config: iterations must be >= 1");
  if (!(eta >= 0.0)) throw Error("config: step size must be >= 0");
  if (std::isnan(lambda) || lambda < 0.0) throw Error("config: temperature must be >= 0");
  if (batch_size < num_tasks) throw Error("config: batch size must be >= number of tasks");
  if (diag_every < 1) throw Error("config: diag_every must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) throw Error("config: momentum must lie in [0, 1)");
  if (dwa_period < 1 || !(dwa_temperature > 0.0))
    throw Error("config: DWA needs a positive period and temperature");
}

double TrainConfig::step_size(std::size_t i) const {
  if (schedule == Schedule::kConstant) return eta;
  return eta / std::pow(1.0 + static_cast<double>(i), 0.6);
}

// ---------------------------------------------------------------------------
// Model objective

ModelObjective::ModelObjective(const SharedBottomModel& model, const data::BatchSampler& sampler,
                               std::size_t batch_size, std::uint64_t seed,
                               std::optional<std::size_t> only_task)
    : model_(model), sampler_(&sampler), batch_size_(batch_size), seed_(seed),
      only_task_(only_task) {
  if (only_task_ && *only_task_ >= model.config().num_tasks)
    throw Error("unknown task " + std::to_string(*only_task_));
  if (model.config().num_tasks != sampler.num_tasks())
    throw Error("shape: model and dataset disagree on the number of tasks");
}

std::size_t ModelObjective::num_tasks() const {
  return only_task_ ? 1 : sampler_->num_tasks();
}

std::size_t ModelObjective::model_task(std::size_t k) const {
  return only_task_ ? *only_task_ : k;
}

void ModelObjective::prepare(std::size_t iteration) {
  const auto ts = sim::mix_seed(seed_, 2 * iteration);
  const auto vs = sim::mix_seed(seed_, 2 * iteration + 1);
  if (only_task_) {
    train_.per_task = {sampler_->sample_task(data::Split::kTrain, *only_task_, batch_size_, ts)};
    val_.per_task = {sampler_->sample_task(data::Split::kVal, *only_task_, batch_size_, vs)};
  } else {
    train_ = sampler_->sample_batch(data::Split::kTrain, batch_size_, ts);
    val_ = sampler_->sample_batch(data::Split::kVal, batch_size_, vs);
  }
}

const std::vector<Sample>& ModelObjective::train_samples(std::size_t k) const {
  return train_.per_task.at(k);
}

const std::vector<Sample>& ModelObjective::val_samples(std::size_t k) const {
  return val_.per_task.at(k);
}

LossGrad ModelObjective::task_loss_grad(std::size_t task, const ParamVector& theta) {
  model_.params() = theta;
  return model_.loss_and_grad(model_task(task), train_samples(task));
}

LossGrad ModelObjective::validation_loss_grad(const ParamVector& theta) {
  model_.params() = theta;
  // Equal task weighting of per-task batch means.
  const std::size_t k = num_tasks();
  LossGrad out{0.0, theta.zeros_like()};
  for (std::size_t j = 0; j < k; ++j) {
    LossGrad lg = model_.loss_and_grad(model_task(j), val_samples(j));
    out.loss += lg.loss;
    linalg::axpy(1.0, lg.grad.values(), out.grad.values());
  }
  out.loss /= static_cast<double>(k);
  for (double& v : out.grad.values()) v /= static_cast<double>(k);
  return out;
}

double ModelObjective::validation_loss(const ParamVector& theta) {
  model_.params() = theta;
  const std::size_t k = num_tasks();
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) total += model_.loss(model_task(j), val_samples(j));
  return total / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Synthetic objectives

ParamVector flat_params(std::vector<double> values) {
  const std::size_t n = values.size();
  return ParamVector({{"theta", {n}}}, std::move(values));
}

double QuadraticProblem::smoothness() const {
  return *std::max_element(val_curvature.begin(), val_curvature.end());
}

double QuadraticProblem::coverage() const {
  double best = 0.0;
  for (const auto& a : task_curvature) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::min(worst, a[j] / val_curvature[j]);
    best = std::max(best, worst);
  }
  return std::min(best, 1.0);
}

QuadraticObjective::QuadraticObjective(QuadraticProblem problem) : p_(std::move(problem)) {
  const std::size_t n = p_.val_curvature.size();
  if (p_.val_center.size() != n || p_.task_curvature.size() != p_.task_center.size() ||
      p_.task_curvature.empty())
    throw Error("shape: quadratic problem");
  for (std::size_t k = 0; k < p_.task_curvature.size(); ++k)
    if (p_.task_curvature[k].size() != n || p_.task_center[k].size() != n)
      throw Error("shape: quadratic problem");
}

namespace {

LossGrad quadratic(const std::vector<double>& a, const std::vector<double>& c,
                   const ParamVector& theta) {
  LossGrad out{0.0, theta.zeros_like()};
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double e = theta[j] - c[j];
    out.loss += 0.5 * a[j] * e * e;
    out.grad[j] = a[j] * e;
  }
  return out;
}

}  // namespace

LossGrad QuadraticObjective::task_loss_grad(std::size_t task, const ParamVector& theta) {
  return quadratic(p_.task_curvature.at(task), p_.task_center.at(task), theta);
}

LossGrad QuadraticObjective::validation_loss_grad(const ParamVector& theta) {
  return quadratic(p_.val_curvature, p_.val_center, theta);
}

double QuadraticObjective::validation_loss(const ParamVector& theta) {
  return quadratic(p_.val_curvature, p_.val_center, theta).loss;
}

LinearObjective::LinearObjective(std::vector<std::vector<double>> task_slopes,
                                 std::vector<double> val_slope)
    : slopes_(std::move(task_slopes)), val_(std::move(val_slope)) {
  for (const auto& s : slopes_)
    if (s.size() != val_.size()) throw Error("shape: linear problem");
}

LossGrad LinearObjective::task_loss_grad(std::size_t task, const ParamVector& theta) {
  const auto& a = slopes_.at(task);
  return {linalg::dot(a, theta.values()), ParamVector(theta.layout(), a)};
}

LossGrad LinearObjective::validation_loss_grad(const ParamVector& theta) {
  return {linalg::dot(val_, theta.values()), ParamVector(theta.layout(), val_)};
}

double LinearObjective::validation_loss(const ParamVector& theta) {
  return linalg::dot(val_, theta.values());
}

// ---------------------------------------------------------------------------
// Loop

namespace {

void check_finite(double loss, std::size_t i) {
  if (!std::isfinite(loss)) throw Error("divergence at iteration " + std::to_string(i));
}

void write_trace(std::ostream& os, const DiagRecord& r, const std::string& strategy) {
  nlohmann::ordered_json j;
  j["iteration"] = r.iteration;
  j["strategy"] = strategy;
  for (std::size_t k = 0; k < r.gains.size(); ++k) j["m" + std::to_string(k + 1)] = r.gains[k];
  for (std::size_t k = 0; k < r.weights.size(); ++k)
    j["w" + std::to_string(k + 1)] = r.weights[k];
  j["gamma_hat"] = r.gamma_hat;
  os << j.dump() << '\n';
}

}  // namespace

DescentResult weighted_descent(MultiTaskObjective& obj, ParamVector theta0,
                               const TrainConfig& cfg, std::ostream* weight_trace) {
  if (cfg.strategy == Strategy::kStl)
    throw Error("weighted_descent: single-task learning runs through train()");
  const std::size_t k = obj.num_tasks();
  cfg.validate(k);
  if (cfg.strategy == Strategy::kPcgrad && k < 2) throw Error("pcgrad: requires K >= 2");

  DescentResult res{std::move(theta0), {to_string(cfg.strategy), {}}};
  ParamVector& theta = res.params;
  ParamVector velocity = theta.zeros_like();
  GainSmoother smoother(cfg.ema_beta);
  const std::vector<double> uniform(k, 1.0 / static_cast<double>(k));

  std::vector<std::vector<double>> dwa_history(k);
  std::vector<double> dwa_epoch(k, 0.0);
  std::size_t dwa_count = 0;

  std::optional<ParamVector> prev_val_grad;
  std::size_t prev_recorded = std::numeric_limits<std::size_t>::max();

  if (cfg.checkpoint_every > 0 && !cfg.checkpoint_dir.empty())
    std::filesystem::create_directories(cfg.checkpoint_dir);

  for (std::size_t i = 0; i < cfg.iterations; ++i) {
    obj.prepare(i);
    std::vector<ParamVector> grads;
    std::vector<double> losses;
    grads.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
      LossGrad lg = obj.task_loss_grad(t, theta);
      check_finite(lg.loss, i);
      losses.push_back(lg.loss);
      grads.push_back(std::move(lg.grad));
    }
    const bool record = i % cfg.diag_every == 0 || i + 1 == cfg.iterations;
    const bool need_val = record || cfg.strategy == Strategy::kVamo;
    LossGrad val{0.0, theta.zeros_like()};
    if (need_val) {
      val = obj.validation_loss_grad(theta);
      check_finite(val.loss, i);
    }
    const GradientBundle bundle(std::move(grads), val.grad, i);
    std::vector<double> gains;
    if (need_val) gains = marginal_gains(bundle);

    std::vector<double> weights;
    std::optional<ParamVector> direction;
    switch (cfg.strategy) {
      case Strategy::kVamo:
        weights = vamo_weights(smoother.update(gains), cfg.lambda).weights;
        break;
      case Strategy::kVamoNoVal: {
        ParamVector target = combine(bundle, std::vector<double>(k, 1.0));
        std::vector<double> g;
        for (const auto& tg : bundle.train_grads())
          g.push_back(linalg::dot(target.values(), tg.values()));
        weights = vamo_weights(smoother.update(g), cfg.lambda).weights;
        break;
      }
      case Strategy::kVanilla:
        weights = uniform;
        break;
      case Strategy::kDwa:
        weights = dwa_weights(dwa_history, cfg.dwa_temperature);
        break;
      case Strategy::kPcgrad:
        weights = uniform;
        direction = pcgrad_combine(bundle, sim::mix_seed(cfg.seed, i));
        break;
      case Strategy::kStl:
        break;
    }
    if (!direction) direction = combine(bundle, weights);

    const double eta = cfg.step_size(i);
    const ParamVector* step = &*direction;
    if (cfg.momentum > 0.0) {
      linalg::scale(cfg.momentum, velocity.values());
      linalg::axpy(1.0, direction->values(), velocity.values());
      step = &velocity;
    }
    ParamVector next = theta;
    linalg::axpy(-eta, step->values(), next.values());

    if (record) {
      DiagRecord r;
      r.iteration = i;
      r.eta = eta;
      r.train_loss = losses;
      r.val_loss = val.loss;
      r.val_grad_sq = linalg::squared_norm(val.grad.values());
      r.gains = gains;
      r.weights = weights;
      r.gamma_hat = r.val_grad_sq > 0.0 ? *std::max_element(gains.begin(), gains.end()) /
                                              r.val_grad_sq
                                        : 0.0;
      for (const auto& tg : bundle.train_grads())
        r.max_task_grad_norm =
            std::max(r.max_task_grad_norm, std::sqrt(linalg::squared_norm(tg.values())));
      r.step_norm = eta * std::sqrt(linalg::squared_norm(step->values()));
      if (prev_val_grad && prev_recorded + 1 == i) {
        ParamVector diff = val.grad;
        linalg::axpy(-1.0, prev_val_grad->values(), diff.values());
        r.val_grad_change = std::sqrt(linalg::squared_norm(diff.values()));
      }
      r.predicted_delta = -eta * linalg::dot(val.grad.values(), step->values());
      r.val_loss_after = obj.validation_loss(next);
      r.actual_delta = r.val_loss_after - r.val_loss;
      if (weight_trace) write_trace(*weight_trace, r, res.diagnostics.strategy);
      res.diagnostics.records.push_back(std::move(r));
      prev_val_grad = val.grad;
      prev_recorded = i;
    }
    theta = std::move(next);

    if (cfg.strategy == Strategy::kDwa) {
      for (std::size_t t = 0; t < k; ++t) dwa_epoch[t] += losses[t];
      if (++dwa_count == cfg.dwa_period) {
        for (std::size_t t = 0; t < k; ++t) {
          dwa_history[t].push_back(dwa_epoch[t] / static_cast<double>(cfg.dwa_period));
          dwa_epoch[t] = 0.0;
        }
        dwa_count = 0;
      }
    }
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_dir.empty() &&
        (i + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(cfg.checkpoint_dir + "/iter_" + std::to_string(i + 1) + ".params", theta);
  }
  return res;
}

TrainResult train(const SharedBottomModel& model, const data::BatchSampler& sampler,
                  const TrainConfig& cfg, std::ostream* weight_trace) {
  TrainResult out;
  out.diagnostics.strategy = to_string(cfg.strategy);
  if (cfg.strategy != Strategy::kStl) {
    ModelObjective obj(model, sampler, cfg.batch_size, cfg.seed);
    auto r = weighted_descent(obj, model.params(), cfg, weight_trace);
    out.params.push_back(std::move(r.params));
    out.diagnostics = std::move(r.diagnostics);
    return out;
  }
  TrainConfig single = cfg;
  single.strategy = Strategy::kVanilla;
  for (std::size_t k = 0; k < model.config().num_tasks; ++k) {
    ModelObjective obj(model, sampler, cfg.batch_size, sim::mix_seed(cfg.seed, k), k);
    auto r = weighted_descent(obj, model.params(), single, nullptr);
    out.params.push_back(std::move(r.params));
    for (auto& rec : r.diagnostics.records) {
      rec.task_model = k;
      out.diagnostics.records.push_back(std::move(rec));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checks

double first_order_check(const RunDiagnostics& diag) {
  const auto& r = diag.records;
  if (r.size() < 10) throw Error("first_order_check: need at least 10 records");
  const double n = static_cast<double>(r.size());
  double mx = 0.0, my = 0.0;
  for (const auto& x : r) {
    mx += x.predicted_delta;
    my += x.actual_delta;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& x : r) {
    const double dx = x.predicted_delta - mx, dy = x.actual_delta - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("degenerate correlation");
  return sxy / std::sqrt(sxx * syy);
}

Theorem1Envelope theorem1_envelope(const RunDiagnostics& diag, double l_hat, double g_hat,
                                   double lambda, double eta, double gamma_hat) {
  const auto& r = diag.records;
  if (r.empty()) throw Error("theorem1: no records");
  if (!(gamma_hat > 0.0)) throw Error("Assumption 3 violated; bound inapplicable");
  for (const auto& x : r)
    if (!(x.gamma_hat > 0.0)) throw Error("Assumption 3 violated; bound inapplicable");
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i].iteration != i) throw Error("theorem1: records must cover every iteration");

  const double k = static_cast<double>(r.front().weights.size());
  double min_loss = r.front().val_loss;
  for (const auto& x : r) min_loss = std::min({min_loss, x.val_loss, x.val_loss_after});
  const double gap = r.front().val_loss - min_loss;
  const double floors = lambda * std::log(k) / gamma_hat +
                        l_hat * g_hat * g_hat * eta / (2.0 * gamma_hat);

  Theorem1Envelope env;
  env.holds = true;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    sum += r[i].val_grad_sq;
    const double n = static_cast<double>(i + 1);
    const double bound = gap / (eta * gamma_hat * n) + floors;
    if (env.holds && sum / n > bound) {
      env.holds = false;
      env.first_violation = i + 1;
    }
    env.bound = bound;
    env.average = sum / n;
  }
  return env;
}

EmpiricalConstants estimate_constants(const RunDiagnostics& diag) {
  EmpiricalConstants c;
  c.gamma_hat = std::numeric_limits<double>::infinity();
  const auto& r = diag.records;
  for (std::size_t i = 0; i < r.size(); ++i) {
    c.g_hat = std::max(c.g_hat, r[i].max_task_grad_norm);
    c.gamma_hat = std::min(c.gamma_hat, r[i].gamma_hat);
    if (i > 0 && r[i].val_grad_change >= 0.0 && r[i - 1].iteration + 1 == r[i].iteration &&
        r[i - 1].step_norm > 0.0)
      c.l_hat = std::max(c.l_hat, r[i].val_grad_change / r[i - 1].step_norm);
  }
  if (r.empty()) c.gamma_hat = 0.0;
  return c;
}

void write_diagnostics(std::ostream& os, const RunDiagnostics& diag) {
  for (const auto& r : diag.records) {
    nlohmann::ordered_json j;
    j["iteration"] = r.iteration;
    j["task_model"] = r.task_model;
    j["eta"] = r.eta;
    j["train_loss"] = r.train_loss;
    j["val_loss"] = r.val_loss;
    j["val_loss_after"] = r.val_loss_after;
    j["val_grad_sq"] = r.val_grad_sq;
    j["gains"] = r.gains;
    j["weights"] = r.weights;
    j["gamma_hat"] = r.gamma_hat;
    j["max_task_grad_norm"] = r.max_task_grad_norm;
    j["step_norm"] = r.step_norm;
    j["val_grad_change"] = r.val_grad_change;
    j["predicted_delta"] = r.predicted_delta;
    j["actual_delta"] = r.actual_delta;
    os << j.dump() << '\n';
  }
}

}  // namespace vamo
