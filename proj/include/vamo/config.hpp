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

#include <iosfwd>
#include <string>

#include "vamo/eval.hpp"

namespace vamo {

// Experiment configuration in INI form. Sections:
//   [env]       steps_per_day, fundamental_period, harmonic_period,
//               harmonic_amplitude, price_value_corr, drift, volume_jitter,
//               drift_seed, discount, tasks (count; replaces the default
//               profile when given)
//   [task.N]    one TaskProfile per task index N (0-based)
//   [data]      days, counts (comma list), seed
//   [behavior]  base_scale (comma list), pacing_gain, episode_sigma, step_sigma
//   [features]  window, history, k_top
//   [model]     encoder_widths, head_widths (comma lists), activation, use_temporal
//   [train]     iterations, eta, schedule, lambda, strategy, batch_size, seed,
//               ema_beta, momentum, dwa_temperature, dwa_period, diag_every,
//               checkpoint_every, checkpoint_dir
//   [bench]     strategies, lambdas, seeds (comma lists), temporal_ablation,
//               eval_episodes
// Unknown sections or keys are errors. Setting lambda together with a
// strategy that ignores it is an error.
eval::BenchConfig parse_config(std::istream& is);
eval::BenchConfig load_config(const std::string& path);

// Round-trippable INI rendering of every field.
void write_config(std::ostream& os, const eval::BenchConfig& cfg);

}  // namespace vamo
