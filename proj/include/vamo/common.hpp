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

#include <stdexcept>
#include <string>

namespace vamo {

// All recoverable failures surface as vamo::Error; the message carries the
// short reason string callers match on ("shape", "unknown task", ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Selects the serial reference kernel or the OpenMP one. Both produce
// bit-identical results; the serial path is kept for tests and benchmarks.
enum class Exec { kSerial, kParallel };

}  // namespace vamo
