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
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vamo {

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;

  std::size_t size() const;
  bool operator==(const TensorSpec&) const = default;
};

using Layout = std::vector<TensorSpec>;

// "name:AxB,name:C": the checkpoint header form.
std::string format_layout(const Layout& layout);
Layout parse_layout(std::string_view header);

// Flat parameter (or gradient) storage plus the layout that maps it onto model
// tensors. Copies share the immutable layout.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Layout layout);
  ParamVector(Layout layout, std::vector<double> values);

  const Layout& layout() const { return info_->layout; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Offset of a named tensor within values(); throws if absent.
  std::size_t offset_of(std::string_view name) const;
  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;

  bool same_layout(const ParamVector& other) const;
  // A zero vector with this layout.
  ParamVector zeros_like() const;

  bool operator==(const ParamVector& other) const;

 private:
  struct LayoutInfo {
    Layout layout;
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
  };
  static std::shared_ptr<const LayoutInfo> make_info(Layout layout);

  std::shared_ptr<const LayoutInfo> info_ = make_info({});
  std::vector<double> values_;
};

// Checkpoint: layout header line, then one value per line at round-trip
// precision.
void write_checkpoint(std::ostream& os, const ParamVector& params);
ParamVector read_checkpoint(std::istream& is);
void save_checkpoint(const std::string& path, const ParamVector& params);
ParamVector load_checkpoint(const std::string& path);

}  // namespace vamo
