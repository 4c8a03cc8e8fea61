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

#include "vamo/param_vector.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "vamo/common.hpp"

namespace vamo {

std::size_t TensorSpec::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string format_layout(const Layout& layout) {
  std::string out;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (i) out += ',';
    out += layout[i].name;
    out += ':';
    for (std::size_t d = 0; d < layout[i].shape.size(); ++d) {
      if (d) out += 'x';
      out += std::to_string(layout[i].shape[d]);
    }
  }
  return out;
}

Layout parse_layout(std::string_view header) {
  Layout layout;
  if (header.empty()) return layout;
  std::size_t pos = 0;
  while (pos <= header.size()) {
    std::size_t comma = header.find(',', pos);
    if (comma == std::string_view::npos) comma = header.size();
    std::string_view entry = header.substr(pos, comma - pos);
    std::size_t colon = entry.rfind(':');
    if (colon == std::string_view::npos || colon == 0)
      throw Error("layout: malformed entry '" + std::string(entry) + "'");
    TensorSpec spec;
    spec.name = std::string(entry.substr(0, colon));
    std::string_view dims = entry.substr(colon + 1);
    std::size_t dpos = 0;
    while (dpos <= dims.size()) {
      std::size_t x = dims.find('x', dpos);
      if (x == std::string_view::npos) x = dims.size();
      std::size_t value = 0;
      auto tok = dims.substr(dpos, x - dpos);
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw Error("layout: bad dimension in '" + std::string(entry) + "'");
      spec.shape.push_back(value);
      dpos = x + 1;
    }
    layout.push_back(std::move(spec));
    pos = comma + 1;
  }
  return layout;
}

std::shared_ptr<const ParamVector::LayoutInfo> ParamVector::make_info(Layout layout) {
  auto info = std::make_shared<LayoutInfo>();
  info->offsets.reserve(layout.size());
  for (const auto& t : layout) {
    info->offsets.push_back(info->total);
    info->total += t.size();
  }
  info->layout = std::move(layout);
  return info;
}

ParamVector::ParamVector(Layout layout)
    : info_(make_info(std::move(layout))), values_(info_->total, 0.0) {}

ParamVector::ParamVector(Layout layout, std::vector<double> values)
    : info_(make_info(std::move(layout))), values_(std::move(values)) {
  if (values_.size() != info_->total)
    throw Error("shape: " + std::to_string(values_.size()) +
                " values for a layout of " + std::to_string(info_->total));
}

std::size_t ParamVector::offset_of(std::string_view name) const {
  const auto& layout = info_->layout;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].name == name) return info_->offsets[i];
  throw Error("layout: no tensor named '" + std::string(name) + "'");
}

std::span<double> ParamVector::tensor(std::string_view name) {
  const auto& layout = info_->layout;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].name == name)
      return std::span<double>(values_).subspan(info_->offsets[i], layout[i].size());
  throw Error("layout: no tensor named '" + std::string(name) + "'");
}

std::span<const double> ParamVector::tensor(std::string_view name) const {
  return const_cast<ParamVector*>(this)->tensor(name);
}

bool ParamVector::same_layout(const ParamVector& other) const {
  return info_ == other.info_ || info_->layout == other.info_->layout;
}

ParamVector ParamVector::zeros_like() const {
  ParamVector out;
  out.info_ = info_;
  out.values_.assign(values_.size(), 0.0);
  return out;
}

bool ParamVector::operator==(const ParamVector& other) const {
  return same_layout(other) && values_ == other.values_;
}

void write_checkpoint(std::ostream& os, const ParamVector& params) {
  os << format_layout(params.layout()) << '\n';
  char buf[32];
  for (double v : params.values()) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << '\n';
  }
}

ParamVector read_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("checkpoint: missing layout header");
  Layout layout = parse_layout(line);
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw Error("checkpoint: bad value '" + line + "'");
    values.push_back(v);
  }
  return ParamVector(std::move(layout), std::move(values));
}

void save_checkpoint(const std::string& path, const ParamVector& params) {
  std::ofstream os(path);
  if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
  write_checkpoint(os, params);
}

ParamVector load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("checkpoint: cannot open '" + path + "'");
  return read_checkpoint(is);
}

}  // namespace vamo
