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

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "vamo/config.hpp"

using namespace vamo;

namespace {

std::string render(const eval::BenchConfig& c) {
  std::ostringstream os;
  write_config(os, c);
  return os.str();
}

eval::BenchConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace

TEST_CASE("configuration round trip") {
  const eval::BenchConfig defaults;
  const auto text = render(defaults);
  CHECK(render(parse(text)) == text);
  CHECK(render(parse("")) == text);

  eval::BenchConfig c;
  c.train.eta = 0.1 + 0.2;  // needs all 17 digits
  c.train.schedule = Schedule::kRobbinsMonro;
  c.lambdas = {0.1, 1.0, 10.0};
  c.seeds = {4, 5};
  c.temporal_ablation = true;
  c.encoder_widths = {16, 8, 4};
  c.head_widths = {};
  c.env.tasks.resize(2);
  c.counts = {5, 6};
  const auto back = parse(render(c));
  CHECK(back.train.eta == c.train.eta);
  CHECK(back.train.schedule == Schedule::kRobbinsMonro);
  CHECK(back.lambdas == c.lambdas);
  CHECK(back.seeds == c.seeds);
  CHECK(back.temporal_ablation);
  CHECK(back.encoder_widths == c.encoder_widths);
  CHECK(back.head_widths.empty());
  CHECK(back.env.hash() == c.env.hash());
  CHECK(render(back) == render(c));
}

TEST_CASE("shipped default config matches the built-in defaults") {
  std::ifstream in(std::string(VAMO_SOURCE_DIR) + "/configs/default.ini");
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  CHECK(render(parse(os.str())) == render(eval::BenchConfig{}));
}

TEST_CASE("partial configs override single fields") {
  const auto c = parse("[train]\niterations = 7\nstrategy = dwa\n\n[data]\ndays = 5\n");
  CHECK(c.train.iterations == 7);
  CHECK(c.train.strategy == Strategy::kDwa);
  CHECK(c.days == 5);
  CHECK(c.counts == eval::BenchConfig{}.counts);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse("[train]\nitertions = 7\n"), Error);
  CHECK_THROWS_AS(parse("[trainer]\niterations = 7\n"), Error);
  CHECK_THROWS_AS(parse("[train]\niterations = seven\n"), Error);
  CHECK_THROWS_AS(parse("[train]\neta = -1\n"), Error);
  CHECK_THROWS_AS(parse("[train]\nschedule = cosine\n"), Error);
  CHECK_THROWS_WITH_AS(parse("[train]\nstrategy = vanilla\nlambda = 2\n"),
                       doctest::Contains("lambda applies only to vamo"), Error);
  CHECK_NOTHROW(parse("[train]\nstrategy = vamo_noval\nlambda = 2\n"));
  CHECK_THROWS_AS(parse("[env]\ntasks = 2\n"), Error);  // counts still lists three tasks
  CHECK_THROWS_AS(parse("[task.5]\nbudget = 3\n"), Error);
  CHECK_THROWS_AS(parse("[bench]\nstrategies = vamo,stl\n"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/vamo.ini"), Error);
}
