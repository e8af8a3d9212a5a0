// Copyright 2026 The owrlab authors.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "owrlab/schedule.hpp"

using namespace owrlab;

namespace {

ClassSet iota_classes(std::uint16_t n) {
  ClassSet out;
  for (std::uint16_t i = 0; i < n; ++i) out.push_back(i);
  return out;
}

void check_disjoint_and_coverage(const EpisodeSchedule& s, std::size_t total,
                                 std::size_t expected_known) {
  std::set<std::uint16_t> seen(s.base_classes.begin(), s.base_classes.end());
  std::size_t count = s.base_classes.size();
  for (const auto& step : s.incremental_steps) {
    for (std::uint16_t c : step) {
      CHECK(seen.insert(c).second);  // disjoint from everything before
      ++count;
    }
  }
  CHECK(count == expected_known);
  for (std::uint16_t c : s.unknown_classes) CHECK(seen.insert(c).second);
  CHECK(seen.size() == total);
}

}  // namespace

TEST_CASE("build_schedule: the 51-class split") {
  auto s = build_schedule(iota_classes(51), 26.0 / 51.0, 11, 5, 1);
  CHECK(s.base_classes.size() == 11);
  REQUIRE(s.incremental_steps.size() == 3);
  for (const auto& st : s.incremental_steps) CHECK(st.size() == 5);
  CHECK(s.unknown_classes.size() == 25);
  check_disjoint_and_coverage(s, 51, 26);
}

TEST_CASE("build_schedule: the default desk-scale split") {
  auto s = build_schedule(iota_classes(20), 0.5, 4, 2, 9);
  CHECK(s.base_classes.size() == 4);
  REQUIRE(s.incremental_steps.size() == 3);
  for (const auto& st : s.incremental_steps) CHECK(st.size() == 2);
  CHECK(s.unknown_classes.size() == 10);
  check_disjoint_and_coverage(s, 20, 10);
}

TEST_CASE("build_schedule: closed-world edge with no incremental steps") {
  auto s = build_schedule(iota_classes(8), 0.5, 4, 0, 2);
  CHECK(s.base_classes.size() == 4);
  CHECK(s.incremental_steps.empty());
  CHECK(s.unknown_classes.size() == 4);
}

TEST_CASE("build_schedule: infeasible arithmetic lists valid pairs") {
  CHECK_THROWS_WITH_AS(build_schedule(iota_classes(20), 0.5, 5, 2, 0),
                       doctest::Contains("valid (base_count, step_size)"),
                       ConfigError);
}

TEST_CASE("build_schedule: deterministic per seed") {
  auto a = build_schedule(iota_classes(20), 0.5, 4, 2, 33);
  auto b = build_schedule(iota_classes(20), 0.5, 4, 2, 33);
  CHECK(a.base_classes == b.base_classes);
  CHECK(a.incremental_steps == b.incremental_steps);
  CHECK(a.unknown_classes == b.unknown_classes);
  auto c = build_schedule(iota_classes(20), 0.5, 4, 2, 34);
  CHECK(a.base_classes != c.base_classes);
}

TEST_CASE("build_validation_splits: the 11-base worked example") {
  auto trials = build_validation_splits(iota_classes(11), 1, 5);
  REQUIRE(trials.size() == 3);  // three cardinality variants per trial
  for (const auto& t : trials) {
    CHECK(t.val_unknown_classes.size() == 2);
    CHECK(t.val_base_classes.size() == 5);
    std::size_t m = 0;
    for (const auto& st : t.val_incremental_steps) m += st.size();
    CHECK(m == 4);
  }
  // 4 steps of 1, then 2 steps of 2, then 1 step of 4.
  CHECK(trials[0].val_incremental_steps.size() == 4);
  for (const auto& st : trials[0].val_incremental_steps) CHECK(st.size() == 1);
  REQUIRE(trials[1].val_incremental_steps.size() == 2);
  CHECK(trials[1].val_incremental_steps[0].size() == 2);
  CHECK(trials[1].val_incremental_steps[1].size() == 2);
  REQUIRE(trials[2].val_incremental_steps.size() == 1);
  CHECK(trials[2].val_incremental_steps[0].size() == 4);
}

TEST_CASE("build_validation_splits: the 6-base arithmetic") {
  auto trials = build_validation_splits(iota_classes(6), 1, 5);
  REQUIRE(trials.size() == 3);
  for (const auto& t : trials) {
    CHECK(t.val_unknown_classes.size() == 1);
    CHECK(t.val_base_classes.size() == 3);
  }
  CHECK(trials[0].val_incremental_steps.size() == 2);   // 2 steps of 1
  CHECK(trials[1].val_incremental_steps.size() == 2);   // ceil/floor of 2 -> 1, 1
  CHECK(trials[1].val_incremental_steps[0].size() == 1);
  REQUIRE(trials[2].val_incremental_steps.size() == 1);  // 1 step of 2
  CHECK(trials[2].val_incremental_steps[0].size() == 2);
}

TEST_CASE("build_validation_splits: deterministic, distinct trials, errors") {
  auto a = build_validation_splits(iota_classes(11), 3, 21);
  auto b = build_validation_splits(iota_classes(11), 3, 21);
  REQUIRE(a.size() == 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].val_base_classes == b[i].val_base_classes);
    CHECK(a[i].val_unknown_classes == b[i].val_unknown_classes);
    CHECK(a[i].trial_seed == b[i].trial_seed);
  }
  CHECK(a[0].val_unknown_classes != a[3].val_unknown_classes);

  CHECK_THROWS_AS(build_validation_splits(iota_classes(5), 2, 1), ConfigError);
}

TEST_CASE("build_validation_splits: groups stay disjoint and inside the base") {
  for (std::uint16_t n : {6, 9, 11, 16}) {
    auto trials = build_validation_splits(iota_classes(n), 2, n);
    for (const auto& t : trials) {
      std::set<std::uint16_t> seen;
      for (std::uint16_t c : t.val_base_classes) CHECK(seen.insert(c).second);
      for (const auto& st : t.val_incremental_steps) {
        CHECK_FALSE(st.empty());
        for (std::uint16_t c : st) CHECK(seen.insert(c).second);
      }
      for (std::uint16_t c : t.val_unknown_classes) CHECK(seen.insert(c).second);
      CHECK(seen.size() == n);
      for (std::uint16_t c : seen) CHECK(c < n);
    }
  }
}
