/* Copyright 2026-present The ejfat-lb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <random>

#include "ejfat/json.hpp"
#include "fixtures.hpp"

using namespace ejfat;
using namespace ejfat::testing;

TEST(Json, TablesRoundTripAfterReconfiguration) {
  // Property: serialising any reachable table state and loading it back
  // yields an identical snapshot.
  std::mt19937 rng(3);
  auto t = single_epoch({member(0), member(1, 2.0)});
  std::uint64_t boundary = 0;
  for (EpochId e = 1; e < 6; ++e) {
    boundary += 1 + rng() % 100000;
    std::vector<MemberSpec> ms;
    for (MemberId m = 0; m < 8; ++m)
      if (rng() % 2) ms.push_back(member(m, 1.0 + rng() % 4));
    if (ms.empty()) ms.push_back(member(3));
    t = activate_epoch(EpochPlan{0, e, boundary, ms, std::nullopt}, t);
    if (rng() % 2) t = cleanup_epoch(0, t.cursors[0]->current - 1, t);
    auto text = tables_to_json(t).dump();
    ASSERT_EQ(tables_from_json(Json::parse(text)), t);
  }
}

TEST(Json, EpochPlanRoundTrip) {
  EpochPlan p{2, 9, 123456789012ull, {member(1), member(2, 2.5)}, std::nullopt};
  EXPECT_EQ(epoch_plan_from_json(epoch_plan_to_json(p)), p);
  p.calendar = build_calendar(std::vector<WeightedMember>{{1, 1}, {2, 3}});
  EXPECT_EQ(epoch_plan_from_json(epoch_plan_to_json(p)), p);
}

TEST(Json, ShortCalendarIsIncomplete) {
  Json j = epoch_plan_to_json(EpochPlan{0, 1, 5, {member(1)}, std::nullopt});
  j["calendar"] = Json::array({1, 1, 1});
  try {
    epoch_plan_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteCalendar);
  }
}

TEST(Json, BadFieldsAreConfigErrors) {
  EXPECT_THROW(epoch_plan_from_json(Json::parse(R"({"epoch": 1, "members": [{"member": 1}]})")), Error);
  EXPECT_THROW(epoch_plan_from_json(Json::parse(R"({"instance": 7, "epoch": 1})")), Error);
  EXPECT_THROW(member_spec_from_json(Json::parse(R"({"member": 1, "udp_base_port": 10, "cn_ipv4": "nope"})")),
               Error);
}
