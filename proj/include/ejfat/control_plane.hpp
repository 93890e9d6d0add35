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

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ejfat/calendar.hpp"
#include "ejfat/error.hpp"
#include "ejfat/prefix_range.hpp"
#include "ejfat/snapshot.hpp"
#include "ejfat/tables.hpp"

namespace ejfat {

/// One compute node as the control plane sees it.
struct MemberSpec {
  MemberId member = 0;
  std::optional<IpAddress> cn_ipv4;
  std::optional<IpAddress> cn_ipv6;
  MacAddress next_hop_mac;
  std::uint16_t udp_base_port = 0;
  std::uint8_t entropy_bits = 0;
  double weight = 1.0;

  std::optional<IpAddress> address(AddressFamily f) const {
    return f == AddressFamily::V4 ? cn_ipv4 : cn_ipv6;
  }

  MemberRewrite rewrite(AddressFamily f) const {
    return MemberRewrite{next_hop_mac, *address(f), udp_base_port, entropy_bits};
  }

  friend bool operator==(const MemberSpec&, const MemberSpec&) = default;
};

/// A complete description of the next epoch of one instance. When
/// `calendar` is empty it is built from the member weights.
struct EpochPlan {
  InstanceId instance = 0;
  EpochId epoch = 0;
  std::uint64_t boundary_event = 0;
  std::vector<MemberSpec> members;
  std::optional<Calendar> calendar;

  friend bool operator==(const EpochPlan&, const EpochPlan&) = default;
};

/// Receives every intermediate snapshot of a multi-step table change.
using Publisher = std::function<void(const PipelineTables&)>;

namespace detail {

inline void check_instance(InstanceId inst) {
  if (inst >= kMaxInstances) throw Error(ErrorCode::UnknownInstance, std::to_string(inst));
}

inline std::set<MemberId> members_in_use(const PipelineTables& t, InstanceId inst) {
  std::set<MemberId> out;
  for (const auto& [key, cal] : t.calendars)
    if (key.instance == inst)
      for (const auto& [m, n] : cal.histogram()) out.insert(m);
  return out;
}

inline Calendar resolve_calendar(const EpochPlan& plan) {
  if (plan.calendar) {
    if (!plan.calendar->complete())
      throw Error(ErrorCode::IncompleteCalendar, "plan calendar has empty slots");
    return *plan.calendar;
  }
  std::vector<WeightedMember> weighted;
  weighted.reserve(plan.members.size());
  for (const auto& m : plan.members) weighted.push_back({m.member, m.weight});
  return build_calendar(weighted);
}

/// Member rewrite entries for a plan, checked against what is already live.
inline std::map<MemberKey, MemberRewrite> plan_rewrites(const EpochPlan& plan, const Calendar& cal,
                                                        const PipelineTables& live) {
  const auto families = live.accepted_families(plan.instance);
  const auto in_use = members_in_use(live, plan.instance);
  std::map<MemberId, const MemberSpec*> by_id;
  for (const auto& m : plan.members) {
    if (m.member == kNoMember) throw Error(ErrorCode::InvalidMember, "reserved member id");
    if (!by_id.emplace(m.member, &m).second)
      throw Error(ErrorCode::InvalidMember, "duplicate member " + std::to_string(m.member));
    if (!m.cn_ipv4 && !m.cn_ipv6)
      throw Error(ErrorCode::InvalidMember, "member " + std::to_string(m.member) + " has no address");
    if ((m.cn_ipv4 && !m.cn_ipv4->is_v4()) || (m.cn_ipv6 && !m.cn_ipv6->is_v6()))
      throw Error(ErrorCode::InvalidMember, "member " + std::to_string(m.member) + " address family");
  }

  std::map<MemberKey, MemberRewrite> out;
  for (const auto& [member, n] : cal.histogram()) {
    auto it = by_id.find(member);
    if (it == by_id.end())
      throw Error(ErrorCode::MissingRewrite, "calendar member " + std::to_string(member) + " not in plan");
    const MemberSpec& spec = *it->second;
    for (AddressFamily f : families)
      if (!spec.address(f))
        throw Error(ErrorCode::MissingRewrite,
                    "member " + std::to_string(member) + " lacks an address for an accepted family");
    for (AddressFamily f : {AddressFamily::V4, AddressFamily::V6}) {
      if (!spec.address(f)) continue;
      MemberRewrite rw = spec.rewrite(f);
      if (!rw.port_range_valid())
        throw Error(ErrorCode::InvalidMember, "member " + std::to_string(member) + " port range overflows");
      MemberKey key{plan.instance, f, member};
      const MemberRewrite* existing = live.find_member(plan.instance, f, member);
      if (existing && !(*existing == rw) && in_use.count(member))
        throw Error(ErrorCode::MemberInUse,
                    "member " + std::to_string(member) + " is referenced by a live calendar");
      out.emplace(key, rw);
    }
  }
  return out;
}

}  // namespace detail

/// Installs L2/L3 filter entries for one balancer identity on an instance.
/// Socket-level receivers only need the L3 entries; the L2 ones are used in
/// frame-level operation.
inline void add_lb_address(PipelineTables& t, InstanceId inst, const IpAddress& lb_ip,
                           std::optional<MacAddress> lb_mac = std::nullopt) {
  detail::check_instance(inst);
  t.l3_filter[L3Key{std::nullopt, ethertype_of(lb_ip.family()), lb_ip}] = L3Value{lb_ip, inst};
  if (lb_mac) {
    t.l2_filter[L2Key{std::nullopt, *lb_mac}] = L2Value{*lb_mac};
    t.l2_filter[L2Key{std::nullopt, MacAddress::broadcast()}] = L2Value{*lb_mac};
  }
}

/// Brings a new epoch into service.
///
/// On an instance with no epochs yet, the plan becomes the first epoch and
/// covers the whole event space. Otherwise the tables are built from the end
/// of the pipeline toward the start, each step published separately:
///   1. member rewrite entries,
///   2. the new calendar,
///   3. prefixes pinning [current start, boundary) to the current epoch,
///   4. the wildcard entry repointed at the new epoch.
/// Every step is validated before the first is published, so a rejected plan
/// leaves the live tables untouched. Returns the final snapshot.
inline PipelineTables activate_epoch(const EpochPlan& plan, const PipelineTables& live,
                                     const Publisher& publish = {}) {
  detail::check_instance(plan.instance);
  const InstanceId inst = plan.instance;
  const auto& cursor = live.cursors[inst];

  if (cursor && plan.epoch < cursor->next_free)
    throw Error(ErrorCode::EpochReuse, "epoch " + std::to_string(plan.epoch));
  if (live.find_calendar(inst, plan.epoch))
    throw Error(ErrorCode::EpochReuse, "epoch " + std::to_string(plan.epoch) + " has a calendar");
  if (cursor && plan.boundary_event <= cursor->current_start)
    throw Error(ErrorCode::BoundaryNotFuture,
                "boundary " + std::to_string(plan.boundary_event) + " <= current epoch start " +
                    std::to_string(cursor->current_start));
  if (plan.epoch == kNoMember) throw Error(ErrorCode::EpochReuse, "reserved epoch id");

  const Calendar cal = detail::resolve_calendar(plan);
  const auto rewrites = detail::plan_rewrites(plan, cal, live);

  std::vector<PipelineTables> steps;
  PipelineTables t = live;
  for (const auto& [k, rw] : rewrites) t.members[k] = rw;
  steps.push_back(t);

  t.calendars[CalendarKey{inst, plan.epoch}] = cal;
  steps.push_back(t);

  if (cursor) {
    for (const auto& p : range_to_prefixes<std::uint64_t>(cursor->current_start, plan.boundary_event))
      t.epoch_assignment[inst].insert(p, cursor->current);
    steps.push_back(t);
  }

  t.epoch_assignment[inst].insert(EpochPrefix{0, 0}, plan.epoch);
  t.cursors[inst] = EpochCursor{plan.epoch, cursor ? plan.boundary_event : 0, plan.epoch + 1};
  steps.push_back(t);

  for (const auto& s : steps) validate_tables(s);
  if (publish)
    for (const auto& s : steps) publish(s);
  return t;
}

/// Removes an epoch that no longer receives events: its pinned prefixes,
/// then its calendar, then member rewrites no remaining calendar uses.
inline PipelineTables cleanup_epoch(InstanceId inst, EpochId old_epoch, const PipelineTables& live,
                                    const Publisher& publish = {}) {
  detail::check_instance(inst);
  const auto& cursor = live.cursors[inst];
  if (cursor && cursor->current == old_epoch)
    throw Error(ErrorCode::EpochStillCurrent, "epoch " + std::to_string(old_epoch));
  if (!live.find_calendar(inst, old_epoch))
    throw Error(ErrorCode::UnknownEpoch, "epoch " + std::to_string(old_epoch));

  std::vector<PipelineTables> steps;
  PipelineTables t = live;
  t.epoch_assignment[inst].erase_if([&](EpochId e) { return e == old_epoch; });
  steps.push_back(t);

  t.calendars.erase(CalendarKey{inst, old_epoch});
  steps.push_back(t);

  const auto in_use = detail::members_in_use(t, inst);
  std::erase_if(t.members, [&](const auto& kv) {
    return kv.first.instance == inst && !in_use.count(kv.first.member);
  });
  steps.push_back(t);

  for (const auto& s : steps) validate_tables(s);
  if (publish)
    for (const auto& s : steps) publish(s);
  return t;
}

using MonoTime = std::chrono::steady_clock::time_point;

struct FeedbackReport {
  MemberId member = 0;
  double fill_level = 0.0;
  MonoTime timestamp{};
};

struct FeedbackParams {
  double epsilon = 0.01;
  double alpha = 0.5;
  std::chrono::nanoseconds staleness = std::chrono::seconds(5);
};

/// New member weights from compute-node fill levels.
///
/// The target weight is max(epsilon, 1 - fill); it is blended with the prior
/// weight as alpha * target + (1 - alpha) * prior. Weights are on the scale
/// where an idle node has weight 1. Members whose newest report is older than
/// the staleness window, or who have no report, keep their prior weight.
inline std::vector<WeightedMember> recompute_weights(const std::vector<FeedbackReport>& reports,
                                                     const std::vector<MemberSpec>& current,
                                                     const FeedbackParams& params, MonoTime now) {
  std::map<MemberId, const FeedbackReport*> newest;
  for (const auto& r : reports) {
    auto known = std::find_if(current.begin(), current.end(),
                              [&](const MemberSpec& m) { return m.member == r.member; });
    if (known == current.end()) throw Error(ErrorCode::UnknownMember, std::to_string(r.member));
    if (!(r.fill_level >= 0.0 && r.fill_level <= 1.0))
      throw Error(ErrorCode::InvalidWeight, "fill level outside [0,1]");
    auto& slot = newest[r.member];
    if (!slot || r.timestamp > slot->timestamp) slot = &r;
  }

  std::vector<WeightedMember> out;
  out.reserve(current.size());
  for (const auto& m : current) {
    double w = m.weight;
    auto it = newest.find(m.member);
    if (it != newest.end() && now - it->second->timestamp <= params.staleness) {
      const double target = std::max(params.epsilon, 1.0 - it->second->fill_level);
      w = params.alpha * target + (1.0 - params.alpha) * m.weight;
    }
    out.push_back({m.member, std::max(params.epsilon, w)});
  }
  return out;
}

/// Serial owner of the live configuration. Each mutation produces fresh
/// snapshots and hands them to the holder; packet workers read the holder.
/// Not thread safe: callers serialize access.
class ControlPlane {
 public:
  explicit ControlPlane(SnapshotHolder<PipelineTables>& holder) : holder_(holder), live_(*holder.get()) {}

  const PipelineTables& tables() const noexcept { return live_; }

  /// Replaces the whole configuration, for example after loading persisted
  /// state. The new tables must validate.
  void reset(PipelineTables t, std::map<InstanceId, std::vector<MemberSpec>> registry = {}) {
    validate_tables(t);
    live_ = std::move(t);
    registry_ = std::move(registry);
    holder_.publish(live_);
  }

  /// Mutates the filter tables (initialization only; they do not take part
  /// in epochs).
  void configure_filters(const std::function<void(PipelineTables&)>& edit) {
    PipelineTables t = live_;
    edit(t);
    validate_tables(t);
    live_ = std::move(t);
    holder_.publish(live_);
  }

  EpochId allocate_epoch(InstanceId inst) const {
    detail::check_instance(inst);
    const auto& c = live_.cursors[inst];
    return c ? c->next_free : 0;
  }

  std::optional<EpochCursor> cursor(InstanceId inst) const {
    detail::check_instance(inst);
    return live_.cursors[inst];
  }

  const PipelineTables& activate(const EpochPlan& plan) {
    live_ = activate_epoch(plan, live_, [this](const PipelineTables& s) { holder_.publish(s); });
    registry_[plan.instance] = plan.members;
    return live_;
  }

  const PipelineTables& cleanup(InstanceId inst, EpochId epoch) {
    live_ = cleanup_epoch(inst, epoch, live_, [this](const PipelineTables& s) { holder_.publish(s); });
    return live_;
  }

  /// Epochs of an instance other than the current one that still have a
  /// calendar installed.
  std::vector<EpochId> retired_epochs(InstanceId inst) const {
    std::vector<EpochId> out;
    const auto& c = live_.cursors[inst];
    for (const auto& [key, cal] : live_.calendars)
      if (key.instance == inst && (!c || key.epoch != c->current)) out.push_back(key.epoch);
    return out;
  }

  /// Members of the current epoch of an instance, with their weights.
  const std::vector<MemberSpec>& members(InstanceId inst) const {
    static const std::vector<MemberSpec> none;
    auto it = registry_.find(inst);
    return it == registry_.end() ? none : it->second;
  }

  const std::map<InstanceId, std::vector<MemberSpec>>& registry() const noexcept { return registry_; }

  void submit_feedback(InstanceId inst, const FeedbackReport& r) {
    const auto& m = members(inst);
    if (std::none_of(m.begin(), m.end(), [&](const MemberSpec& s) { return s.member == r.member; }))
      throw Error(ErrorCode::UnknownMember, std::to_string(r.member));
    if (!(r.fill_level >= 0.0 && r.fill_level <= 1.0))
      throw Error(ErrorCode::InvalidWeight, "fill level outside [0,1]");
    feedback_[inst].push_back(r);
  }

  /// Builds the plan for the next epoch of `inst` with weights recomputed
  /// from the feedback received so far. Consumed reports are dropped.
  EpochPlan plan_from_feedback(InstanceId inst, std::uint64_t boundary, const FeedbackParams& params,
                               MonoTime now) {
    const auto& current = members(inst);
    if (current.empty()) throw Error(ErrorCode::EmptyMemberSet, "instance has no members");
    auto weights = recompute_weights(feedback_[inst], current, params, now);
    feedback_[inst].clear();
    EpochPlan plan{inst, allocate_epoch(inst), boundary, current, std::nullopt};
    for (std::size_t i = 0; i < plan.members.size(); ++i) plan.members[i].weight = weights[i].weight;
    return plan;
  }

 private:
  SnapshotHolder<PipelineTables>& holder_;
  PipelineTables live_;
  std::map<InstanceId, std::vector<MemberSpec>> registry_;
  std::map<InstanceId, std::vector<FeedbackReport>> feedback_;
};

}  // namespace ejfat
