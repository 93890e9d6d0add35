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

#include <stdexcept>
#include <string>
#include <string_view>

namespace ejfat {

// Control-plane and configuration failures. Per-packet problems are never
// raised as exceptions; they come back as DiscardReason values.
enum class ErrorCode {
  EmptyMemberSet,
  TooManyMembers,
  InvalidWeight,
  EmptyRange,
  EpochReuse,
  IncompleteCalendar,
  BoundaryNotFuture,
  EpochStillCurrent,
  UnknownEpoch,
  UnknownMember,
  UnknownInstance,
  MemberInUse,
  MissingRewrite,
  InvalidMember,
  BundleTooLarge,
  ConfigInvalid,
  BindFailure,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyMemberSet: return "EmptyMemberSet";
    case ErrorCode::TooManyMembers: return "TooManyMembers";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::EpochReuse: return "EpochReuse";
    case ErrorCode::IncompleteCalendar: return "IncompleteCalendar";
    case ErrorCode::BoundaryNotFuture: return "BoundaryNotFuture";
    case ErrorCode::EpochStillCurrent: return "EpochStillCurrent";
    case ErrorCode::UnknownEpoch: return "UnknownEpoch";
    case ErrorCode::UnknownMember: return "UnknownMember";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::MemberInUse: return "MemberInUse";
    case ErrorCode::MissingRewrite: return "MissingRewrite";
    case ErrorCode::InvalidMember: return "InvalidMember";
    case ErrorCode::BundleTooLarge: return "BundleTooLarge";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BindFailure: return "BindFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ejfat
