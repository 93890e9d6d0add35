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

#include <arpa/inet.h>

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace ejfat {

enum class AddressFamily : std::uint8_t { V4, V6 };

inline constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr std::uint16_t kEthertypeIpv6 = 0x86dd;

constexpr std::uint16_t ethertype_of(AddressFamily f) noexcept {
  return f == AddressFamily::V4 ? kEthertypeIpv4 : kEthertypeIpv6;
}

/// IPv4 or IPv6 address held in network order. IPv4 uses the first four
/// octets; the remainder stay zero so that comparison is well defined.
class IpAddress {
 public:
  IpAddress() = default;

  static IpAddress v4(std::array<std::uint8_t, 4> octets) {
    IpAddress a;
    a.family_ = AddressFamily::V4;
    for (std::size_t i = 0; i < 4; ++i) a.octets_[i] = octets[i];
    return a;
  }

  static IpAddress v6(const std::array<std::uint8_t, 16>& octets) {
    IpAddress a;
    a.family_ = AddressFamily::V6;
    a.octets_ = octets;
    return a;
  }

  static std::optional<IpAddress> parse(std::string_view text) {
    std::string s(text);
    IpAddress a;
    if (inet_pton(AF_INET, s.c_str(), a.octets_.data()) == 1) {
      a.family_ = AddressFamily::V4;
      return a;
    }
    if (inet_pton(AF_INET6, s.c_str(), a.octets_.data()) == 1) {
      a.family_ = AddressFamily::V6;
      return a;
    }
    return std::nullopt;
  }

  AddressFamily family() const noexcept { return family_; }
  bool is_v4() const noexcept { return family_ == AddressFamily::V4; }
  bool is_v6() const noexcept { return family_ == AddressFamily::V6; }
  const std::array<std::uint8_t, 16>& octets() const noexcept { return octets_; }

  std::string to_string() const {
    char buf[INET6_ADDRSTRLEN] = {};
    inet_ntop(is_v4() ? AF_INET : AF_INET6, octets_.data(), buf, sizeof(buf));
    return buf;
  }

  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;

 private:
  AddressFamily family_ = AddressFamily::V4;
  std::array<std::uint8_t, 16> octets_{};
};

struct Endpoint {
  IpAddress addr;
  std::uint16_t port = 0;

  std::string to_string() const {
    return addr.is_v6() ? "[" + addr.to_string() + "]:" + std::to_string(port)
                        : addr.to_string() + ":" + std::to_string(port);
  }

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

class MacAddress {
 public:
  MacAddress() = default;
  explicit constexpr MacAddress(std::array<std::uint8_t, 6> o) : octets_(o) {}

  static constexpr MacAddress broadcast() {
    return MacAddress({0xff, 0xff, 0xff, 0xff, 0xff, 0xff});
  }

  static std::optional<MacAddress> parse(std::string_view text) {
    std::array<unsigned, 6> v{};
    std::string s(text);
    char tail = 0;
    if (std::sscanf(s.c_str(), "%x:%x:%x:%x:%x:%x%c", &v[0], &v[1], &v[2], &v[3],
                    &v[4], &v[5], &tail) != 6)
      return std::nullopt;
    std::array<std::uint8_t, 6> o{};
    for (std::size_t i = 0; i < 6; ++i) {
      if (v[i] > 0xff) return std::nullopt;
      o[i] = static_cast<std::uint8_t>(v[i]);
    }
    return MacAddress(o);
  }

  const std::array<std::uint8_t, 6>& octets() const noexcept { return octets_; }

  std::string to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", octets_[0],
                  octets_[1], octets_[2], octets_[3], octets_[4], octets_[5]);
    return buf;
  }

  friend auto operator<=>(const MacAddress&, const MacAddress&) = default;

 private:
  std::array<std::uint8_t, 6> octets_{};
};

}  // namespace ejfat
