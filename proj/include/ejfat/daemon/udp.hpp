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

// Thin RAII wrapper over POSIX UDP sockets.

#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "ejfat/error.hpp"
#include "ejfat/net.hpp"

namespace ejfat::io {

struct SockAddr {
  sockaddr_storage storage{};
  socklen_t length = 0;

  const sockaddr* get() const noexcept { return reinterpret_cast<const sockaddr*>(&storage); }
  sockaddr* get() noexcept { return reinterpret_cast<sockaddr*>(&storage); }
};

inline SockAddr to_sockaddr(const Endpoint& ep) {
  SockAddr s;
  if (ep.addr.is_v4()) {
    auto* in = reinterpret_cast<sockaddr_in*>(&s.storage);
    in->sin_family = AF_INET;
    in->sin_port = htons(ep.port);
    std::memcpy(&in->sin_addr, ep.addr.octets().data(), 4);
    s.length = sizeof(sockaddr_in);
  } else {
    auto* in6 = reinterpret_cast<sockaddr_in6*>(&s.storage);
    in6->sin6_family = AF_INET6;
    in6->sin6_port = htons(ep.port);
    std::memcpy(&in6->sin6_addr, ep.addr.octets().data(), 16);
    s.length = sizeof(sockaddr_in6);
  }
  return s;
}

inline Endpoint from_sockaddr(const sockaddr_storage& s) {
  if (s.ss_family == AF_INET) {
    const auto* in = reinterpret_cast<const sockaddr_in*>(&s);
    std::array<std::uint8_t, 4> o{};
    std::memcpy(o.data(), &in->sin_addr, 4);
    return Endpoint{IpAddress::v4(o), ntohs(in->sin_port)};
  }
  const auto* in6 = reinterpret_cast<const sockaddr_in6*>(&s);
  std::array<std::uint8_t, 16> o{};
  std::memcpy(o.data(), &in6->sin6_addr, 16);
  return Endpoint{IpAddress::v6(o), ntohs(in6->sin6_port)};
}

/// Parses "host:port", "[v6]:port" or a bare host with `default_port`.
inline std::optional<Endpoint> parse_endpoint(std::string_view text, std::optional<std::uint16_t> default_port) {
  std::string host(text);
  std::optional<std::uint16_t> port = default_port;
  auto set_port = [&](std::string_view p) {
    if (p.empty() || p.size() > 5) return false;
    unsigned v = 0;
    for (char c : p) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + static_cast<unsigned>(c - '0');
    }
    if (v > 0xffff) return false;
    port = static_cast<std::uint16_t>(v);
    return true;
  };
  if (!host.empty() && host.front() == '[') {
    const auto close = host.find(']');
    if (close == std::string::npos) return std::nullopt;
    const std::string rest = host.substr(close + 1);
    host = host.substr(1, close - 1);
    if (!rest.empty() && (rest.front() != ':' || !set_port(std::string_view(rest).substr(1)))) return std::nullopt;
  } else if (std::count(host.begin(), host.end(), ':') == 1) {
    const auto colon = host.find(':');
    if (!set_port(std::string_view(host).substr(colon + 1))) return std::nullopt;
    host.resize(colon);
  }
  auto ip = IpAddress::parse(host);
  if (!ip || !port) return std::nullopt;
  return Endpoint{*ip, *port};
}

struct Datagram {
  std::size_t size = 0;
  Endpoint src;
};

class UdpSocket {
 public:
  UdpSocket() = default;
  explicit UdpSocket(int fd) noexcept : fd_(fd) {}
  UdpSocket(UdpSocket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UdpSocket& operator=(UdpSocket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket() { close(); }

  /// Opens a socket bound to `local`; port 0 picks an ephemeral port.
  /// `reuse` lets several sockets share one local address.
  static UdpSocket bind(const Endpoint& local, std::size_t rcvbuf = 0, bool reuse = false) {
    const int fd = ::socket(local.addr.is_v4() ? AF_INET : AF_INET6, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(ErrorCode::BindFailure, std::string("socket: ") + std::strerror(errno));
    UdpSocket s(fd);
    if (local.addr.is_v6()) {
      int on = 1;
      ::setsockopt(fd, IPPROTO_IPV6, IPV6_V6ONLY, &on, sizeof(on));
    }
    if (reuse) {
      int on = 1;
      ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &on, sizeof(on));
    }
    if (rcvbuf) {
      // The forced variant ignores rmem_max but needs privileges.
      int v = static_cast<int>(rcvbuf);
      if (::setsockopt(fd, SOL_SOCKET, SO_RCVBUFFORCE, &v, sizeof(v)) != 0)
        ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &v, sizeof(v));
    }
    const auto sa = to_sockaddr(local);
    if (::bind(fd, sa.get(), sa.length) != 0)
      throw Error(ErrorCode::BindFailure, local.to_string() + ": " + std::strerror(errno));
    return s;
  }

  int fd() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }

  Endpoint local() const {
    SockAddr s;
    s.length = sizeof(s.storage);
    ::getsockname(fd_, s.get(), &s.length);
    return from_sockaddr(s.storage);
  }

  bool send_to(std::span<const std::uint8_t> data, const Endpoint& dst) const noexcept {
    const auto sa = to_sockaddr(dst);
    return ::sendto(fd_, data.data(), data.size(), 0, sa.get(), sa.length) == static_cast<ssize_t>(data.size());
  }

  /// Waits up to `timeout` for a datagram.
  std::optional<Datagram> receive(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) const {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) return std::nullopt;
    return receive_now(buf);
  }

  /// Non-blocking receive.
  std::optional<Datagram> receive_now(std::span<std::uint8_t> buf) const {
    SockAddr from;
    from.length = sizeof(from.storage);
    const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), MSG_DONTWAIT, from.get(), &from.length);
    if (n < 0) return std::nullopt;
    return Datagram{static_cast<std::size_t>(n), from_sockaddr(from.storage)};
  }

  void close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline bool is_unspecified(const IpAddress& a) {
  const auto& o = a.octets();
  return std::all_of(o.begin(), o.end(), [](std::uint8_t b) { return b == 0; });
}

}  // namespace ejfat::io
