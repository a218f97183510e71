/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sslr/error.hpp"
#include "sslr/io.hpp"
#include "sslr/prg.hpp"

namespace sslr {

// ---------------------------------------------------------------------------
// Frames: "MPC1" | u8 type | u64 LE payload length | payload.
// Payloads are sequences of little-endian u64 words.

enum class MsgType : std::uint8_t {
  kOpenRing = 1,
  kOpenBits = 2,
  kReshare = 3,
  kControl = 4,
  kRandomness = 5,
};

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'M', 'P', 'C', '1'};
inline constexpr std::size_t kFrameHeaderBytes = 13;
inline constexpr std::uint64_t kMaxPayloadBytes = std::uint64_t{1} << 34;

inline bool valid_msg_type(std::uint8_t t) { return t >= 1 && t <= 5; }

struct Frame {
  MsgType type = MsgType::kControl;
  std::vector<std::uint64_t> words;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Outbound frame whose payload words sit 8-byte aligned directly behind the
// 13-byte header in one buffer, so protocol code writes masked values straight
// into the bytes that go on the wire.
class OutFrame {
 public:
  OutFrame(MsgType type, std::size_t words) : storage_(2 + words), words_(words) {
    auto* b = base();
    for (std::size_t i = 0; i < 4; ++i) b[i] = kFrameMagic[i];
    b[4] = static_cast<std::uint8_t>(type);
    const std::uint64_t len = std::uint64_t{words} * 8;
    for (std::size_t i = 0; i < 8; ++i) b[5 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  }

  MsgType type() const { return static_cast<MsgType>(base()[4]); }
  std::span<std::uint64_t> payload() { return {storage_.data() + 2, words_}; }
  std::span<const std::uint64_t> payload() const { return {storage_.data() + 2, words_}; }

  // Wire bytes; on big-endian hosts the payload is swapped in place first.
  std::span<const std::uint8_t> bytes() const {
    if constexpr (std::endian::native == std::endian::big) {
      if (!swapped_) {
        for (auto& w : const_cast<OutFrame*>(this)->payload()) w = io::to_le(w);
        swapped_ = true;
      }
    }
    return {base(), kFrameHeaderBytes + words_ * 8};
  }

 private:
  // Header starts 3 bytes into the first word so the payload lands on word 2.
  std::uint8_t* base() { return reinterpret_cast<std::uint8_t*>(storage_.data()) + 3; }
  const std::uint8_t* base() const {
    return reinterpret_cast<const std::uint8_t*>(storage_.data()) + 3;
  }

  std::vector<std::uint64_t> storage_;
  std::size_t words_;
  mutable bool swapped_ = false;
};

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  OutFrame out(f.type, f.words.size());
  std::copy(f.words.begin(), f.words.end(), out.payload().begin());
  const auto b = out.bytes();
  return {b.begin(), b.end()};
}

// Parses a frame header; returns the payload length in bytes.
inline std::uint64_t parse_frame_header(std::span<const std::uint8_t> header,
                                        MsgType* type) {
  if (header.size() < kFrameHeaderBytes) fail(ErrorCode::kTransport, "truncated frame header");
  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), header.begin())) {
    fail(ErrorCode::kTransport, "bad frame magic");
  }
  if (!valid_msg_type(header[4])) {
    fail(ErrorCode::kTransport, "unknown frame type " + std::to_string(header[4]));
  }
  *type = static_cast<MsgType>(header[4]);
  io::ByteReader r(header.subspan(5, 8));
  const std::uint64_t len = r.u64();
  if (len > kMaxPayloadBytes) fail(ErrorCode::kTransport, "frame payload too long");
  if (len % 8 != 0) fail(ErrorCode::kTransport, "frame payload is not word aligned");
  return len;
}

// Decodes exactly one frame occupying all of `bytes`.
inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
  Frame f;
  const std::uint64_t len = parse_frame_header(bytes, &f.type);
  if (bytes.size() - kFrameHeaderBytes != len) {
    fail(ErrorCode::kTransport, "frame length does not match header");
  }
  f.words.resize(len / 8);
  io::ByteReader r(bytes.subspan(kFrameHeaderBytes));
  r.words(f.words);
  return f;
}

// ---------------------------------------------------------------------------
// Channels

class Channel {
 public:
  virtual ~Channel() = default;

  virtual void send(const OutFrame& frame) = 0;
  virtual Frame recv() = 0;
  // One symmetric round: send `frame` while receiving the peer's frame.
  virtual Frame exchange(const OutFrame& frame) = 0;
  virtual void close() = 0;

  void send(const Frame& f) {
    OutFrame out(f.type, f.words.size());
    std::copy(f.words.begin(), f.words.end(), out.payload().begin());
    send(out);
  }
};

namespace detail {

struct MemoryPipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> queue;
  bool closed = false;
};

}  // namespace detail

// In-process duplex channel. Frames cross it as encoded bytes, so byte counts
// and hashes are the same as over TCP.
class MemoryChannel final : public Channel {
 public:
  MemoryChannel(std::shared_ptr<detail::MemoryPipe> in,
                std::shared_ptr<detail::MemoryPipe> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryChannel() override { close(); }

  using Channel::send;
  void send(const OutFrame& frame) override {
    const auto b = frame.bytes();
    std::lock_guard lock(out_->mu);
    if (out_->closed) fail(ErrorCode::kTransport, "peer channel closed");
    out_->queue.emplace_back(b.begin(), b.end());
    out_->cv.notify_one();
  }

  Frame recv() override {
    std::unique_lock lock(in_->mu);
    in_->cv.wait(lock, [&] { return !in_->queue.empty() || in_->closed; });
    if (in_->queue.empty()) fail(ErrorCode::kTransport, "peer disconnected");
    auto bytes = std::move(in_->queue.front());
    in_->queue.pop_front();
    lock.unlock();
    return decode_frame(bytes);
  }

  Frame exchange(const OutFrame& frame) override {
    send(frame);
    return recv();
  }

  void close() override {
    for (auto* p : {in_.get(), out_.get()}) {
      std::lock_guard lock(p->mu);
      p->closed = true;
      p->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<detail::MemoryPipe> in_;
  std::shared_ptr<detail::MemoryPipe> out_;
};

inline std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
make_memory_channel_pair() {
  auto ab = std::make_shared<detail::MemoryPipe>();
  auto ba = std::make_shared<detail::MemoryPipe>();
  return {std::make_unique<MemoryChannel>(ba, ab), std::make_unique<MemoryChannel>(ab, ba)};
}

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

inline Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon + 1 == s.size()) {
    fail(ErrorCode::kArgument, "endpoint must be host:port, got '" + s + "'");
  }
  Endpoint e{s.substr(0, colon), 0};
  if (e.host.empty()) e.host = "127.0.0.1";
  try {
    const unsigned long port = std::stoul(s.substr(colon + 1));
    if (port > 65535) throw std::out_of_range("port");
    e.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    fail(ErrorCode::kArgument, "bad port in endpoint '" + s + "'");
  }
  return e;
}

// TCP channel over a connected socket.
class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpChannel() override { close(); }

  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  static std::unique_ptr<TcpChannel> connect(const Endpoint& ep,
                                             std::chrono::milliseconds wait = {}) {
    const auto deadline = std::chrono::steady_clock::now() + wait;
    for (;;) {
      addrinfo hints{};
      hints.ai_family = AF_INET;
      hints.ai_socktype = SOCK_STREAM;
      addrinfo* res = nullptr;
      if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0) {
        fail(ErrorCode::kTransport, "cannot resolve " + ep.host);
      }
      const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
      const int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
      const int err = errno;
      ::freeaddrinfo(res);
      if (rc == 0) return std::make_unique<TcpChannel>(fd);
      if (fd >= 0) ::close(fd);
      if (std::chrono::steady_clock::now() >= deadline) {
        fail(ErrorCode::kTransport, "cannot connect to " + ep.host + ":" +
                                        std::to_string(ep.port) + ": " + std::strerror(err));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }

  using Channel::send;
  void send(const OutFrame& frame) override {
    const auto b = frame.bytes();
    std::size_t off = 0;
    while (off < b.size()) {
      const ssize_t n = ::send(fd_, b.data() + off, b.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) fail(ErrorCode::kTransport, std::string("send failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  Frame recv() override {
    Reader r;
    while (!r.done()) {
      r.read_some(fd_, /*block=*/true);
    }
    return r.take();
  }

  // Interleaves sending and receiving so two peers pushing large frames at
  // each other never deadlock on full socket buffers.
  Frame exchange(const OutFrame& frame) override {
    const auto b = frame.bytes();
    std::size_t off = 0;
    Reader r;
    while (off < b.size() || !r.done()) {
      pollfd pfd{fd_, 0, 0};
      if (off < b.size()) pfd.events |= POLLOUT;
      if (!r.done()) pfd.events |= POLLIN;
      if (::poll(&pfd, 1, -1) < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::kTransport, "poll failed");
      }
      if (pfd.revents & (POLLERR | POLLNVAL)) fail(ErrorCode::kTransport, "socket error");
      if ((pfd.revents & POLLOUT) && off < b.size()) {
        const ssize_t n = ::send(fd_, b.data() + off, b.size() - off, MSG_NOSIGNAL | MSG_DONTWAIT);
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          fail(ErrorCode::kTransport, std::string("send failed: ") + std::strerror(errno));
        }
        if (n > 0) off += static_cast<std::size_t>(n);
      }
      if ((pfd.revents & (POLLIN | POLLHUP)) && !r.done()) r.read_some(fd_, /*block=*/false);
    }
    return r.take();
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  // Incremental frame reader: header first, then the payload straight into
  // the destination word buffer.
  class Reader {
   public:
    bool done() const { return have_header_ && got_ == payload_bytes_; }

    void read_some(int fd, bool block) {
      const int flags = block ? 0 : MSG_DONTWAIT;
      std::uint8_t* dst;
      std::size_t want;
      if (!have_header_) {
        dst = header_.data() + header_got_;
        want = kFrameHeaderBytes - header_got_;
      } else {
        dst = reinterpret_cast<std::uint8_t*>(frame_.words.data()) + got_;
        want = payload_bytes_ - got_;
      }
      const ssize_t n = ::recv(fd, dst, want, flags);
      if (n == 0) fail(ErrorCode::kTransport, "peer disconnected");
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return;
        fail(ErrorCode::kTransport, std::string("recv failed: ") + std::strerror(errno));
      }
      if (!have_header_) {
        header_got_ += static_cast<std::size_t>(n);
        if (header_got_ == kFrameHeaderBytes) {
          payload_bytes_ = parse_frame_header(header_, &frame_.type);
          frame_.words.resize(payload_bytes_ / 8);
          have_header_ = true;
        }
      } else {
        got_ += static_cast<std::size_t>(n);
      }
    }

    Frame take() {
      for (auto& w : frame_.words) w = io::from_le(w);
      return std::move(frame_);
    }

   private:
    std::array<std::uint8_t, kFrameHeaderBytes> header_{};
    std::size_t header_got_ = 0;
    bool have_header_ = false;
    std::size_t payload_bytes_ = 0;
    std::size_t got_ = 0;
    Frame frame_;
  };

  int fd_ = -1;
};

// Listening socket; port 0 picks a free port.
class TcpListener {
 public:
  explicit TcpListener(const Endpoint& ep) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail(ErrorCode::kTransport, "socket() failed");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (ep.host == "0.0.0.0" || ep.host == "*") {
      addr.sin_addr.s_addr = htonl(INADDR_ANY);
    } else if (ep.host == "localhost") {
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    } else if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd_);
      fail(ErrorCode::kArgument, "listen address must be an IPv4 literal: " + ep.host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd_, 4) != 0) {
      const int err = errno;
      ::close(fd_);
      fail(ErrorCode::kTransport, "cannot listen on " + ep.host + ":" +
                                      std::to_string(ep.port) + ": " + std::strerror(err));
    }
  }
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
  }

  // Waits up to `timeout` (0 = forever) for one peer.
  std::unique_ptr<TcpChannel> accept(std::chrono::milliseconds timeout = {}) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ms = timeout.count() > 0 ? static_cast<int>(timeout.count()) : -1;
    const int rc = ::poll(&pfd, 1, ms);
    if (rc == 0) fail(ErrorCode::kTransport, "timed out waiting for a peer");
    if (rc < 0) fail(ErrorCode::kTransport, "poll failed while accepting");
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) fail(ErrorCode::kTransport, std::string("accept failed: ") + std::strerror(errno));
    return std::make_unique<TcpChannel>(fd);
  }

 private:
  int fd_ = -1;
};

// ---------------------------------------------------------------------------
// Session handshake between the two data processors.

inline constexpr std::uint64_t kProtocolVersion = 1;

struct Handshake {
  std::uint64_t version = kProtocolVersion;
  std::uint64_t ring_bits = 64;
  std::uint64_t frac_bits = 12;
  std::uint64_t int_bits = 15;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  Seed seed_commitment{};

  friend bool operator==(const Handshake&, const Handshake&) = default;
};

inline std::vector<std::uint64_t> handshake_words(const Handshake& h) {
  std::vector<std::uint64_t> w = {h.version, h.ring_bits, h.frac_bits, h.int_bits, h.rows, h.cols};
  for (std::size_t i = 0; i < 4; ++i) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < 8; ++k) v |= std::uint64_t{h.seed_commitment[8 * i + k]} << (8 * k);
    w.push_back(v);
  }
  return w;
}

// Exchanges parameters; any mismatch aborts before share traffic starts.
inline void handshake(Channel& ch, const Handshake& mine) {
  const auto words = handshake_words(mine);
  OutFrame out(MsgType::kControl, words.size());
  std::copy(words.begin(), words.end(), out.payload().begin());
  const Frame in = ch.exchange(out);
  if (in.type != MsgType::kControl || in.words.size() != words.size()) {
    fail(ErrorCode::kProtocol, "malformed handshake from peer");
  }
  static constexpr const char* kFields[] = {"protocol version", "lambda", "a", "b",
                                            "row count", "column count"};
  for (std::size_t i = 0; i < 6; ++i) {
    if (in.words[i] != words[i]) {
      fail(ErrorCode::kProtocol, std::string("handshake mismatch on ") + kFields[i] + ": local " +
                                     std::to_string(words[i]) + ", peer " +
                                     std::to_string(in.words[i]));
    }
  }
  if (!std::equal(words.begin() + 6, words.end(), in.words.begin() + 6)) {
    fail(ErrorCode::kProtocol, "handshake mismatch on correlated-randomness seed commitment");
  }
}

}  // namespace sslr
