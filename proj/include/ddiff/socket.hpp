#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ddiff::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses "HOST:PORT"; throws InvalidArgument on malformed input.
Endpoint parse_endpoint(const std::string& text);

/// Blocking TCP stream with per-operation timeouts. Failures throw
/// ScoreTransportError (connect, timeout, or transport kinds).
class Stream {
 public:
  Stream() = default;
  explicit Stream(int fd) : fd_(fd) {}
  Stream(Stream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Stream& operator=(Stream&& other) noexcept;
  Stream(const Stream&) = delete;
  Stream& operator=(const Stream&) = delete;
  ~Stream() { close(); }

  static Stream connect(const Endpoint& ep, std::chrono::milliseconds timeout);

  bool is_open() const noexcept { return fd_ >= 0; }
  void set_timeout(std::chrono::milliseconds timeout);
  void send_all(std::span<const std::uint8_t> bytes);
  /// Reads exactly n bytes; EOF before n bytes is a transport error.
  std::vector<std::uint8_t> recv_exact(std::size_t n);
  /// Like recv_exact but returns an empty vector on clean EOF before the first byte.
  std::vector<std::uint8_t> recv_exact_or_eof(std::size_t n);
  void close() noexcept;

 private:
  int fd_ = -1;
};

/// Listening socket bound to 127.0.0.1 on an ephemeral or given port.
class Listener {
 public:
  explicit Listener(std::uint16_t port = 0);
  Listener(Listener&&) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  std::uint16_t port() const noexcept { return port_; }
  /// Waits up to `timeout` for a client; returns a closed Stream on timeout or shutdown.
  Stream accept(std::chrono::milliseconds timeout);
  void shutdown() noexcept;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace ddiff::net
