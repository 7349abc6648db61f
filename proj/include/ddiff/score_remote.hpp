#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddiff/prior.hpp"
#include "ddiff/socket.hpp"

namespace ddiff {

/// Score-bridge wire protocol.
///   request:  "SCRQ" 0x01 u32 t  f64 bar_alpha  DDT1
///   response: "SCRP" 0x01 DDT1
///   error:    "SCRE" u32 length  UTF-8 message
namespace bridge {
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint32_t kMaxErrorBytes = 1u << 20;

std::vector<std::uint8_t> encode_request(int t, double bar_alpha, const Tensor& x);
std::vector<std::uint8_t> encode_response(const Tensor& score);
std::vector<std::uint8_t> encode_error(const std::string& message);

struct Request {
  int t = 0;
  double bar_alpha = 0.0;
  Tensor x;
};

/// Reads one request frame. Returns nullopt on clean EOF between frames.
/// Throws ScoreTransportError(malformed) on bad magic/version or payload.
std::optional<Request> read_request(net::Stream& stream);

/// Reads one response frame, returning the tensor or throwing the mapped error.
Tensor read_response(net::Stream& stream);
}  // namespace bridge

/// Score model served over TCP. Holds one connection; not safe for concurrent
/// callers. Any failure closes the connection, the next call reconnects.
class RemoteScore final : public ScoreModel {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{30000};

  explicit RemoteScore(net::Endpoint endpoint, std::chrono::milliseconds timeout = kDefaultTimeout);
  explicit RemoteScore(const std::string& endpoint, std::chrono::milliseconds timeout = kDefaultTimeout);

  Tensor score(const Tensor& x, int t, double bar_alpha) override;
  const net::Endpoint& endpoint() const noexcept { return endpoint_; }

 private:
  net::Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
  net::Stream stream_;
};

/// score_remote(endpoint, x, t): one-shot request on a fresh connection.
Tensor score_remote(const std::string& endpoint, const Tensor& x, int t, double bar_alpha,
                    std::chrono::milliseconds timeout = RemoteScore::kDefaultTimeout);

}  // namespace ddiff
