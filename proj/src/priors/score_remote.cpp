#include "ddiff/score_remote.hpp"

#include <cstring>

#include "ddiff/errors.hpp"
#include "ddiff/tensor_io.hpp"

namespace ddiff {
namespace bridge {
namespace {

using Kind = ScoreTransportError::Kind;

constexpr char kRequestMagic[4] = {'S', 'C', 'R', 'Q'};
constexpr char kResponseMagic[4] = {'S', 'C', 'R', 'P'};
constexpr char kErrorMagic[4] = {'S', 'C', 'R', 'E'};

void put_magic(std::vector<std::uint8_t>& out, const char (&magic)[4]) { out.insert(out.end(), magic, magic + 4); }

bool is_magic(const std::vector<std::uint8_t>& bytes, const char (&magic)[4]) {
  return std::memcmp(bytes.data(), magic, 4) == 0;
}

Tensor read_ddt1_frame(net::Stream& stream) {
  auto bytes = stream.recv_exact(8);
  std::size_t header = 0;
  try {
    header = ddt1_header_size(bytes);
  } catch (const FormatError& e) {
    throw ScoreTransportError(Kind::malformed, e.what());
  }
  auto dims = stream.recv_exact(header - 8);
  bytes.insert(bytes.end(), dims.begin(), dims.end());
  std::uint64_t count = 1;
  for (std::size_t i = 8; i < header; i += 4) {
    count *= get_u32le(bytes.data() + i);
    if (count > kMaxDdt1Elements) throw ScoreTransportError(Kind::malformed, "DDT1 payload too large");
  }
  auto data = stream.recv_exact(8 * count);
  bytes.insert(bytes.end(), data.begin(), data.end());
  try {
    return decode_ddt1(bytes);
  } catch (const FormatError& e) {
    throw ScoreTransportError(Kind::malformed, e.what());
  }
}

void expect_version(net::Stream& stream) {
  const auto v = stream.recv_exact(1);
  if (v[0] != kVersion)
    throw ScoreTransportError(Kind::malformed, "unsupported protocol version " + std::to_string(v[0]));
}

}  // namespace

std::vector<std::uint8_t> encode_request(int t, double bar_alpha, const Tensor& x) {
  std::vector<std::uint8_t> out;
  put_magic(out, kRequestMagic);
  out.push_back(kVersion);
  put_u32le(out, static_cast<std::uint32_t>(t));
  put_f64le(out, bar_alpha);
  const auto payload = encode_ddt1(x);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<std::uint8_t> encode_response(const Tensor& score) {
  std::vector<std::uint8_t> out;
  put_magic(out, kResponseMagic);
  out.push_back(kVersion);
  const auto payload = encode_ddt1(score);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<std::uint8_t> encode_error(const std::string& message) {
  std::vector<std::uint8_t> out;
  put_magic(out, kErrorMagic);
  put_u32le(out, static_cast<std::uint32_t>(message.size()));
  out.insert(out.end(), message.begin(), message.end());
  return out;
}

std::optional<Request> read_request(net::Stream& stream) {
  const auto magic = stream.recv_exact_or_eof(4);
  if (magic.empty()) return std::nullopt;
  if (!is_magic(magic, kRequestMagic)) throw ScoreTransportError(Kind::malformed, "bad request magic");
  expect_version(stream);
  const auto head = stream.recv_exact(12);
  Request req;
  req.t = static_cast<int>(get_u32le(head.data()));
  req.bar_alpha = get_f64le(head.data() + 4);
  req.x = read_ddt1_frame(stream);
  return req;
}

Tensor read_response(net::Stream& stream) {
  const auto magic = stream.recv_exact(4);
  if (is_magic(magic, kResponseMagic)) {
    expect_version(stream);
    return read_ddt1_frame(stream);
  }
  if (is_magic(magic, kErrorMagic)) {
    const auto len = get_u32le(stream.recv_exact(4).data());
    if (len > kMaxErrorBytes) throw ScoreTransportError(Kind::malformed, "error frame too long");
    const auto msg = stream.recv_exact(len);
    throw ScoreTransportError(Kind::remote, "score server error: " + std::string(msg.begin(), msg.end()));
  }
  throw ScoreTransportError(Kind::malformed, "bad response magic");
}

}  // namespace bridge

RemoteScore::RemoteScore(net::Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

RemoteScore::RemoteScore(const std::string& endpoint, std::chrono::milliseconds timeout)
    : RemoteScore(net::parse_endpoint(endpoint), timeout) {}

Tensor RemoteScore::score(const Tensor& x, int t, double bar_alpha) {
  try {
    if (!stream_.is_open()) stream_ = net::Stream::connect(endpoint_, timeout_);
    stream_.send_all(bridge::encode_request(t, bar_alpha, x));
    Tensor s = bridge::read_response(stream_);
    if (s.shape() != x.shape())
      throw ScoreTransportError(ScoreTransportError::Kind::shape_mismatch,
                                "score shape " + shape_string(s.shape()) + " does not match input " +
                                    shape_string(x.shape()));
    return s;
  } catch (const ScoreTransportError&) {
    stream_.close();
    throw;
  }
}

Tensor score_remote(const std::string& endpoint, const Tensor& x, int t, double bar_alpha,
                    std::chrono::milliseconds timeout) {
  RemoteScore model(endpoint, timeout);
  return model.score(x, t, bar_alpha);
}

}  // namespace ddiff
