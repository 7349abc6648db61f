#include "ddiff/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

#include "ddiff/errors.hpp"

namespace ddiff {

namespace {
constexpr std::uint8_t kMagic[4] = {'D', 'D', 'T', '1'};

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  throw std::system_error(errno ? errno : EIO, std::generic_category(), what + " " + path.string());
}
}  // namespace

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64le(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

std::vector<std::uint8_t> encode_ddt1(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * t.rank() + 8 * t.size());
  for (auto c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32le(out, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape()) put_u32le(out, static_cast<std::uint32_t>(e));
  for (double v : t.data()) put_f64le(out, v);
  return out;
}

std::size_t ddt1_header_size(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) return 0;
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("DDT1: bad magic");
  const std::uint32_t rank = get_u32le(bytes.data() + 4);
  if (rank > kMaxDdt1Rank) throw FormatError("DDT1: rank " + std::to_string(rank) + " exceeds limit");
  return 8 + 4 * static_cast<std::size_t>(rank);
}

Tensor decode_ddt1(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  const std::size_t header = ddt1_header_size(bytes);
  if (header == 0 || bytes.size() < header) throw FormatError("DDT1: truncated header");
  const std::uint32_t rank = get_u32le(bytes.data() + 4);
  Shape shape(rank);
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    shape[i] = get_u32le(bytes.data() + 8 + 4 * i);
    count *= shape[i];
    if (count > kMaxDdt1Elements) throw FormatError("DDT1: tensor too large");
  }
  const std::size_t total = header + 8 * count;
  if (bytes.size() < total) throw FormatError("DDT1: truncated data");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = get_f64le(bytes.data() + header + 8 * i);
  if (consumed) *consumed = total;
  try {
    return Tensor(std::move(shape), std::move(data));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("DDT1: ") + e.what());
  }
}

Tensor read_ddt1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ddt1(bytes);
}

void write_ddt1(const std::filesystem::path& path, const Tensor& t) { write_file_atomic(path, encode_ddt1(t)); }

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_fail(tmp, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) io_fail(tmp, "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::system_error(ec, "rename to " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace ddiff
