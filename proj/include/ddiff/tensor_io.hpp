#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ddiff/tensor.hpp"

namespace ddiff {

/// DDT1 layout: "DDT1", u32 LE rank, rank x u32 LE extents, f64 LE data row-major.
std::vector<std::uint8_t> encode_ddt1(const Tensor& t);

/// Decodes one DDT1 tensor starting at bytes[0]; `consumed` receives the frame length.
/// Throws FormatError on bad magic or truncation.
Tensor decode_ddt1(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

/// Byte length of the DDT1 header declared at bytes[0], or 0 if more bytes are needed.
std::size_t ddt1_header_size(std::span<const std::uint8_t> bytes);

/// Limits applied when decoding untrusted input.
inline constexpr std::uint32_t kMaxDdt1Rank = 8;
inline constexpr std::uint64_t kMaxDdt1Elements = std::uint64_t{1} << 28;

Tensor read_ddt1(const std::filesystem::path& path);
void write_ddt1(const std::filesystem::path& path, const Tensor& t);

/// Replace `path` atomically: write to a sibling temp file then rename.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f64le(std::vector<std::uint8_t>& out, double v);
std::uint32_t get_u32le(const std::uint8_t* p);
double get_f64le(const std::uint8_t* p);

}  // namespace ddiff
