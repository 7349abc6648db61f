#include "ddiff/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "ddiff/errors.hpp"
#include "ddiff/tensor_io.hpp"

namespace ddiff {
namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Next whitespace-delimited header token, skipping '#' comments.
long header_number(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& name) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  long v = 0;
  std::size_t digits = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    v = v * 10 + (buf[pos++] - '0');
    if (++digits > 9) throw FormatError(name + ": header value too large");
  }
  if (digits == 0) throw FormatError(name + ": malformed header");
  return v;
}

}  // namespace

bool is_image_shaped(const Shape& shape) {
  return shape.size() == 3 && (shape[0] == 1 || shape[0] == 3) && shape[1] > 0 && shape[2] > 0;
}

Tensor read_pnm(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  const std::string name = path.string();
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '6' && buf[1] != '5'))
    throw FormatError(name + ": not a binary PPM/PGM");
  const std::size_t channels = buf[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const long w = header_number(buf, pos, name);
  const long h = header_number(buf, pos, name);
  const long maxval = header_number(buf, pos, name);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw FormatError(name + ": bad dimensions or maxval");
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw FormatError(name + ": malformed header");
  ++pos;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t count = channels * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  if (buf.size() - pos < count * bytes_per) throw FormatError(name + ": truncated pixel data");
  Tensor out({channels, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
  const std::size_t plane = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t k = (p * channels + c) * bytes_per;
      const unsigned v = bytes_per == 2 ? (unsigned{buf[pos + k]} << 8) | buf[pos + k + 1] : buf[pos + k];
      out[c * plane + p] = 2.0 * static_cast<double>(v) / static_cast<double>(maxval) - 1.0;
    }
  return out;
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  if (!is_image_shaped(image.shape()))
    throw InvalidArgument("write_ppm: shape " + shape_string(image.shape()) + " is not (1|3, H, W)");
  const std::size_t c = image.extent(0), h = image.extent(1), w = image.extent(2);
  const std::size_t plane = h * w;
  std::ostringstream header;
  header << "P6\n" << w << " " << h << "\n255\n";
  std::string text = header.str();
  text.reserve(text.size() + plane * 3);
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t k = 0; k < 3; ++k) {
      const double v = image[(c == 1 ? 0 : k) * plane + p];
      const double scaled = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
      text.push_back(static_cast<char>(static_cast<unsigned char>(scaled)));
    }
  write_file_atomic(path, text);
}

Tensor read_tensor_or_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
  return read_ddt1(path);
}

}  // namespace ddiff
