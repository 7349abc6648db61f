#pragma once

#include <filesystem>

#include "ddiff/tensor.hpp"

namespace ddiff {

/// Binary PPM (P6) or PGM (P5) into a (C, H, W) tensor in [-1, 1].
Tensor read_pnm(const std::filesystem::path& path);

/// P6 preview with maxval 255 via the affine map [-1, 1] -> [0, 255]; values
/// outside the range are clamped. One-channel tensors are written as grey.
void write_ppm(const std::filesystem::path& path, const Tensor& image);

/// True when the shape is (1 or 3, H, W).
bool is_image_shaped(const Shape& shape);

/// Dispatches on extension: .ddt1 is read verbatim, .ppm/.pgm/.pnm are decoded.
Tensor read_tensor_or_image(const std::filesystem::path& path);

}  // namespace ddiff
