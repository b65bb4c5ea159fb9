#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "srres/tensor.hpp"

namespace srres {

/// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;
};

/// Throws DecodeError for anything libpng cannot decode. Alpha is dropped.
Image8 read_png(const std::string& path);
void write_png(const std::string& path, const Image8& img);

/// (1, channels, h, w) tensor in [0, 1].
Tensor image_to_tensor(const Image8& img);
/// Clamps to [0, 1] and rounds half away from zero onto 0..255.
Image8 tensor_to_image(const Tensor& t);
std::uint8_t quantize_unit(float v);

enum class ColorMode { kLuma, kRgb };

/// PNG to a [0, 1] tensor. Luma mode returns BT.601 Y of color images and the
/// gray channel of grayscale ones.
Tensor load_image(const std::string& path, ColorMode mode = ColorMode::kLuma);

/// Full-range BT.601 YCbCr with chroma centered on 0.5.
Tensor rgb_to_ycbcr(const Tensor& rgb);
Tensor ycbcr_to_rgb(const Tensor& ycbcr);

}  // namespace srres
