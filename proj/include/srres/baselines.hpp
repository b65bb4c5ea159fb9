#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "srres/tensor.hpp"

namespace srres {

enum class ResampleMode { kNearest, kBilinear, kBicubic };

std::string_view resample_mode_name(ResampleMode mode);
/// Parses "nearest", "bilinear" or "bicubic".
std::optional<ResampleMode> parse_resample_mode(std::string_view name);

/// Resampling request. Output extents are round(h * scale) and
/// round(w * scale); the effective per-axis factor is out/in so that the
/// half-pixel mapping src = (dst + 0.5) / factor - 0.5 lands exactly.
struct ResampleSpec {
  ResampleMode mode = ResampleMode::kBicubic;
  double scale = 1.0;
  double cubic_a = -0.5;
  /// Widens bilinear/bicubic support by 1/scale when shrinking.
  bool antialias = true;
};

/// Keys cubic convolution kernel.
double cubic_kernel(double x, double a = -0.5);

/// Resamples every (n, c) plane independently; out-of-range taps clamp to
/// the nearest edge pixel.
template <typename T>
BasicTensor<T> resample(const BasicTensor<T>& img, const ResampleSpec& spec);

/// Resamples to an explicit output size instead of a scale factor.
template <typename T>
BasicTensor<T> resample_to(const BasicTensor<T>& img, std::size_t out_h, std::size_t out_w,
                           ResampleMode mode, double cubic_a = -0.5, bool antialias = true);

template <typename T>
BasicTensor<T> bicubic_upscale(const BasicTensor<T>& img, std::size_t r);

/// Crops the bottom/right remainder so both dims divide by `r`.
template <typename T>
BasicTensor<T> crop_to_multiple(const BasicTensor<T>& img, std::size_t r);

/// Defines LR for the whole project: crop to a multiple of r, then an
/// antialiased bicubic downscale by exactly 1/r. No clamping.
template <typename T>
BasicTensor<T> degrade(const BasicTensor<T>& hr, std::size_t r);

}  // namespace srres
