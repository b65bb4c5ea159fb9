#include "srres/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace srres {

std::string_view resample_mode_name(ResampleMode mode) {
  switch (mode) {
    case ResampleMode::kNearest: return "nearest";
    case ResampleMode::kBilinear: return "bilinear";
    case ResampleMode::kBicubic: return "bicubic";
  }
  return "unknown";
}

std::optional<ResampleMode> parse_resample_mode(std::string_view name) {
  if (name == "nearest") return ResampleMode::kNearest;
  if (name == "bilinear") return ResampleMode::kBilinear;
  if (name == "bicubic") return ResampleMode::kBicubic;
  return std::nullopt;
}

double cubic_kernel(double x, double a) {
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

double linear_kernel(double x) {
  x = std::abs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

/// Taps for one output coordinate. `base` is the tap with the largest
/// weight; the output is accumulated as x[base] + sum w_i (x[i] - x[base])
/// which keeps constant signals and unit-weight taps exact.
struct Taps {
  std::vector<std::size_t> index;
  std::vector<double> weight;
  std::size_t base = 0;
};

std::vector<Taps> build_taps(std::size_t in, std::size_t out, ResampleMode mode, double a, bool antialias) {
  const double factor = double(out) / double(in);
  const auto last = static_cast<std::ptrdiff_t>(in) - 1;
  auto clamp = [last](std::ptrdiff_t i) { return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last)); };

  std::vector<Taps> taps(out);
  for (std::size_t d = 0; d < out; ++d) {
    const double src = (double(d) + 0.5) / factor - 0.5;
    Taps& t = taps[d];
    if (mode == ResampleMode::kNearest) {
      t.index.push_back(clamp(static_cast<std::ptrdiff_t>(std::floor(src + 0.5))));
      t.weight.push_back(1.0);
      continue;
    }
    const double support = mode == ResampleMode::kBilinear ? 1.0 : 2.0;
    const double stretch = (antialias && factor < 1.0) ? 1.0 / factor : 1.0;
    const double radius = support * stretch;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(src - radius)) + 1;
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil(src + radius)) - 1;
    double total = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const double x = (double(i) - src) / stretch;
      const double w = mode == ResampleMode::kBilinear ? linear_kernel(x) : cubic_kernel(x, a);
      if (w == 0.0) continue;
      // Clamped taps that land on the same pixel are merged.
      const std::size_t idx = clamp(i);
      auto it = std::find(t.index.begin(), t.index.end(), idx);
      if (it == t.index.end()) {
        t.index.push_back(idx);
        t.weight.push_back(w);
      } else {
        t.weight[std::size_t(it - t.index.begin())] += w;
      }
      total += w;
    }
    for (double& w : t.weight) w /= total;
  }
  for (Taps& t : taps) {
    t.base = std::size_t(std::max_element(t.weight.begin(), t.weight.end()) - t.weight.begin());
  }
  return taps;
}

template <typename T>
T apply_taps(const Taps& t, const T* src, std::size_t stride) {
  const double base = double(src[t.index[t.base] * stride]);
  double acc = 0.0;
  for (std::size_t k = 0; k < t.index.size(); ++k) {
    if (k == t.base) continue;
    acc += t.weight[k] * (double(src[t.index[k] * stride]) - base);
  }
  return static_cast<T>(base + acc);
}

}  // namespace

template <typename T>
BasicTensor<T> resample_to(const BasicTensor<T>& img, std::size_t out_h, std::size_t out_w, ResampleMode mode,
                           double cubic_a, bool antialias) {
  const Shape& s = img.shape();
  if (out_h == 0 || out_w == 0) throw InvalidShape("resample output would be empty");
  const auto rows = build_taps(s.h, out_h, mode, cubic_a, antialias);
  const auto cols = build_taps(s.w, out_w, mode, cubic_a, antialias);

  BasicTensor<T> out({s.n, s.c, out_h, out_w}, T(0));
  std::vector<T> tmp(s.h * out_w);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const T* src = img.plane_ptr(n, c);
      for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) tmp[y * out_w + x] = apply_taps(cols[x], src + y * s.w, 1);
      }
      T* dst = out.plane_ptr(n, c);
      for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) dst[y * out_w + x] = apply_taps(rows[y], tmp.data() + x, out_w);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> resample(const BasicTensor<T>& img, const ResampleSpec& spec) {
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) throw InvalidShape("resample scale must be positive");
  const Shape& s = img.shape();
  const double oh = std::round(double(s.h) * spec.scale);
  const double ow = std::round(double(s.w) * spec.scale);
  if (oh < 1.0 || ow < 1.0) throw InvalidShape("resample output would be empty for " + s.str());
  return resample_to(img, std::size_t(oh), std::size_t(ow), spec.mode, spec.cubic_a, spec.antialias);
}

template <typename T>
BasicTensor<T> bicubic_upscale(const BasicTensor<T>& img, std::size_t r) {
  const Shape& s = img.shape();
  return resample_to(img, s.h * r, s.w * r, ResampleMode::kBicubic);
}

template <typename T>
BasicTensor<T> crop_to_multiple(const BasicTensor<T>& img, std::size_t r) {
  const Shape& s = img.shape();
  if (r == 0) throw InvalidShape("scale must be >= 1");
  const std::size_t h = s.h / r * r;
  const std::size_t w = s.w / r * r;
  if (h == 0 || w == 0) throw InvalidShape("image " + s.str() + " smaller than scale " + std::to_string(r));
  if (h == s.h && w == s.w) return img;
  BasicTensor<T> out({s.n, s.c, h, w}, T(0));
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        const T* src = img.plane_ptr(n, c) + y * s.w;
        std::copy(src, src + w, out.plane_ptr(n, c) + y * w);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> degrade(const BasicTensor<T>& hr, std::size_t r) {
  const BasicTensor<T> cropped = crop_to_multiple(hr, r);
  const Shape& s = cropped.shape();
  return resample_to(cropped, s.h / r, s.w / r, ResampleMode::kBicubic, -0.5, true);
}

#define SRRES_INSTANTIATE(T)                                                                               \
  template BasicTensor<T> resample<T>(const BasicTensor<T>&, const ResampleSpec&);                         \
  template BasicTensor<T> resample_to<T>(const BasicTensor<T>&, std::size_t, std::size_t, ResampleMode, double, bool); \
  template BasicTensor<T> bicubic_upscale<T>(const BasicTensor<T>&, std::size_t);                          \
  template BasicTensor<T> crop_to_multiple<T>(const BasicTensor<T>&, std::size_t);                         \
  template BasicTensor<T> degrade<T>(const BasicTensor<T>&, std::size_t);

SRRES_INSTANTIATE(float)
SRRES_INSTANTIATE(double)

}  // namespace srres
