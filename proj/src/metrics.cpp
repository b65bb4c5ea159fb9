#include "srres/metrics.hpp"

#include <cmath>

namespace srres {

template <typename T>
double psnr(const BasicTensor<T>& a, const BasicTensor<T>& b, double max_val) {
  if (a.shape() != b.shape()) throw ShapeMismatch("psnr " + a.shape().str() + " vs " + b.shape().str());
  if (!(max_val > 0.0)) throw InvalidConfig("psnr max_val must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    sum += d * d;
  }
  const double mse = sum / double(a.size());
  if (mse == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(max_val * max_val / mse);
}

std::vector<double> gaussian_taps(std::size_t size, double sigma) {
  std::vector<double> taps(size);
  const double center = (double(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = double(i) - center;
    taps[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

namespace {

/// Separable "valid" filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const std::size_t oh = h - k + 1;
  const std::size_t ow = w - k + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * plane[y * w + x + t];
      tmp[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * tmp[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

template <typename T>
double ssim(const BasicTensor<T>& a, const BasicTensor<T>& b, const SsimParams& params) {
  if (a.shape() != b.shape()) throw ShapeMismatch("ssim " + a.shape().str() + " vs " + b.shape().str());
  const Shape& s = a.shape();
  if (s.h < params.window || s.w < params.window) {
    throw InvalidShape("ssim needs at least " + std::to_string(params.window) + "x" +
                       std::to_string(params.window) + " pixels, got " + s.str());
  }
  const double c1 = (params.k1 * params.max_val) * (params.k1 * params.max_val);
  const double c2 = (params.k2 * params.max_val) * (params.k2 * params.max_val);
  const auto taps = gaussian_taps(params.window, params.sigma);
  const std::size_t plane = s.plane();

  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> pa(plane), pb(plane), paa(plane), pbb(plane), pab(plane);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const T* ra = a.plane_ptr(n, c);
      const T* rb = b.plane_ptr(n, c);
      for (std::size_t i = 0; i < plane; ++i) {
        pa[i] = double(ra[i]);
        pb[i] = double(rb[i]);
        paa[i] = pa[i] * pa[i];
        pbb[i] = pb[i] * pb[i];
        pab[i] = pa[i] * pb[i];
      }
      const auto mu_a = filter_valid(pa, s.h, s.w, taps);
      const auto mu_b = filter_valid(pb, s.h, s.w, taps);
      const auto e_aa = filter_valid(paa, s.h, s.w, taps);
      const auto e_bb = filter_valid(pbb, s.h, s.w, taps);
      const auto e_ab = filter_valid(pab, s.h, s.w, taps);
      for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
        const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
        total += num / den;
      }
      count += mu_a.size();
    }
  }
  return total / double(count);
}

template <typename T>
BasicTensor<T> to_luma(const BasicTensor<T>& img) {
  const Shape& s = img.shape();
  if (s.c == 1) return img;
  if (s.c != 3) throw ShapeMismatch("luma conversion needs 1 or 3 channels, got " + s.str());
  BasicTensor<T> y({s.n, 1, s.h, s.w}, T(0));
  for (std::size_t n = 0; n < s.n; ++n) {
    const T* r = img.plane_ptr(n, 0);
    const T* g = img.plane_ptr(n, 1);
    const T* b = img.plane_ptr(n, 2);
    T* dst = y.plane_ptr(n, 0);
    for (std::size_t i = 0; i < s.plane(); ++i) {
      dst[i] = T(0.299 * double(r[i]) + 0.587 * double(g[i]) + 0.114 * double(b[i]));
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> crop_border(const BasicTensor<T>& img, std::size_t pixels) {
  const Shape& s = img.shape();
  if (2 * pixels >= s.h || 2 * pixels >= s.w) {
    throw InvalidShape("border crop " + std::to_string(pixels) + " leaves nothing of " + s.str());
  }
  if (pixels == 0) return img;
  const std::size_t h = s.h - 2 * pixels;
  const std::size_t w = s.w - 2 * pixels;
  BasicTensor<T> out({s.n, s.c, h, w}, T(0));
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) out(n, c, y, x) = img(n, c, y + pixels, x + pixels);
      }
    }
  }
  return out;
}

template <typename T>
MetricReport evaluate_pair(const BasicTensor<T>& sr, const BasicTensor<T>& hr, std::size_t border_crop) {
  if (sr.shape() != hr.shape()) throw ShapeMismatch("evaluate_pair " + sr.shape().str() + " vs " + hr.shape().str());
  const auto a = crop_border(to_luma(sr), border_crop);
  const auto b = crop_border(to_luma(hr), border_crop);
  return {psnr(a, b, 1.0), ssim(a, b)};
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.psnr_db += r.psnr_db;
    m.ssim += r.ssim;
  }
  m.psnr_db /= double(reports.size());
  m.ssim /= double(reports.size());
  return m;
}

#define SRRES_INSTANTIATE(T)                                                                   \
  template double psnr<T>(const BasicTensor<T>&, const BasicTensor<T>&, double);               \
  template double ssim<T>(const BasicTensor<T>&, const BasicTensor<T>&, const SsimParams&);    \
  template BasicTensor<T> to_luma<T>(const BasicTensor<T>&);                                   \
  template BasicTensor<T> crop_border<T>(const BasicTensor<T>&, std::size_t);                  \
  template MetricReport evaluate_pair<T>(const BasicTensor<T>&, const BasicTensor<T>&, std::size_t);

SRRES_INSTANTIATE(float)
SRRES_INSTANTIATE(double)

}  // namespace srres
