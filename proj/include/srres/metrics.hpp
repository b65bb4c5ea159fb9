#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "srres/tensor.hpp"

namespace srres {

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// 10 log10(max_val^2 / MSE); identical inputs give +infinity.
template <typename T>
double psnr(const BasicTensor<T>& a, const BasicTensor<T>& b, double max_val = 1.0);

struct SsimParams {
  double max_val = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
  std::size_t window = 11;
  double sigma = 1.5;
};

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(std::size_t size, double sigma);

/// Mean SSIM over every "valid" window placement of every (n, c) plane.
template <typename T>
double ssim(const BasicTensor<T>& a, const BasicTensor<T>& b, const SsimParams& params = {});

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// BT.601 luma of a 3-channel tensor; single-channel input is returned as is.
template <typename T>
BasicTensor<T> to_luma(const BasicTensor<T>& img);

/// Removes `pixels` from each side of every plane.
template <typename T>
BasicTensor<T> crop_border(const BasicTensor<T>& img, std::size_t pixels);

/// Crops `border_crop` pixels from each side of both images and scores luma
/// on a [0, 1] range.
template <typename T>
MetricReport evaluate_pair(const BasicTensor<T>& sr, const BasicTensor<T>& hr, std::size_t border_crop);

/// Arithmetic mean of reports; any infinite PSNR makes the PSNR mean infinite.
MetricReport mean_report(const std::vector<MetricReport>& reports);

}  // namespace srres
