#pragma once

#include <cstddef>
#include <vector>

#include "srres/tensor.hpp"

namespace srres {

/// Convolution weights (out_c, in_c, kh, kw), per-output bias (empty for a
/// bias-free conv), stride and
/// zero padding.
template <typename T>
struct ConvParams {
  BasicTensor<T> weight;
  std::vector<T> bias;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t out_channels() const { return weight.shape().n; }
  std::size_t in_channels() const { return weight.shape().c; }
  Window window() const { return {weight.shape().h, weight.shape().w, stride, pad}; }
};

/// "same" convolution with zero bias and He-normal weights.
template <typename T>
ConvParams<T> conv_init(std::size_t in_c, std::size_t out_c, std::size_t kernel, Rng& rng);

template <typename T>
struct BatchNormParams {
  std::vector<T> gamma;
  std::vector<T> beta;
  T eps = T(1e-5);
  std::vector<T> running_mean;
  std::vector<T> running_var;
  T momentum = T(0.1);

  std::size_t channels() const { return gamma.size(); }
};

template <typename T>
BatchNormParams<T> batchnorm_init(std::size_t channels);

template <typename T>
struct LayerGrads {
  BasicTensor<T> d_weight;
  std::vector<T> d_bias;
  BasicTensor<T> d_input;
};

template <typename T>
struct BatchNormGrads {
  std::vector<T> d_gamma;
  std::vector<T> d_beta;
  BasicTensor<T> d_input;
};

template <typename T>
struct ConvCache {
  Matrix<T> cols;
  BasicTensor<T> weight;
  Shape input_shape;
  Shape output_shape;
  Window window;
  bool has_bias = true;
};

template <typename T>
struct ConvResult {
  BasicTensor<T> y;
  ConvCache<T> cache;
};

template <typename T>
ConvResult<T> conv2d_forward(const BasicTensor<T>& x, const ConvParams<T>& p);
template <typename T>
LayerGrads<T> conv2d_backward(const BasicTensor<T>& d_y, const ConvCache<T>& cache);

/// Mask holds 1 where x > 0. The subgradient at exactly zero is zero.
template <typename T>
struct ReluResult {
  BasicTensor<T> y;
  BasicTensor<T> mask;
};

template <typename T>
ReluResult<T> relu_forward(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& d_y, const BasicTensor<T>& mask);

enum class Mode { kTrain, kInfer };

template <typename T>
struct BatchNormCache {
  Mode mode = Mode::kInfer;
  BasicTensor<T> x_hat;
  std::vector<T> inv_std;
  std::vector<T> gamma;
};

template <typename T>
struct BatchNormResult {
  BasicTensor<T> y;
  BatchNormCache<T> cache;
};

/// Train mode normalizes with biased per-channel batch statistics over
/// (n, h, w) and folds them into the running moments; infer mode reads the
/// running moments and leaves `p` untouched.
template <typename T>
BatchNormResult<T> batchnorm_forward(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode);
template <typename T>
BatchNormResult<T> batchnorm_infer(const BasicTensor<T>& x, const BatchNormParams<T>& p);
template <typename T>
BatchNormGrads<T> batchnorm_backward(const BasicTensor<T>& d_y, const BatchNormCache<T>& cache);

/// out[n, c, h*r + i, w*r + j] = x[n, c*r*r + i*r + j, h, w]
template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& x, std::size_t r);
/// Exact inverse of pixel_shuffle; doubles as its backward pass.
template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& x, std::size_t r);

}  // namespace srres
