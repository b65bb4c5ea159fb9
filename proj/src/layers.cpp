#include "srres/layers.hpp"

#include <cmath>

namespace srres {

namespace {

template <typename T>
using MatrixMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const Matrix<T>>;

}  // namespace

template <typename T>
ConvParams<T> conv_init(std::size_t in_c, std::size_t out_c, std::size_t kernel, Rng& rng) {
  if (kernel % 2 == 0) throw InvalidConfig("same-padded convolution needs an odd kernel");
  const double fan_in = double(in_c * kernel * kernel);
  ConvParams<T> p;
  p.weight = random_normal<T>({out_c, in_c, kernel, kernel}, rng, T(0), T(std::sqrt(2.0 / fan_in)));
  p.bias.assign(out_c, T(0));
  p.stride = 1;
  p.pad = (kernel - 1) / 2;
  return p;
}

template <typename T>
BatchNormParams<T> batchnorm_init(std::size_t channels) {
  BatchNormParams<T> p;
  p.gamma.assign(channels, T(1));
  p.beta.assign(channels, T(0));
  p.running_mean.assign(channels, T(0));
  p.running_var.assign(channels, T(1));
  return p;
}

template <typename T>
ConvResult<T> conv2d_forward(const BasicTensor<T>& x, const ConvParams<T>& p) {
  const Shape& in = x.shape();
  const Shape& ws = p.weight.shape();
  if (in.c != ws.c) {
    throw ShapeMismatch("conv input has " + std::to_string(in.c) + " channels, weight expects " +
                        std::to_string(ws.c));
  }
  if (!p.bias.empty() && p.bias.size() != ws.n) throw ShapeMismatch("conv bias length differs from out channels");

  const Window win = p.window();
  const std::size_t oh = window_output_extent(in.h, win.kh, win.stride, win.pad);
  const std::size_t ow = window_output_extent(in.w, win.kw, win.stride, win.pad);
  const std::size_t plane = oh * ow;

  ConvResult<T> r;
  r.cache.cols = im2col(x, win);
  r.cache.weight = p.weight;
  r.cache.input_shape = in;
  r.cache.output_shape = {in.n, ws.n, oh, ow};
  r.cache.window = win;
  r.cache.has_bias = !p.bias.empty();

  const ConstMatrixMap<T> w(p.weight.data().data(), Eigen::Index(ws.n), Eigen::Index(ws.c * ws.h * ws.w));
  const Matrix<T> prod = w * r.cache.cols;

  r.y = BasicTensor<T>(r.cache.output_shape, T(0));
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t o = 0; o < ws.n; ++o) {
      const T* src = prod.row(Eigen::Index(o)).data() + n * plane;
      T* dst = r.y.plane_ptr(n, o);
      const T b = p.bias.empty() ? T(0) : p.bias[o];
      for (std::size_t k = 0; k < plane; ++k) dst[k] = src[k] + b;
    }
  }
  return r;
}

template <typename T>
LayerGrads<T> conv2d_backward(const BasicTensor<T>& d_y, const ConvCache<T>& cache) {
  const Shape& os = cache.output_shape;
  if (d_y.shape() != os) {
    throw ShapeMismatch("conv upstream gradient " + d_y.shape().str() + " vs output " + os.str());
  }
  const Shape& ws = cache.weight.shape();
  const std::size_t plane = os.h * os.w;

  Matrix<T> dy(Eigen::Index(os.c), Eigen::Index(os.n * plane));
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t o = 0; o < os.c; ++o) {
      const T* src = d_y.plane_ptr(n, o);
      T* dst = dy.row(Eigen::Index(o)).data() + n * plane;
      std::copy(src, src + plane, dst);
    }
  }

  LayerGrads<T> g;
  g.d_weight = BasicTensor<T>(ws, T(0));
  MatrixMap<T> dw(g.d_weight.data().data(), Eigen::Index(ws.n), Eigen::Index(ws.c * ws.h * ws.w));
  dw.noalias() = dy * cache.cols.transpose();

  if (cache.has_bias) {
    g.d_bias.assign(os.c, T(0));
    for (std::size_t o = 0; o < os.c; ++o) g.d_bias[o] = dy.row(Eigen::Index(o)).sum();
  }

  const ConstMatrixMap<T> w(cache.weight.data().data(), Eigen::Index(ws.n), Eigen::Index(ws.c * ws.h * ws.w));
  const Matrix<T> dcols = w.transpose() * dy;
  g.d_input = col2im(dcols, cache.input_shape, cache.window);
  return g;
}

template <typename T>
ReluResult<T> relu_forward(const BasicTensor<T>& x) {
  ReluResult<T> r{BasicTensor<T>(x.shape(), T(0)), BasicTensor<T>(x.shape(), T(0))};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > T(0)) {
      r.y[i] = x[i];
      r.mask[i] = T(1);
    }
  }
  return r;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& d_y, const BasicTensor<T>& mask) {
  if (d_y.shape() != mask.shape()) throw ShapeMismatch("relu gradient/mask shape differ");
  BasicTensor<T> dx(d_y.shape(), T(0));
  for (std::size_t i = 0; i < d_y.size(); ++i) {
    if (mask[i] != T(0)) dx[i] = d_y[i];
  }
  return dx;
}

namespace {

template <typename T>
void check_bn(const BasicTensor<T>& x, const BatchNormParams<T>& p) {
  const std::size_t c = p.channels();
  if (x.shape().c != c) {
    throw ShapeMismatch("batchnorm input has " + std::to_string(x.shape().c) + " channels, params have " +
                        std::to_string(c));
  }
  if (p.beta.size() != c || p.running_mean.size() != c || p.running_var.size() != c) {
    throw ShapeMismatch("batchnorm parameter vectors disagree in length");
  }
  if (!(p.eps >= T(0))) throw InvalidConfig("batchnorm eps must be non-negative");
}

template <typename T>
BatchNormResult<T> normalize(const BasicTensor<T>& x, const BatchNormParams<T>& p, Mode mode,
                             const std::vector<T>& mean, const std::vector<T>& var) {
  const Shape& s = x.shape();
  const std::size_t plane = s.plane();
  BatchNormResult<T> r;
  r.cache.mode = mode;
  r.cache.gamma = p.gamma;
  r.cache.inv_std.resize(s.c);
  r.cache.x_hat = BasicTensor<T>(s, T(0));
  r.y = BasicTensor<T>(s, T(0));
  for (std::size_t c = 0; c < s.c; ++c) {
    const T denom = var[c] + p.eps;
    // Zero variance with eps == 0 collapses the channel onto beta.
    const T inv = denom > T(0) ? T(1) / std::sqrt(denom) : T(0);
    r.cache.inv_std[c] = inv;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* src = x.plane_ptr(n, c);
      T* xh = r.cache.x_hat.plane_ptr(n, c);
      T* dst = r.y.plane_ptr(n, c);
      for (std::size_t k = 0; k < plane; ++k) {
        xh[k] = (src[k] - mean[c]) * inv;
        dst[k] = p.gamma[c] * xh[k] + p.beta[c];
      }
    }
  }
  return r;
}

}  // namespace

template <typename T>
BatchNormResult<T> batchnorm_forward(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode) {
  if (mode == Mode::kInfer) return batchnorm_infer(x, p);
  check_bn(x, p);
  const Shape& s = x.shape();
  const std::size_t plane = s.plane();
  const double count = double(s.n * plane);
  std::vector<T> mean(s.c), var(s.c);
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* src = x.plane_ptr(n, c);
      for (std::size_t k = 0; k < plane; ++k) sum += double(src[k]);
    }
    const double mu = sum / count;
    double sq = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* src = x.plane_ptr(n, c);
      for (std::size_t k = 0; k < plane; ++k) {
        const double d = double(src[k]) - mu;
        sq += d * d;
      }
    }
    mean[c] = T(mu);
    var[c] = T(sq / count);
  }
  auto r = normalize(x, p, Mode::kTrain, mean, var);
  for (std::size_t c = 0; c < s.c; ++c) {
    p.running_mean[c] = (T(1) - p.momentum) * p.running_mean[c] + p.momentum * mean[c];
    p.running_var[c] = (T(1) - p.momentum) * p.running_var[c] + p.momentum * var[c];
  }
  return r;
}

template <typename T>
BatchNormResult<T> batchnorm_infer(const BasicTensor<T>& x, const BatchNormParams<T>& p) {
  check_bn(x, p);
  return normalize(x, p, Mode::kInfer, p.running_mean, p.running_var);
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(const BasicTensor<T>& d_y, const BatchNormCache<T>& cache) {
  if (cache.mode != Mode::kTrain) throw InvalidState("batchnorm backward needs a train-mode cache");
  const Shape& s = cache.x_hat.shape();
  if (d_y.shape() != s) throw ShapeMismatch("batchnorm upstream gradient " + d_y.shape().str() + " vs " + s.str());
  const std::size_t plane = s.plane();
  const double count = double(s.n * plane);

  BatchNormGrads<T> g;
  g.d_gamma.assign(s.c, T(0));
  g.d_beta.assign(s.c, T(0));
  g.d_input = BasicTensor<T>(s, T(0));
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* dy = d_y.plane_ptr(n, c);
      const T* xh = cache.x_hat.plane_ptr(n, c);
      for (std::size_t k = 0; k < plane; ++k) {
        sum_dy += double(dy[k]);
        sum_dy_xhat += double(dy[k]) * double(xh[k]);
      }
    }
    g.d_beta[c] = T(sum_dy);
    g.d_gamma[c] = T(sum_dy_xhat);
    // dx = gamma * inv_std / m * (m*dy - sum(dy) - x_hat * sum(dy*x_hat))
    const double k_scale = double(cache.gamma[c]) * double(cache.inv_std[c]) / count;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* dy = d_y.plane_ptr(n, c);
      const T* xh = cache.x_hat.plane_ptr(n, c);
      T* dx = g.d_input.plane_ptr(n, c);
      for (std::size_t k = 0; k < plane; ++k) {
        dx[k] = T(k_scale * (count * double(dy[k]) - sum_dy - double(xh[k]) * sum_dy_xhat));
      }
    }
  }
  return g;
}

template <typename T>
BasicTensor<T> pixel_shuffle(const BasicTensor<T>& x, std::size_t r) {
  const Shape& s = x.shape();
  if (r == 0 || s.c % (r * r) != 0) {
    throw InvalidShape("pixel_shuffle: channels " + std::to_string(s.c) + " not divisible by r^2 = " +
                       std::to_string(r * r));
  }
  const std::size_t oc = s.c / (r * r);
  BasicTensor<T> out({s.n, oc, s.h * r, s.w * r}, T(0));
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < oc; ++c) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
          const T* src = x.plane_ptr(n, c * r * r + i * r + j);
          for (std::size_t h = 0; h < s.h; ++h) {
            for (std::size_t w = 0; w < s.w; ++w) out(n, c, h * r + i, w * r + j) = src[h * s.w + w];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> pixel_unshuffle(const BasicTensor<T>& x, std::size_t r) {
  const Shape& s = x.shape();
  if (r == 0 || s.h % r != 0 || s.w % r != 0) {
    throw InvalidShape("pixel_unshuffle: spatial dims " + s.str() + " not divisible by " + std::to_string(r));
  }
  const std::size_t oh = s.h / r;
  const std::size_t ow = s.w / r;
  BasicTensor<T> out({s.n, s.c * r * r, oh, ow}, T(0));
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
          T* dst = out.plane_ptr(n, c * r * r + i * r + j);
          for (std::size_t h = 0; h < oh; ++h) {
            for (std::size_t w = 0; w < ow; ++w) dst[h * ow + w] = x(n, c, h * r + i, w * r + j);
          }
        }
      }
    }
  }
  return out;
}

#define SRRES_INSTANTIATE(T)                                                                  \
  template ConvParams<T> conv_init<T>(std::size_t, std::size_t, std::size_t, Rng&);           \
  template BatchNormParams<T> batchnorm_init<T>(std::size_t);                                 \
  template ConvResult<T> conv2d_forward<T>(const BasicTensor<T>&, const ConvParams<T>&);      \
  template LayerGrads<T> conv2d_backward<T>(const BasicTensor<T>&, const ConvCache<T>&);      \
  template ReluResult<T> relu_forward<T>(const BasicTensor<T>&);                              \
  template BasicTensor<T> relu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&);     \
  template BatchNormResult<T> batchnorm_forward<T>(const BasicTensor<T>&, BatchNormParams<T>&, Mode); \
  template BatchNormResult<T> batchnorm_infer<T>(const BasicTensor<T>&, const BatchNormParams<T>&); \
  template BatchNormGrads<T> batchnorm_backward<T>(const BasicTensor<T>&, const BatchNormCache<T>&); \
  template BasicTensor<T> pixel_shuffle<T>(const BasicTensor<T>&, std::size_t);               \
  template BasicTensor<T> pixel_unshuffle<T>(const BasicTensor<T>&, std::size_t);

SRRES_INSTANTIATE(float)
SRRES_INSTANTIATE(double)

}  // namespace srres
