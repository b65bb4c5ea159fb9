#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srres/error.hpp"

namespace srres {

/// NCHW extents. All four must be >= 1 for a valid tensor.
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  bool valid() const { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rank-4 dense tensor in row-major NCHW order. Operations in this library
/// never mutate their inputs; the mutable accessors exist so producers can
/// fill a freshly constructed value.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() : shape_{}, data_(1, T(0)) {}
  BasicTensor(Shape shape, T fill);
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<T> data() & { return data_; }
  std::span<const T> data() const& { return data_; }
  // A span into a temporary would dangle.
  std::span<const T> data() const&& = delete;
  const std::vector<T>& vec() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[index(n, c, h, w)];
  }
  const T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[index(n, c, h, w)];
  }

  T* plane_ptr(std::size_t n, std::size_t c) { return data_.data() + index(n, c, 0, 0); }
  const T* plane_ptr(std::size_t n, std::size_t c) const { return data_.data() + index(n, c, 0, 0); }

  bool all_finite() const;

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

template <typename T>
BasicTensor<T> tensor_new(Shape shape, T fill);

enum class ElementwiseOp { kAdd, kSub, kMul };

template <typename T>
BasicTensor<T> elementwise(ElementwiseOp op, const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> elementwise(ElementwiseOp op, const BasicTensor<T>& a, T b);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return elementwise(ElementwiseOp::kAdd, a, b);
}
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return elementwise(ElementwiseOp::kSub, a, b);
}
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return elementwise(ElementwiseOp::kMul, a, b);
}
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s) {
  return elementwise(ElementwiseOp::kMul, a, s);
}

/// Spatial geometry of a sliding-window operator.
struct Window {
  std::size_t kh = 1;
  std::size_t kw = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;
};

/// Output extent of a window along one axis; throws InvalidShape when the
/// window does not tile the padded input exactly.
std::size_t window_output_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);

/// Unfolds receptive fields into columns. Rows are ordered (c, u, v) and
/// columns (n, oh, ow); positions outside the image read as zero.
template <typename T>
Matrix<T> im2col(const BasicTensor<T>& x, const Window& win);

/// Adjoint of im2col: scatter-adds each column back onto `shape`.
template <typename T>
BasicTensor<T> col2im(const Matrix<T>& cols, const Shape& shape, const Window& win);

/// xorshift64* generator seeded through one splitmix64 round.
///
///   state0 = splitmix64(seed)            (0 is remapped to 0x9E3779B97F4A7C15)
///   next:  x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D
///
/// uniform() takes the top 53 bits; normal() is Box-Muller using two
/// uniforms and discarding the sine branch, so the stream is stateless
/// beyond `state`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  double normal(double mean = 0.0, double stddev = 1.0);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

template <typename T>
BasicTensor<T> random_uniform(Shape shape, Rng& rng, T lo, T hi);
template <typename T>
BasicTensor<T> random_normal(Shape shape, Rng& rng, T mean, T stddev);

}  // namespace srres
