#include "srres/tensor.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace srres {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidShape: return "InvalidShape";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kCheckpointError: return "CheckpointError";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kUnknownMethod: return "UnknownMethod";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Error";
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(shape) {
  if (!shape.valid()) throw InvalidShape("all dims must be >= 1, got " + shape.str());
  data_.assign(shape.numel(), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (!shape.valid()) throw InvalidShape("all dims must be >= 1, got " + shape.str());
  if (data_.size() != shape.numel()) {
    throw InvalidShape("data length " + std::to_string(data_.size()) + " does not match " + shape.str());
  }
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
BasicTensor<T> tensor_new(Shape shape, T fill) {
  return BasicTensor<T>(shape, fill);
}

namespace {

template <typename T>
T apply(ElementwiseOp op, T a, T b) {
  switch (op) {
    case ElementwiseOp::kAdd: return a + b;
    case ElementwiseOp::kSub: return a - b;
    case ElementwiseOp::kMul: return a * b;
  }
  return a;
}

}  // namespace

template <typename T>
BasicTensor<T> elementwise(ElementwiseOp op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch("elementwise " + a.shape().str() + " vs " + b.shape().str());
  }
  BasicTensor<T> out(a.shape(), T(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = apply(op, a[i], b[i]);
  return out;
}

template <typename T>
BasicTensor<T> elementwise(ElementwiseOp op, const BasicTensor<T>& a, T b) {
  BasicTensor<T> out(a.shape(), T(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = apply(op, a[i], b);
  return out;
}

std::size_t window_output_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  if (stride == 0) throw InvalidShape("stride must be >= 1");
  const std::size_t padded = in + 2 * pad;
  if (padded < k) throw InvalidShape("kernel larger than padded input");
  if ((padded - k) % stride != 0) {
    throw InvalidShape("window does not tile input: (" + std::to_string(in) + "+2*" +
                       std::to_string(pad) + "-" + std::to_string(k) + ")/" +
                       std::to_string(stride) + " is not integral");
  }
  return (padded - k) / stride + 1;
}

template <typename T>
Matrix<T> im2col(const BasicTensor<T>& x, const Window& win) {
  const Shape& s = x.shape();
  const std::size_t oh = window_output_extent(s.h, win.kh, win.stride, win.pad);
  const std::size_t ow = window_output_extent(s.w, win.kw, win.stride, win.pad);
  const std::size_t out_plane = oh * ow;
  Matrix<T> cols = Matrix<T>::Zero(Eigen::Index(s.c * win.kh * win.kw), Eigen::Index(s.n * out_plane));

  const auto pad = static_cast<std::ptrdiff_t>(win.pad);
  const auto ih = static_cast<std::ptrdiff_t>(s.h);
  const auto iw = static_cast<std::ptrdiff_t>(s.w);
  for (std::size_t c = 0; c < s.c; ++c) {
    for (std::size_t u = 0; u < win.kh; ++u) {
      for (std::size_t v = 0; v < win.kw; ++v) {
        const auto row = Eigen::Index((c * win.kh + u) * win.kw + v);
        T* dst = cols.row(row).data();
        for (std::size_t n = 0; n < s.n; ++n) {
          const T* src = x.plane_ptr(n, c);
          T* out = dst + n * out_plane;
          for (std::size_t i = 0; i < oh; ++i) {
            const std::ptrdiff_t y = std::ptrdiff_t(i * win.stride + u) - pad;
            if (y < 0 || y >= ih) continue;
            const T* src_row = src + y * iw;
            for (std::size_t j = 0; j < ow; ++j) {
              const std::ptrdiff_t xx = std::ptrdiff_t(j * win.stride + v) - pad;
              if (xx >= 0 && xx < iw) out[i * ow + j] = src_row[xx];
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
BasicTensor<T> col2im(const Matrix<T>& cols, const Shape& shape, const Window& win) {
  const std::size_t oh = window_output_extent(shape.h, win.kh, win.stride, win.pad);
  const std::size_t ow = window_output_extent(shape.w, win.kw, win.stride, win.pad);
  const std::size_t out_plane = oh * ow;
  if (std::size_t(cols.rows()) != shape.c * win.kh * win.kw ||
      std::size_t(cols.cols()) != shape.n * out_plane) {
    throw ShapeMismatch("col2im matrix does not match target " + shape.str());
  }
  BasicTensor<T> x(shape, T(0));
  const auto pad = static_cast<std::ptrdiff_t>(win.pad);
  const auto ih = static_cast<std::ptrdiff_t>(shape.h);
  const auto iw = static_cast<std::ptrdiff_t>(shape.w);
  for (std::size_t c = 0; c < shape.c; ++c) {
    for (std::size_t u = 0; u < win.kh; ++u) {
      for (std::size_t v = 0; v < win.kw; ++v) {
        const auto row = Eigen::Index((c * win.kh + u) * win.kw + v);
        const T* src = cols.row(row).data();
        for (std::size_t n = 0; n < shape.n; ++n) {
          T* dst = x.plane_ptr(n, c);
          const T* in = src + n * out_plane;
          for (std::size_t i = 0; i < oh; ++i) {
            const std::ptrdiff_t y = std::ptrdiff_t(i * win.stride + u) - pad;
            if (y < 0 || y >= ih) continue;
            T* dst_row = dst + y * iw;
            for (std::size_t j = 0; j < ow; ++j) {
              const std::ptrdiff_t xx = std::ptrdiff_t(j * win.stride + v) - pad;
              if (xx >= 0 && xx < iw) dst_row[xx] += in[i * ow + j];
            }
          }
        }
      }
    }
  }
  return x;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::next_u64() {
  std::uint64_t x = state_;
  x ^= x >> 12;
  x ^= x << 25;
  x ^= x >> 27;
  state_ = x;
  return x * 0x2545F4914F6CDD1DULL;
}

double Rng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidConfig("Rng::below bound must be > 0");
  // Lemire's multiply-shift; bias is below 2^-64 * bound.
  const unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::uint64_t>(product >> 64);
}

double Rng::normal(double mean, double stddev) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
BasicTensor<T> random_uniform(Shape shape, Rng& rng, T lo, T hi) {
  BasicTensor<T> t(shape, T(0));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
BasicTensor<T> random_normal(Shape shape, Rng& rng, T mean, T stddev) {
  BasicTensor<T> t(shape, T(0));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.normal(mean, stddev));
  return t;
}

#define SRRES_INSTANTIATE(T)                                                                   \
  template class BasicTensor<T>;                                                               \
  template BasicTensor<T> tensor_new<T>(Shape, T);                                             \
  template BasicTensor<T> elementwise<T>(ElementwiseOp, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> elementwise<T>(ElementwiseOp, const BasicTensor<T>&, T);             \
  template Matrix<T> im2col<T>(const BasicTensor<T>&, const Window&);                          \
  template BasicTensor<T> col2im<T>(const Matrix<T>&, const Shape&, const Window&);            \
  template BasicTensor<T> random_uniform<T>(Shape, Rng&, T, T);                                \
  template BasicTensor<T> random_normal<T>(Shape, Rng&, T, T);

SRRES_INSTANTIATE(float)
SRRES_INSTANTIATE(double)

}  // namespace srres
