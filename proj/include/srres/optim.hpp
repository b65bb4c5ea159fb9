#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "srres/model.hpp"
#include "srres/tensor.hpp"

namespace srres {

struct LossValue {
  double value = 0.0;
  /// Element count the squared error is averaged over.
  std::size_t n = 0;
};

template <typename T>
struct LossResult {
  LossValue loss;
  BasicTensor<T> d_pred;
};

/// Mean squared error over every element; d_pred = 2 (pred - target) / N.
template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target);

enum class OptimizerKind { kSgd, kAdam };

struct OptimState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  /// First and second moments, one buffer per parameter slot.
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// theta <- theta - lr * g
template <typename T>
void sgd_step(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads, OptimState& state);

/// Bias-corrected Adam. Moment buffers are created zeroed on the first call.
template <typename T>
void adam_step(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads, OptimState& state);

/// Dispatches on state.kind.
template <typename T>
void optimizer_step(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads, OptimState& state);

/// Rescales grads so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
template <typename T>
double clip_grad_norm(GradientSet<T>& grads, double max_norm);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose perturbation crossed a non-differentiable point.
  std::size_t skipped = 0;
  bool pass = true;
};

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-5;
  /// Coordinates to probe per buffer; 0 probes all of them.
  std::size_t samples = 0;
};

double relative_error(double analytic, double numeric);

/// Central-difference check (five-point stencil at offsets +-h, +-2h) of
/// `analytic` against `loss`, perturbing `coords` in place and restoring them.
/// rel_err = |a - n| / max(|a|, |n|, 1e-8).
/// `smooth`, when given, is queried after every loss evaluation; returning
/// false (say, a ReLU mask changed) skips that coordinate.
GradCheckReport grad_check(std::span<double> coords, std::span<const double> analytic,
                           const std::function<double()>& loss, const GradCheckOptions& opts, Rng& rng,
                           const std::function<bool()>& smooth = {});

/// Checks every trainable parameter of a double-precision model under the
/// MSE loss against `target`, in train mode. Coordinates that flip any ReLU
/// are skipped.
GradCheckReport grad_check_model(SrModel<double>& model, const TensorD& lr, const TensorD& target,
                                 const GradCheckOptions& opts, Rng& rng);

}  // namespace srres
