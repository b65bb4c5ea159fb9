#include "srres/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace srres {

template <typename T>
LossResult<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeMismatch("mse_loss " + pred.shape().str() + " vs " + target.shape().str());
  }
  const std::size_t n = pred.size();
  LossResult<T> r{{0.0, n}, BasicTensor<T>(pred.shape(), T(0))};
  double sum = 0.0;
  const double k = 2.0 / double(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double(pred[i]) - double(target[i]);
    sum += d * d;
    r.d_pred[i] = T(k * d);
  }
  r.loss.value = sum / double(n);
  return r;
}

namespace {

template <typename T>
void check_alignment(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads) {
  if (params.size() != grads.grads.size()) throw ShapeMismatch("gradient set does not mirror parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].values.size() != grads.grads[i].size()) {
      throw ShapeMismatch("gradient for " + params[i].name + " has wrong length");
    }
  }
}

}  // namespace

template <typename T>
void sgd_step(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads, OptimState& state) {
  check_alignment(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].values;
    const auto& g = grads.grads[i];
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = T(double(theta[k]) - state.lr * double(g[k]));
  }
  ++state.t;
}

template <typename T>
void adam_step(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads, OptimState& state) {
  check_alignment(params, grads);
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.values.size(), 0.0);
      state.v.emplace_back(p.values.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeMismatch("optimizer state does not mirror parameters");

  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].values;
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != theta.size()) throw ShapeMismatch("moment buffer for " + params[i].name + " has wrong length");
    const auto& g = grads.grads[i];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = double(g[k]);
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * gk;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * gk * gk;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      theta[k] = T(double(theta[k]) - state.lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
  }
}

template <typename T>
void optimizer_step(std::span<const ParamSlot<T>> params, const GradientSet<T>& grads, OptimState& state) {
  if (state.kind == OptimizerKind::kSgd) {
    sgd_step(params, grads, state);
  } else {
    adam_step(params, grads, state);
  }
}

template <typename T>
double clip_grad_norm(GradientSet<T>& grads, double max_norm) {
  const double norm = grads.l2_norm();
  if (max_norm > 0.0 && norm > max_norm) grads.scale(T(max_norm / norm));
  return norm;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(std::span<double> coords, std::span<const double> analytic,
                           const std::function<double()>& loss, const GradCheckOptions& opts, Rng& rng,
                           const std::function<bool()>& smooth) {
  if (coords.size() != analytic.size()) throw ShapeMismatch("grad_check coordinate/gradient length differ");
  std::vector<std::size_t> picks(coords.size());
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  if (opts.samples > 0 && opts.samples < coords.size()) {
    // Partial Fisher-Yates: the first `samples` entries become a uniform draw.
    for (std::size_t i = 0; i < opts.samples; ++i) {
      std::swap(picks[i], picks[i + rng.below(picks.size() - i)]);
    }
    picks.resize(opts.samples);
  }

  GradCheckReport report;
  for (std::size_t idx : picks) {
    const double saved = coords[idx];
    bool valid = true;
    auto eval = [&](double offset) {
      coords[idx] = saved + offset;
      const double v = loss();
      valid = valid && (!smooth || smooth());
      return v;
    };
    const double h = opts.step;
    // Fourth-order central stencil: truncation error O(h^4) instead of O(h^2).
    const double numeric = (8.0 * (eval(h) - eval(-h)) - (eval(2 * h) - eval(-2 * h))) / (12.0 * h);
    coords[idx] = saved;
    if (!valid) {
      ++report.skipped;
      continue;
    }
    report.max_rel_err = std::max(report.max_rel_err, relative_error(analytic[idx], numeric));
    ++report.checked;
  }
  report.pass = report.max_rel_err <= opts.tolerance;
  return report;
}

GradCheckReport grad_check_model(SrModel<double>& model, const TensorD& lr, const TensorD& target,
                                 const GradCheckOptions& opts, Rng& rng) {
  auto fwd = model.forward(lr, Mode::kTrain);
  const auto analytic = model.backward(fwd.cache, mse_loss(fwd.sr, target).d_pred);
  std::vector<TensorD> masks;
  for (const auto& b : fwd.cache.blocks) masks.push_back(b.relu_mask);
  bool same_masks = true;
  auto loss = [&]() {
    auto r = model.forward(lr, Mode::kTrain);
    same_masks = true;
    for (std::size_t i = 0; i < masks.size(); ++i) same_masks = same_masks && r.cache.blocks[i].relu_mask == masks[i];
    return mse_loss(r.sr, target).loss.value;
  };
  auto smooth = [&]() { return same_masks; };

  GradCheckReport total;
  auto slots = model.parameters();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto r = grad_check(slots[i].values, analytic.grads[i], loss, opts, rng, smooth);
    total.max_rel_err = std::max(total.max_rel_err, r.max_rel_err);
    total.checked += r.checked;
    total.skipped += r.skipped;
  }
  total.pass = total.max_rel_err <= opts.tolerance;
  return total;
}

#define SRRES_INSTANTIATE(T)                                                                            \
  template LossResult<T> mse_loss<T>(const BasicTensor<T>&, const BasicTensor<T>&);                     \
  template void sgd_step<T>(std::span<const ParamSlot<T>>, const GradientSet<T>&, OptimState&);         \
  template void adam_step<T>(std::span<const ParamSlot<T>>, const GradientSet<T>&, OptimState&);        \
  template void optimizer_step<T>(std::span<const ParamSlot<T>>, const GradientSet<T>&, OptimState&);   \
  template double clip_grad_norm<T>(GradientSet<T>&, double);

SRRES_INSTANTIATE(float)
SRRES_INSTANTIATE(double)

}  // namespace srres
