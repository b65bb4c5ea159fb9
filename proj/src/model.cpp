#include "srres/model.hpp"

#include <algorithm>
#include <cmath>

#include "srres/baselines.hpp"

namespace srres {

void ModelConfig::validate() const {
  if (scale < 1) throw InvalidConfig("scale must be >= 1");
  if (image_channels < 1) throw InvalidConfig("image_channels must be >= 1");
  if (feat_channels < 1) throw InvalidConfig("feat_channels must be >= 1");
  if (mapping_layers < 1) throw InvalidConfig("mapping_layers must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw InvalidConfig("kernel_size must be odd, got " + std::to_string(kernel_size));
  }
}

std::string to_string(FinalActivation a) {
  return a == FinalActivation::kClamp01 ? "clamp01" : "identity";
}

std::string to_string(BlockOrder o) {
  return o == BlockOrder::kConvReluBn ? "conv_relu_bn" : "conv_bn_relu";
}

FinalActivation parse_final_activation(const std::string& s) {
  if (s == "identity") return FinalActivation::kIdentity;
  if (s == "clamp01") return FinalActivation::kClamp01;
  throw InvalidConfig("unknown final_activation '" + s + "'");
}

BlockOrder parse_block_order(const std::string& s) {
  if (s == "conv_bn_relu") return BlockOrder::kConvBnRelu;
  if (s == "conv_relu_bn") return BlockOrder::kConvReluBn;
  throw InvalidConfig("unknown block_order '" + s + "'");
}

template <typename T>
double GradientSet<T>::l2_norm() const {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (T v : g) sq += double(v) * double(v);
  }
  return std::sqrt(sq);
}

template <typename T>
void GradientSet<T>::scale(T s) {
  for (auto& g : grads) {
    for (T& v : g) v *= s;
  }
}

template <typename T>
SrModel<T>::SrModel(ModelConfig config, std::vector<ConvBlock<T>> blocks, ConvParams<T> recon)
    : config_(config), blocks_(std::move(blocks)), recon_(std::move(recon)) {
  config_.validate();
  if (blocks_.size() != config_.mapping_layers + 1) throw InvalidConfig("block count does not match config");
  const std::size_t want = config_.image_channels * config_.scale * config_.scale;
  if (recon_.out_channels() != want) throw InvalidConfig("reconstruction conv must emit c*r^2 channels");
}

namespace {

std::string block_prefix(std::size_t i) {
  return i == 0 ? std::string("feat.0") : "map." + std::to_string(i - 1);
}

std::vector<std::size_t> dims_of(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

template <typename T>
template <typename Slot, typename Self>
std::vector<Slot> SrModel<T>::collect(Self& self, bool with_running) {
  std::vector<Slot> out;
  auto add_conv = [&out](const std::string& prefix, auto& conv) {
    out.push_back({prefix + ".weight", dims_of(conv.weight.shape()), conv.weight.data()});
    if (!conv.bias.empty()) out.push_back({prefix + ".bias", {conv.bias.size()}, std::span(conv.bias)});
  };
  for (std::size_t i = 0; i < self.blocks_.size(); ++i) {
    auto& b = self.blocks_[i];
    const std::string prefix = block_prefix(i);
    add_conv(prefix, b.conv);
    if (b.bn) {
      auto& bn = *b.bn;
      out.push_back({prefix + ".bn_gamma", {bn.gamma.size()}, std::span(bn.gamma)});
      out.push_back({prefix + ".bn_beta", {bn.beta.size()}, std::span(bn.beta)});
      if (with_running) {
        out.push_back({prefix + ".bn_mean", {bn.running_mean.size()}, std::span(bn.running_mean)});
        out.push_back({prefix + ".bn_var", {bn.running_var.size()}, std::span(bn.running_var)});
      }
    }
  }
  add_conv("recon.0", self.recon_);
  return out;
}

template <typename T>
std::vector<ParamSlot<T>> SrModel<T>::parameters() {
  ++generation_;
  return collect<ParamSlot<T>>(*this, false);
}

template <typename T>
std::vector<ConstParamSlot<T>> SrModel<T>::parameters() const {
  return collect<ConstParamSlot<T>>(*this, false);
}

template <typename T>
std::vector<ParamSlot<T>> SrModel<T>::state() {
  ++generation_;
  return collect<ParamSlot<T>>(*this, true);
}

template <typename T>
std::vector<ConstParamSlot<T>> SrModel<T>::state() const {
  return collect<ConstParamSlot<T>>(*this, true);
}

template <typename T>
BasicTensor<T> SrModel<T>::run_forward(const BasicTensor<T>& lr, Mode mode, ModelCache<T>* cache,
                                       std::vector<BatchNormParams<T>*> bns) const {
  if (lr.shape().c != config_.image_channels) {
    throw ShapeMismatch("model expects " + std::to_string(config_.image_channels) + " channels, input is " +
                        lr.shape().str());
  }
  if (cache) {
    cache->mode = mode;
    cache->owner = this;
    cache->generation = generation_;
    cache->blocks.clear();
    cache->blocks.reserve(blocks_.size());
  }

  BasicTensor<T> x = lr;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const ConvBlock<T>& block = blocks_[i];
    auto conv = conv2d_forward(x, block.conv);
    BlockCache<T> bc;
    bc.conv = std::move(conv.cache);
    x = std::move(conv.y);

    auto apply_bn = [&]() {
      if (!block.bn) return;
      auto bn = mode == Mode::kTrain ? batchnorm_forward(x, *bns[i], Mode::kTrain) : batchnorm_infer(x, *block.bn);
      x = std::move(bn.y);
      bc.bn = std::move(bn.cache);
    };
    if (config_.block_order == BlockOrder::kConvBnRelu) apply_bn();
    auto relu = relu_forward(x);
    x = std::move(relu.y);
    bc.relu_mask = std::move(relu.mask);
    if (config_.block_order == BlockOrder::kConvReluBn) apply_bn();
    if (cache) cache->blocks.push_back(std::move(bc));
  }

  auto recon = conv2d_forward(x, recon_);
  BasicTensor<T> out = pixel_shuffle(recon.y, config_.scale);
  if (cache) {
    cache->recon = std::move(recon.cache);
    cache->output_shape = out.shape();
  }
  if (config_.residual) out = add(out, bicubic_upscale(lr, config_.scale));
  if (mode == Mode::kInfer && config_.final_activation == FinalActivation::kClamp01) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k], T(0), T(1));
  }
  return out;
}

template <typename T>
ForwardResult<T> SrModel<T>::forward(const BasicTensor<T>& lr, Mode mode) {
  std::vector<BatchNormParams<T>*> bns(blocks_.size(), nullptr);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].bn) bns[i] = &*blocks_[i].bn;
  }
  ForwardResult<T> r;
  r.sr = run_forward(lr, mode, &r.cache, std::move(bns));
  return r;
}

template <typename T>
BasicTensor<T> SrModel<T>::infer(const BasicTensor<T>& lr) const {
  return run_forward(lr, Mode::kInfer, nullptr, {});
}

template <typename T>
GradientSet<T> SrModel<T>::backward(const ModelCache<T>& cache, const BasicTensor<T>& d_out) const {
  if (cache.mode != Mode::kTrain) throw InvalidState("model backward needs a train-mode cache");
  if (cache.owner != this || cache.generation != generation_ || cache.blocks.size() != blocks_.size()) {
    throw InvalidState("model cache is stale or belongs to another model");
  }
  if (d_out.shape() != cache.output_shape) {
    throw ShapeMismatch("output gradient " + d_out.shape().str() + " vs " + cache.output_shape.str());
  }

  // Parameter slots in canonical order; filled back-to-front below.
  const auto slots = parameters();
  GradientSet<T> g;
  g.names.reserve(slots.size());
  g.grads.resize(slots.size());
  for (const auto& s : slots) g.names.push_back(s.name);
  std::size_t slot = slots.size();

  // The residual skip and identity final activation pass d_out straight to
  // the shuffled reconstruction output.
  auto recon = conv2d_backward(pixel_unshuffle(d_out, config_.scale), cache.recon);
  g.grads[--slot] = std::move(recon.d_bias);
  g.grads[--slot] = recon.d_weight.vec();
  BasicTensor<T> dx = std::move(recon.d_input);

  for (std::size_t i = blocks_.size(); i-- > 0;) {
    const BlockCache<T>& bc = cache.blocks[i];
    std::vector<T> d_gamma, d_beta;
    auto back_bn = [&]() {
      if (!bc.bn) return;
      auto bg = batchnorm_backward(dx, *bc.bn);
      dx = std::move(bg.d_input);
      d_gamma = std::move(bg.d_gamma);
      d_beta = std::move(bg.d_beta);
    };
    if (config_.block_order == BlockOrder::kConvReluBn) back_bn();
    dx = relu_backward(dx, bc.relu_mask);
    if (config_.block_order == BlockOrder::kConvBnRelu) back_bn();
    if (blocks_[i].bn) {
      g.grads[--slot] = std::move(d_beta);
      g.grads[--slot] = std::move(d_gamma);
    }
    auto cg = conv2d_backward(dx, bc.conv);
    if (!blocks_[i].conv.bias.empty()) g.grads[--slot] = std::move(cg.d_bias);
    g.grads[--slot] = cg.d_weight.vec();
    dx = std::move(cg.d_input);
  }
  return g;
}

template <typename T>
template <typename U>
SrModel<U> SrModel<T>::cast() const {
  auto cast_conv = [](const ConvParams<T>& p) {
    ConvParams<U> q;
    q.weight = p.weight.template cast<U>();
    q.bias.assign(p.bias.begin(), p.bias.end());
    q.stride = p.stride;
    q.pad = p.pad;
    return q;
  };
  std::vector<ConvBlock<U>> blocks;
  for (const auto& b : blocks_) {
    ConvBlock<U> nb;
    nb.conv = cast_conv(b.conv);
    if (b.bn) {
      BatchNormParams<U> bn;
      bn.gamma.assign(b.bn->gamma.begin(), b.bn->gamma.end());
      bn.beta.assign(b.bn->beta.begin(), b.bn->beta.end());
      bn.running_mean.assign(b.bn->running_mean.begin(), b.bn->running_mean.end());
      bn.running_var.assign(b.bn->running_var.begin(), b.bn->running_var.end());
      bn.eps = U(b.bn->eps);
      bn.momentum = U(b.bn->momentum);
      nb.bn = std::move(bn);
    }
    blocks.push_back(std::move(nb));
  }
  return SrModel<U>(config_, std::move(blocks), cast_conv(recon_));
}

constexpr double kReconInitScale = 0.1;

template <typename T>
SrModel<T> model_init(const ModelConfig& config, Rng& rng) {
  config.validate();
  const std::size_t k = config.kernel_size;
  std::vector<ConvBlock<T>> blocks;
  for (std::size_t i = 0; i <= config.mapping_layers; ++i) {
    ConvBlock<T> b;
    const std::size_t in_c = i == 0 ? config.image_channels : config.feat_channels;
    b.conv = conv_init<T>(in_c, config.feat_channels, k, rng);
    if (config.use_batchnorm) {
      b.bn = batchnorm_init<T>(config.feat_channels);
      // A bias directly ahead of batchnorm is cancelled by the mean subtraction.
      if (config.block_order == BlockOrder::kConvBnRelu) b.conv.bias.clear();
    }
    blocks.push_back(std::move(b));
  }
  auto recon = conv_init<T>(config.feat_channels, config.image_channels * config.scale * config.scale, k, rng);
  // Start near the skip path: the initial residual is a tenth of He scale.
  for (T& w : recon.weight.data()) w *= T(kReconInitScale);
  return SrModel<T>(config, std::move(blocks), std::move(recon));
}

template <typename T>
std::size_t model_num_params(const SrModel<T>& m) {
  std::size_t total = 0;
  for (const auto& slot : m.parameters()) total += slot.values.size();
  return total;
}

std::size_t expected_num_params(const ModelConfig& config) {
  const std::size_t k2 = config.kernel_size * config.kernel_size;
  const std::size_t f = config.feat_channels;
  const std::size_t c = config.image_channels;
  const std::size_t out = c * config.scale * config.scale;
  const std::size_t blocks = config.mapping_layers + 1;
  std::size_t total = f * c * k2 + config.mapping_layers * f * f * k2 + out * f * k2 + out;
  if (!config.use_batchnorm || config.block_order == BlockOrder::kConvReluBn) total += blocks * f;
  if (config.use_batchnorm) total += blocks * 2 * f;
  return total;
}

template struct GradientSet<float>;
template struct GradientSet<double>;
template class SrModel<float>;
template class SrModel<double>;
template SrModel<double> SrModel<float>::cast<double>() const;
template SrModel<float> SrModel<double>::cast<float>() const;
template SrModel<float> SrModel<float>::cast<float>() const;
template SrModel<double> SrModel<double>::cast<double>() const;
template SrModel<float> model_init<float>(const ModelConfig&, Rng&);
template SrModel<double> model_init<double>(const ModelConfig&, Rng&);
template std::size_t model_num_params<float>(const SrModel<float>&);
template std::size_t model_num_params<double>(const SrModel<double>&);

}  // namespace srres
