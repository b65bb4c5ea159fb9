#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srres/layers.hpp"
#include "srres/tensor.hpp"

namespace srres {

enum class FinalActivation { kIdentity, kClamp01 };
/// Where batch normalization sits inside a conv block.
enum class BlockOrder { kConvBnRelu, kConvReluBn };

struct ModelConfig {
  std::size_t scale = 2;
  std::size_t image_channels = 1;
  std::size_t feat_channels = 32;
  std::size_t mapping_layers = 3;
  std::size_t kernel_size = 3;
  bool use_batchnorm = true;
  BlockOrder block_order = BlockOrder::kConvBnRelu;
  bool residual = true;
  /// Applied in infer mode only; training always sees the raw output.
  FinalActivation final_activation = FinalActivation::kIdentity;

  /// Throws InvalidConfig.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string to_string(FinalActivation a);
std::string to_string(BlockOrder o);
FinalActivation parse_final_activation(const std::string& s);
BlockOrder parse_block_order(const std::string& s);

/// Conv followed by optional batchnorm and a ReLU, in `ModelConfig::block_order`.
/// In conv-bn-relu order the conv carries no bias.
template <typename T>
struct ConvBlock {
  ConvParams<T> conv;
  std::optional<BatchNormParams<T>> bn;
};

/// Mutable view of one named parameter buffer. Names follow
/// "stage.index.kind", e.g. "map.1.weight" or "feat.0.bn_gamma".
template <typename T>
struct ParamSlot {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<T> values;
};

template <typename T>
struct ConstParamSlot {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<const T> values;
};

/// Gradients aligned index-for-index with SrModel::parameters().
template <typename T>
struct GradientSet {
  std::vector<std::string> names;
  std::vector<std::vector<T>> grads;

  double l2_norm() const;
  void scale(T s);
};

template <typename T>
struct BlockCache {
  ConvCache<T> conv;
  std::optional<BatchNormCache<T>> bn;
  BasicTensor<T> relu_mask;
};

template <typename T>
struct ModelCache {
  Mode mode = Mode::kInfer;
  const void* owner = nullptr;
  std::uint64_t generation = 0;
  std::vector<BlockCache<T>> blocks;
  ConvCache<T> recon;
  Shape output_shape;
};

template <typename T>
struct ForwardResult {
  BasicTensor<T> sr;
  ModelCache<T> cache;
};

/// Three-stage network: a feature-extraction block, `mapping_layers`
/// mapping blocks, then a reconstruction conv producing c*r^2 channels that
/// a single pixel shuffle turns into the r-times larger image. The body runs
/// at LR resolution. With `residual` set the bicubic upscale of the input is
/// added to the network output.
template <typename T>
class SrModel {
 public:
  SrModel() = default;
  SrModel(ModelConfig config, std::vector<ConvBlock<T>> blocks, ConvParams<T> recon);

  const ModelConfig& config() const { return config_; }
  /// blocks()[0] is the feature stage, the rest are mapping layers.
  const std::vector<ConvBlock<T>>& blocks() const { return blocks_; }
  const ConvParams<T>& reconstruction() const { return recon_; }

  /// Trainable parameters in canonical order. Taking mutable views bumps
  /// the generation so caches from earlier forwards become stale.
  std::vector<ParamSlot<T>> parameters();
  std::vector<ConstParamSlot<T>> parameters() const;
  /// Trainable parameters interleaved with the batchnorm running moments
  /// ("*.bn_mean", "*.bn_var"); this is what a checkpoint stores.
  std::vector<ParamSlot<T>> state();
  std::vector<ConstParamSlot<T>> state() const;

  std::uint64_t generation() const { return generation_; }

  /// Train mode updates batchnorm running moments.
  ForwardResult<T> forward(const BasicTensor<T>& lr, Mode mode);
  /// Infer-only path usable on a const model.
  BasicTensor<T> infer(const BasicTensor<T>& lr) const;
  GradientSet<T> backward(const ModelCache<T>& cache, const BasicTensor<T>& d_out) const;

  template <typename U>
  SrModel<U> cast() const;

 private:
  template <typename Slot, typename Self>
  static std::vector<Slot> collect(Self& self, bool with_running);
  BasicTensor<T> run_forward(const BasicTensor<T>& lr, Mode mode, ModelCache<T>* cache,
                             std::vector<BatchNormParams<T>*> bns) const;

  ModelConfig config_;
  std::vector<ConvBlock<T>> blocks_;
  ConvParams<T> recon_;
  std::uint64_t generation_ = 0;
};

template <typename T>
SrModel<T> model_init(const ModelConfig& config, Rng& rng);

template <typename T>
ForwardResult<T> model_forward(SrModel<T>& m, const BasicTensor<T>& lr, Mode mode) {
  return m.forward(lr, mode);
}
template <typename T>
GradientSet<T> model_backward(const SrModel<T>& m, const ModelCache<T>& cache, const BasicTensor<T>& d_out) {
  return m.backward(cache, d_out);
}

/// Number of trainable scalars.
template <typename T>
std::size_t model_num_params(const SrModel<T>& m);

/// Closed form: sum over conv layers of out*in*k^2 + out, minus the biases
/// of convs feeding straight into batchnorm, plus 2*feat per batchnorm layer.
std::size_t expected_num_params(const ModelConfig& config);

}  // namespace srres
