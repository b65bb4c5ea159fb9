#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "srres/model.hpp"
#include "srres/optim.hpp"

namespace srres {

struct TrainOptions {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
  /// Global L2 gradient clipping; 0 disables it.
  double clip_norm = 0.0;
  /// Patches drawn per epoch; 0 means one per non-overlapping LR tile of the
  /// training images.
  std::size_t patches_per_epoch = 0;
  /// Validation/log interval in steps; 0 means once per epoch.
  std::size_t eval_every = 0;
};

struct DataOptions {
  std::string root;
  std::size_t patch = 32;
  double split_ratio = 0.9;
  std::uint64_t seed = 0;
  bool hflip = false;
  bool use_cache = true;
};

struct RunConfig {
  ModelConfig model;
  TrainOptions optim;
  DataOptions data;
  std::string out_dir = "runs/srres";
  bool resume = false;

  /// Checks value ranges and that the data root exists.
  void validate() const;
};

/// Every recognised key, in a stable order. Each one is a CLI flag as well.
const std::vector<std::string>& config_keys();

/// Parses "key = value" lines. '#' starts a comment, blank lines are
/// ignored, values may be double-quoted. Unknown keys are rejected.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies key/value pairs on top of `cfg`. Throws InvalidConfig.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values);

/// Current value of `key` rendered the way the file format expects.
std::string config_value(const RunConfig& cfg, const std::string& key);
std::string render_config(const RunConfig& cfg);

}  // namespace srres
