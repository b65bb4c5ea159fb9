#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "srres/config.hpp"
#include "srres/data.hpp"
#include "srres/model.hpp"

namespace srres {

struct LogRow {
  std::size_t step = 0;
  std::size_t epoch = 0;
  /// Mean training loss since the previous row.
  double train_loss = 0.0;
  double val_psnr = 0.0;
};

struct TrainResult {
  std::vector<LogRow> log;
  /// Mean training loss of every epoch, in order.
  std::vector<double> epoch_losses;
  double best_val_psnr = 0.0;
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
  std::string best_checkpoint;
  std::string last_checkpoint;
  std::string log_path;
  std::size_t clamped_samples = 0;
  SrModel<float> model;
};

/// Mean luma PSNR of `model` on `images` with an r-pixel border crop. The
/// model output is clamped to [0, 1] before scoring.
double validation_psnr(const SrModel<float>& model, const std::vector<ImagePair>& images);

/// Runs the full protocol: manifest, LR pairs, seeded patch sampling,
/// forward/backward/update, validation after every interval. Writes
/// `<out_dir>/{manifest.json, train_log.csv, best.srck, last.srck}`.
/// Throws NonFiniteLoss as soon as a batch loss is NaN or infinite.
TrainResult train(const RunConfig& cfg, const std::function<void(const LogRow&)>& on_row = {});

}  // namespace srres
