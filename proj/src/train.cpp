#include "srres/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "srres/checkpoint.hpp"
#include "srres/metrics.hpp"
#include "srres/optim.hpp"

namespace fs = std::filesystem;

namespace srres {

double validation_psnr(const SrModel<float>& model, const std::vector<ImagePair>& images) {
  if (images.empty()) return 0.0;
  const std::size_t r = model.config().scale;
  double total = 0.0;
  for (const auto& img : images) {
    Tensor sr = model.infer(img.lr);
    for (float& v : sr.data()) v = std::clamp(v, 0.0f, 1.0f);
    total += evaluate_pair(sr, img.hr, r).psnr_db;
  }
  return total / double(images.size());
}

namespace {

std::vector<std::string> names_of(const std::vector<ManifestEntry>& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

std::string format_row(const LogRow& row) {
  std::ostringstream os;
  os << std::setprecision(17) << row.step << ',' << row.epoch << ',' << row.train_loss << ',';
  if (std::isinf(row.val_psnr)) {
    os << "inf";
  } else {
    os << row.val_psnr;
  }
  return os.str();
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::function<void(const LogRow&)>& on_row) {
  cfg.validate();
  const std::size_t r = cfg.model.scale;
  fs::create_directories(cfg.out_dir);

  const DatasetManifest manifest = build_manifest(cfg.data.root, r, cfg.data.split_ratio, cfg.data.seed);
  {
    std::ofstream(fs::path(cfg.out_dir) / "manifest.json") << manifest.to_json();
  }
  LoadedImages train_set = load_pairs(cfg.data.root, names_of(manifest.entries(Split::kTrain)), r, cfg.data.use_cache);
  LoadedImages val_set = load_pairs(cfg.data.root, names_of(manifest.entries(Split::kVal)), r, cfg.data.use_cache);

  TrainResult result;
  result.clamped_samples = train_set.clamped + val_set.clamped;
  result.best_checkpoint = (fs::path(cfg.out_dir) / "best.srck").string();
  result.last_checkpoint = (fs::path(cfg.out_dir) / "last.srck").string();
  result.log_path = (fs::path(cfg.out_dir) / "train_log.csv").string();

  Rng rng(cfg.data.seed);
  SrModel<float> model = model_init<float>(cfg.model, rng);
  std::size_t first_epoch = 1;
  if (cfg.resume && fs::exists(result.last_checkpoint)) {
    model = load_checkpoint(result.last_checkpoint);
    if (!(model.config() == cfg.model)) throw InvalidConfig("resume checkpoint was trained with a different model config");
    first_epoch = std::size_t(std::max(0, checkpoint_epoch(result.last_checkpoint))) + 1;
    // The sampler restarts from seed + first_epoch instead of replaying
    // earlier draws; Adam moments start from zero.
    rng = Rng(cfg.data.seed + first_epoch);
  }

  OptimState opt;
  opt.kind = cfg.optim.kind;
  opt.lr = cfg.optim.lr;
  opt.beta1 = cfg.optim.beta1;
  opt.beta2 = cfg.optim.beta2;
  opt.eps = cfg.optim.adam_eps;

  const std::size_t per_epoch_patches =
      cfg.optim.patches_per_epoch > 0 ? cfg.optim.patches_per_epoch
                                      : std::max<std::size_t>(1, tile_count(train_set.pairs, cfg.data.patch));
  const std::size_t steps_per_epoch = (per_epoch_patches + cfg.optim.batch_size - 1) / cfg.optim.batch_size;

  std::ofstream log(result.log_path, cfg.resume && first_epoch > 1 ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write " + result.log_path);
  if (first_epoch == 1) log << "step,epoch,train_loss,val_psnr\n";

  result.best_val_psnr = -std::numeric_limits<double>::infinity();
  if (first_epoch > 1 && fs::exists(result.best_checkpoint)) {
    result.best_val_psnr = validation_psnr(load_checkpoint(result.best_checkpoint), val_set.pairs);
    result.best_epoch = std::size_t(std::max(0, checkpoint_epoch(result.best_checkpoint)));
  }
  std::size_t step = (first_epoch - 1) * steps_per_epoch;
  double interval_sum = 0.0;
  std::size_t interval_steps = 0;

  auto emit = [&](std::size_t epoch) {
    LogRow row{step, epoch, interval_steps ? interval_sum / double(interval_steps) : 0.0,
               validation_psnr(model, val_set.pairs)};
    log << format_row(row) << '\n';
    log.flush();
    result.log.push_back(row);
    if (on_row) on_row(row);
    interval_sum = 0.0;
    interval_steps = 0;
    return row.val_psnr;
  };

  for (std::size_t epoch = first_epoch; epoch <= cfg.optim.epochs; ++epoch) {
    double epoch_sum = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t remaining = per_epoch_patches - s * cfg.optim.batch_size;
      const std::size_t bs = std::min(cfg.optim.batch_size, remaining);
      const Batch batch =
          stack_batch(sample_patches(train_set.pairs, bs, cfg.data.patch, r, rng, cfg.data.hflip));

      auto fwd = model.forward(batch.lr, Mode::kTrain);
      const auto loss = mse_loss(fwd.sr, batch.hr);
      if (!std::isfinite(loss.loss.value)) {
        throw NonFiniteLoss("loss became " + std::to_string(loss.loss.value) + " at step " + std::to_string(step + 1));
      }
      GradientSet<float> grads = model.backward(fwd.cache, loss.d_pred);
      if (cfg.optim.clip_norm > 0.0) clip_grad_norm(grads, cfg.optim.clip_norm);
      const auto params = model.parameters();
      optimizer_step<float>(params, grads, opt);

      ++step;
      epoch_sum += loss.loss.value;
      interval_sum += loss.loss.value;
      ++interval_steps;
      if (cfg.optim.eval_every > 0 && step % cfg.optim.eval_every == 0) emit(epoch);
    }
    result.epoch_losses.push_back(epoch_sum / double(steps_per_epoch));

    const double val = (cfg.optim.eval_every == 0 || interval_steps > 0) ? emit(epoch) : result.log.back().val_psnr;
    save_checkpoint(result.last_checkpoint, model, int(epoch));
    if (val > result.best_val_psnr) {
      result.best_val_psnr = val;
      result.best_epoch = epoch;
      save_checkpoint(result.best_checkpoint, model, int(epoch));
    }
  }
  result.steps = step;
  result.model = std::move(model);
  return result;
}

}  // namespace srres
