// srres: train, run and benchmark the super-resolution network.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srres/checkpoint.hpp"
#include "srres/config.hpp"
#include "srres/pipeline.hpp"
#include "srres/train.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

int exit_code_for(const srres::Error& e) {
  switch (e.code()) {
    case srres::ErrorCode::kNonFiniteLoss: return kNumericFailure;
    case srres::ErrorCode::kInvalidConfig:
    case srres::ErrorCode::kUnknownMethod: return kUsage;
    default: return kDataError;
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  srres::write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void print_means(const std::vector<srres::BenchRow>& rows) {
  for (const auto& m : srres::bench_means(rows)) {
    std::printf("%-28s PSNR %8.4f dB  SSIM %.5f\n", m.method.c_str(), m.psnr_db, m.ssim);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"srres - single-image super-resolution"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a model from a directory of PNG images");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  std::map<std::string, std::string> overrides;
  train->add_option("--config", config_path, "Flat key = value config file");
  train->add_option("--seed", seed, "Override the data/initialization seed");
  train->add_flag("--resume", resume, "Continue from <out_dir>/last.srck");
  for (const auto& key : srres::config_keys()) {
    if (key == "seed") continue;
    train->add_option_function<std::string>(
        "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; }, "Override config key " + key);
  }

  // infer
  auto* infer = app.add_subcommand("infer", "Super-resolve one PNG");
  std::string ckpt, input, output;
  infer->add_option("--ckpt", ckpt, "Checkpoint (.srck with .json sidecar)")->required();
  infer->add_option("--input", input, "Input PNG")->required();
  infer->add_option("--out", output, "Output PNG")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a directory of HR images");
  std::string data_dir, report;
  eval->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval->add_option("--data", data_dir, "Directory of HR PNG images")->required();
  eval->add_option("--report", report, "CSV report path")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Compare upscaling methods on a directory of HR images");
  std::string methods = "nearest,bilinear,bicubic";
  std::size_t scale = 2;
  bench->add_option("--data", data_dir, "Directory of HR PNG images")->required();
  bench->add_option("--methods", methods, "Comma list of nearest, bilinear, bicubic, model:<ckpt>");
  bench->add_option("--scale", scale, "Upscale factor")->check(CLI::PositiveNumber);
  bench->add_option("--report", report, "CSV report path")->required();

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Write LR versions of every PNG in a directory");
  std::string out_dir;
  degrade->add_option("--input", input, "Directory of HR PNG images")->required();
  degrade->add_option("--scale", scale, "Downscale factor")->required()->check(CLI::PositiveNumber);
  degrade->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) {
      srres::RunConfig cfg;
      if (!config_path.empty()) srres::apply_config(cfg, srres::read_config_file(config_path));
      srres::apply_config(cfg, overrides);
      if (seed) cfg.data.seed = *seed;
      cfg.resume = resume;
      const auto result = srres::train(cfg, [](const srres::LogRow& row) {
        std::printf("epoch %3zu  step %7zu  loss %.6g  val PSNR %.4f dB\n", row.epoch, row.step, row.train_loss,
                    row.val_psnr);
        std::fflush(stdout);
      });
      if (result.clamped_samples > 0) {
        std::printf("note: %zu LR samples were clamped to [0, 1]\n", result.clamped_samples);
      }
      std::printf("best val PSNR %.4f dB at epoch %zu -> %s\n", result.best_val_psnr, result.best_epoch,
                  result.best_checkpoint.c_str());
    } else if (infer->parsed()) {
      srres::infer_png(srres::load_checkpoint(ckpt), input, output);
    } else if (eval->parsed()) {
      const auto model = srres::load_checkpoint(ckpt);
      const auto rows = srres::run_bench(data_dir, {"model:" + ckpt}, model.config().scale);
      write_text(report, srres::bench_csv(rows));
      print_means(rows);
    } else if (bench->parsed()) {
      const auto rows = srres::run_bench(data_dir, split_commas(methods), scale);
      write_text(report, srres::bench_csv(rows));
      print_means(rows);
    } else if (degrade->parsed()) {
      const auto summary = srres::degrade_dir(input, scale, out_dir);
      std::printf("wrote %zu images (%zu samples clamped)\n", summary.images, summary.clamped);
    }
  } catch (const srres::Error& e) {
    std::cerr << "srres: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "srres: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}
