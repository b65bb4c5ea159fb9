#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "srres/baselines.hpp"
#include "srres/metrics.hpp"
#include "srres/model.hpp"

namespace srres {

struct BenchRow {
  std::string method;
  std::string image;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// Worker count from SRRES_THREADS (>= 1), defaulting to the hardware count.
std::size_t thread_budget();

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// A named luma upscaler: "nearest", "bilinear", "bicubic" or "model:<ckpt>".
struct Method {
  std::string name;
  std::function<Tensor(const Tensor&)> upscale;
  std::size_t scale = 1;
};

/// Throws UnknownMethod for unrecognised names and InvalidConfig when a
/// checkpoint's scale differs from `scale`.
Method make_method(const std::string& name, std::size_t scale);

/// Scores every method on every PNG under `data_root` (sorted by name):
/// LR images come from the standard degradation, outputs are clamped to
/// [0, 1] and scored on luma with an r-pixel border crop. Rows are grouped
/// by method in the given order, then by image name.
std::vector<BenchRow> run_bench(const std::string& data_root, const std::vector<std::string>& methods,
                                std::size_t scale, bool use_cache = true);

/// Per-method means in input order.
std::vector<BenchRow> bench_means(const std::vector<BenchRow>& rows);

/// `method,image,psnr_db,ssim` with `method,MEAN,...` rows appended;
/// +infinity is written as `inf`.
std::string bench_csv(const std::vector<BenchRow>& rows);
/// Parses bench_csv output, MEAN rows included.
std::vector<BenchRow> parse_bench_csv(const std::string& text);

/// Upscales a gray or RGB [0, 1] image: luma through `luma_upscale`, chroma
/// through bicubic, then back to the input's color space.
Tensor upscale_color(const Tensor& img, std::size_t scale, const std::function<Tensor(const Tensor&)>& luma_upscale);

/// Model super-resolution of one PNG into an 8-bit PNG exactly r times larger.
void infer_png(const SrModel<float>& model, const std::string& input, const std::string& output);

struct DegradeSummary {
  std::size_t images = 0;
  std::size_t clamped = 0;
};

/// Writes the LR version of every PNG in `input_dir` to `output_dir`.
DegradeSummary degrade_dir(const std::string& input_dir, std::size_t scale, const std::string& output_dir);

}  // namespace srres
