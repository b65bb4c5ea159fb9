#include "srres/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <thread>

#include "srres/checkpoint.hpp"
#include "srres/data.hpp"
#include "srres/image.hpp"

namespace fs = std::filesystem;

namespace srres {

std::size_t thread_budget() {
  if (const char* env = std::getenv("SRRES_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return std::size_t(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Method make_method(const std::string& name, std::size_t scale) {
  if (auto mode = parse_resample_mode(name)) {
    const ResampleMode m = *mode;
    return {name,
            [m, scale](const Tensor& lr) {
              return resample_to(lr, lr.shape().h * scale, lr.shape().w * scale, m);
            },
            scale};
  }
  if (name.rfind("model:", 0) == 0) {
    auto model = std::make_shared<const SrModel<float>>(load_checkpoint(name.substr(6)));
    if (model->config().scale != scale) {
      throw InvalidConfig("checkpoint scale " + std::to_string(model->config().scale) + " differs from " +
                          std::to_string(scale));
    }
    return {name, [model](const Tensor& lr) { return model->infer(lr); }, scale};
  }
  throw UnknownMethod("'" + name + "' (expected nearest, bilinear, bicubic or model:<ckpt>)");
}

std::vector<BenchRow> run_bench(const std::string& data_root, const std::vector<std::string>& methods,
                                std::size_t scale, bool use_cache) {
  if (methods.empty()) throw InvalidConfig("at least one method is required");
  std::vector<Method> resolved;
  for (const auto& name : methods) resolved.push_back(make_method(name, scale));

  const auto names = list_png(data_root);
  if (names.empty()) throw EmptyDataset("no PNG images under " + data_root);
  const LoadedImages images = load_pairs(data_root, names, scale, use_cache);

  const std::size_t per_method = images.pairs.size();
  std::vector<BenchRow> rows(resolved.size() * per_method);
  parallel_for(rows.size(), thread_budget(), [&](std::size_t k) {
    const Method& m = resolved[k / per_method];
    const ImagePair& img = images.pairs[k % per_method];
    Tensor sr = m.upscale(img.lr);
    for (float& v : sr.data()) v = std::clamp(v, 0.0f, 1.0f);
    const MetricReport rep = evaluate_pair(sr, img.hr, scale);
    rows[k] = {m.name, img.name, rep.psnr_db, rep.ssim};
  });
  return rows;
}

std::vector<BenchRow> bench_means(const std::vector<BenchRow>& rows) {
  std::vector<BenchRow> means;
  std::vector<std::size_t> counts;
  for (const auto& row : rows) {
    auto it = std::find_if(means.begin(), means.end(), [&](const BenchRow& m) { return m.method == row.method; });
    if (it == means.end()) {
      means.push_back({row.method, "MEAN", 0.0, 0.0});
      counts.push_back(0);
      it = means.end() - 1;
    }
    it->psnr_db += row.psnr_db;
    it->ssim += row.ssim;
    ++counts[std::size_t(it - means.begin())];
  }
  for (std::size_t i = 0; i < means.size(); ++i) {
    means[i].psnr_db /= double(counts[i]);
    means[i].ssim /= double(counts[i]);
  }
  return means;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_number(const std::string& s) {
  if (s == "inf") return kPsnrInfinity;
  if (s == "-inf") return -kPsnrInfinity;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DecodeError("bad number '" + s + "' in CSV");
  }
}

}  // namespace

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "method,image,psnr_db,ssim\n";
  auto line = [&out](const BenchRow& r) {
    out += r.method + "," + r.image + "," + fmt(r.psnr_db) + "," + fmt(r.ssim) + "\n";
  };
  for (const auto& r : rows) line(r);
  for (const auto& r : bench_means(rows)) line(r);
  return out;
}

std::vector<BenchRow> parse_bench_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "method,image,psnr_db,ssim") throw DecodeError("missing CSV header");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Method names may contain ':' and '/', never ','; the last three fields are fixed.
    std::vector<std::string> f;
    std::size_t pos = line.size();
    for (int k = 0; k < 3; ++k) {
      const auto comma = line.rfind(',', pos - 1);
      if (comma == std::string::npos) throw DecodeError("short CSV row: " + line);
      f.insert(f.begin(), line.substr(comma + 1, pos - comma - 1));
      pos = comma;
    }
    rows.push_back({line.substr(0, pos), f[0], parse_number(f[1]), parse_number(f[2])});
  }
  return rows;
}

Tensor upscale_color(const Tensor& img, std::size_t scale, const std::function<Tensor(const Tensor&)>& luma_upscale) {
  const Shape& s = img.shape();
  if (s.n != 1 || (s.c != 1 && s.c != 3)) throw InvalidShape("expected a single gray or RGB image, got " + s.str());
  if (s.c == 1) return luma_upscale(img);

  const Tensor ycc = rgb_to_ycbcr(img);
  const std::size_t plane = s.plane();
  auto channel = [&](std::size_t c) {
    return Tensor({1, 1, s.h, s.w}, std::vector<float>(ycc.data().begin() + std::ptrdiff_t(c * plane),
                                                       ycc.data().begin() + std::ptrdiff_t((c + 1) * plane)));
  };
  const Tensor y = luma_upscale(channel(0));
  const Tensor cb = bicubic_upscale(channel(1), scale);
  const Tensor cr = bicubic_upscale(channel(2), scale);
  const Shape os{1, 3, s.h * scale, s.w * scale};
  if (y.shape() != Shape{1, 1, os.h, os.w}) throw ShapeMismatch("luma upscaler returned " + y.shape().str());
  std::vector<float> merged;
  merged.reserve(os.numel());
  for (const Tensor* t : {&y, &cb, &cr}) merged.insert(merged.end(), t->data().begin(), t->data().end());
  return ycbcr_to_rgb(Tensor(os, std::move(merged)));
}

void infer_png(const SrModel<float>& model, const std::string& input, const std::string& output) {
  const Image8 img = read_png(input);
  const Tensor sr = upscale_color(image_to_tensor(img), model.config().scale,
                                  [&model](const Tensor& y) { return model.infer(y); });
  write_png(output, tensor_to_image(sr));
}

DegradeSummary degrade_dir(const std::string& input_dir, std::size_t scale, const std::string& output_dir) {
  const auto names = list_png(input_dir);
  if (names.empty()) throw EmptyDataset("no PNG images under " + input_dir);
  fs::create_directories(output_dir);
  DegradeSummary summary;
  for (const auto& name : names) {
    const LrImage lr = make_lr_image(read_png((fs::path(input_dir) / name).string()), scale);
    write_png((fs::path(output_dir) / name).string(), lr.image);
    ++summary.images;
    summary.clamped += lr.clamped;
  }
  return summary;
}

}  // namespace srres
