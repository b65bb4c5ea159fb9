#include "srres/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "srres/baselines.hpp"
#include "srres/metrics.hpp"

namespace fs = std::filesystem;

namespace srres {

namespace {

const char* split_name(Split s) { return s == Split::kTrain ? "train" : "val"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  throw InvalidConfig("unknown split '" + s + "'");
}

}  // namespace

std::vector<ManifestEntry> DatasetManifest::entries(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : images) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

std::string DatasetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["root"] = root;
  j["scale"] = scale;
  j["seed"] = seed;
  auto list = nlohmann::ordered_json::array();
  for (const auto& e : images) {
    nlohmann::ordered_json item;
    item["name"] = e.name;
    item["w"] = e.width;
    item["h"] = e.height;
    item["split"] = split_name(e.split);
    list.push_back(std::move(item));
  }
  j["images"] = std::move(list);
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetManifest m;
    m.root = j.at("root").get<std::string>();
    m.scale = j.at("scale").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& item : j.at("images")) {
      m.images.push_back({item.at("name").get<std::string>(), item.at("w").get<std::size_t>(),
                          item.at("h").get<std::size_t>(), parse_split(item.at("split").get<std::string>())});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("bad manifest: ") + e.what());
  }
}

std::vector<std::string> list_png(const std::string& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw EmptyDataset("not a directory: " + root);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return char(std::tolower(ch)); });
    if (ext == ".png") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

DatasetManifest build_manifest(const std::string& root, std::size_t scale, double split_ratio, std::uint64_t seed) {
  if (scale < 1) throw InvalidConfig("scale must be >= 1");
  if (!(split_ratio >= 0.0 && split_ratio <= 1.0)) throw InvalidConfig("split ratio must be in [0, 1]");
  const auto names = list_png(root);
  if (names.size() < 2) throw EmptyDataset(root + " holds fewer than 2 PNG images");

  DatasetManifest m;
  m.root = root;
  m.scale = scale;
  m.seed = seed;
  for (const auto& name : names) {
    const Image8 img = read_png((fs::path(root) / name).string());
    m.images.push_back({name, img.width, img.height, Split::kVal});
  }

  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto n_train = static_cast<std::size_t>(std::llround(split_ratio * double(names.size())));
  if (n_train == 0) throw EmptyDataset("split ratio leaves the train split empty");
  if (n_train >= names.size()) throw EmptyDataset("split ratio leaves the validation split empty");
  for (std::size_t i = 0; i < n_train; ++i) m.images[order[i]].split = Split::kTrain;
  return m;
}

LrImage make_lr_image(const Image8& hr, std::size_t r) {
  const Tensor lr = degrade(image_to_tensor(hr), r);
  LrImage out;
  for (float v : lr.data()) {
    if (v < 0.0f || v > 1.0f) ++out.clamped;
  }
  out.image = tensor_to_image(lr);
  return out;
}

std::string lr_cache_dir(const std::string& root, std::size_t r) {
  return (fs::path(root) / (".lr_x" + std::to_string(r))).string();
}

LoadedImages load_pairs(const std::string& root, const std::vector<std::string>& names, std::size_t r,
                        bool use_cache) {
  LoadedImages out;
  const fs::path cache_dir = lr_cache_dir(root, r);
  for (const auto& name : names) {
    const Image8 hr8 = read_png((fs::path(root) / name).string());
    Tensor hr = crop_to_multiple(to_luma(image_to_tensor(hr8)), r);
    const std::size_t lh = hr.shape().h / r;
    const std::size_t lw = hr.shape().w / r;

    Image8 lr8;
    bool have = false;
    const fs::path cached = cache_dir / name;
    std::error_code ec;
    if (use_cache && fs::exists(cached, ec)) {
      try {
        lr8 = read_png(cached.string());
        have = lr8.width == lw && lr8.height == lh && lr8.channels == hr8.channels;
      } catch (const DecodeError&) {
        have = false;
      }
    }
    if (!have) {
      LrImage made = make_lr_image(hr8, r);
      out.clamped += made.clamped;
      lr8 = std::move(made.image);
      if (use_cache) {
        fs::create_directories(cache_dir, ec);
        try {
          write_png(cached.string(), lr8);
        } catch (const IoError&) {
          // Read-only dataset roots simply run uncached.
        }
      }
    }
    out.pairs.push_back({name, std::move(hr), to_luma(image_to_tensor(lr8))});
  }
  return out;
}

Tensor crop(const Tensor& t, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  const Shape& s = t.shape();
  if (s.n != 1 || top + h > s.h || left + w > s.w) throw InvalidShape("crop window outside " + s.str());
  Tensor out({1, s.c, h, w}, 0.0f);
  for (std::size_t c = 0; c < s.c; ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const float* src = t.plane_ptr(0, c) + (top + y) * s.w + left;
      std::copy(src, src + w, out.plane_ptr(0, c) + y * w);
    }
  }
  return out;
}

namespace {

Tensor flip_horizontal(const Tensor& t) {
  const Shape& s = t.shape();
  Tensor out(s, 0.0f);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) out(n, c, y, x) = t(n, c, y, s.w - 1 - x);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<SamplePair> sample_patches(const std::vector<ImagePair>& images, std::size_t count, std::size_t patch,
                                       std::size_t r, Rng& rng, bool hflip) {
  if (count == 0) return {};
  if (images.empty()) throw EmptyDataset("no images to sample from");
  if (patch == 0) throw InvalidShape("patch size must be >= 1");
  for (const auto& img : images) {
    const Shape& s = img.lr.shape();
    if (patch > s.h || patch > s.w || img.hr.shape().h != s.h * r || img.hr.shape().w != s.w * r) {
      throw InvalidShape("patch " + std::to_string(patch) + "x" + std::to_string(r) +
                         " does not fit image " + img.name);
    }
  }
  std::vector<SamplePair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = rng.below(images.size());
    const ImagePair& img = images[idx];
    const std::size_t top = rng.below(img.lr.shape().h - patch + 1);
    const std::size_t left = rng.below(img.lr.shape().w - patch + 1);
    SamplePair p;
    p.image_index = idx;
    p.top = top;
    p.left = left;
    p.lr_patch = crop(img.lr, top, left, patch, patch);
    p.hr_patch = crop(img.hr, top * r, left * r, patch * r, patch * r);
    if (hflip && rng.uniform() < 0.5) {
      p.lr_patch = flip_horizontal(p.lr_patch);
      p.hr_patch = flip_horizontal(p.hr_patch);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t tile_count(const std::vector<ImagePair>& images, std::size_t patch) {
  std::size_t total = 0;
  for (const auto& img : images) total += (img.lr.shape().h / patch) * (img.lr.shape().w / patch);
  return total;
}

Batch stack_batch(const std::vector<SamplePair>& pairs) {
  if (pairs.empty()) throw InvalidShape("cannot stack an empty batch");
  const Shape ls = pairs.front().lr_patch.shape();
  const Shape hs = pairs.front().hr_patch.shape();
  Batch b{Tensor({pairs.size(), ls.c, ls.h, ls.w}, 0.0f), Tensor({pairs.size(), hs.c, hs.h, hs.w}, 0.0f)};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].lr_patch.shape() != ls || pairs[i].hr_patch.shape() != hs) throw ShapeMismatch("ragged batch");
    std::copy(pairs[i].lr_patch.data().begin(), pairs[i].lr_patch.data().end(), b.lr.plane_ptr(i, 0));
    std::copy(pairs[i].hr_patch.data().begin(), pairs[i].hr_patch.data().end(), b.hr.plane_ptr(i, 0));
  }
  return b;
}

}  // namespace srres
