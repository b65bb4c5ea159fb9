#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "srres/image.hpp"
#include "srres/tensor.hpp"

namespace srres {

enum class Split { kTrain, kVal };

struct ManifestEntry {
  std::string name;
  std::size_t width = 0;
  std::size_t height = 0;
  Split split = Split::kTrain;
};

struct DatasetManifest {
  std::string root;
  std::size_t scale = 2;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> images;

  std::vector<ManifestEntry> entries(Split split) const;
  /// {root, scale, seed, images[{name, w, h, split}]}, images sorted by name.
  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

/// Sorted list of `*.png` file names directly under `root`.
std::vector<std::string> list_png(const std::string& root);

/// Decodes every PNG under `root` and assigns round(ratio * count) of a
/// seeded shuffle to train, the rest to val. Both splits must end up
/// non-empty, otherwise EmptyDataset.
DatasetManifest build_manifest(const std::string& root, std::size_t scale, double split_ratio, std::uint64_t seed);

struct LrImage {
  Image8 image;
  /// Samples that fell outside [0, 1] before quantization.
  std::size_t clamped = 0;
};

/// LR image as stored on disk: per-channel degrade() of the HR image,
/// clamped and quantized to 8 bits.
LrImage make_lr_image(const Image8& hr, std::size_t r);

/// Cache directory `<root>/.lr_x<r>/`.
std::string lr_cache_dir(const std::string& root, std::size_t r);

/// Aligned luma planes of one image. `hr` is cropped to a multiple of r.
struct ImagePair {
  std::string name;
  Tensor hr;
  Tensor lr;
};

struct LoadedImages {
  std::vector<ImagePair> pairs;
  std::size_t clamped = 0;
};

/// Loads HR images, reading LR ones from the cache or producing (and caching)
/// them. `use_cache` = false keeps everything in memory.
LoadedImages load_pairs(const std::string& root, const std::vector<std::string>& names, std::size_t r,
                        bool use_cache = true);

struct SamplePair {
  Tensor lr_patch;
  Tensor hr_patch;
  std::size_t image_index = 0;
  /// Top-left corner in LR pixels.
  std::size_t top = 0;
  std::size_t left = 0;
};

/// Draws `count` patches: image uniformly, then a uniform top-left corner.
/// Throws InvalidShape when the smallest LR image cannot hold a patch.
std::vector<SamplePair> sample_patches(const std::vector<ImagePair>& images, std::size_t count, std::size_t patch,
                                       std::size_t r, Rng& rng, bool hflip = false);

/// Number of non-overlapping LR tiles of side `patch` across `images`.
std::size_t tile_count(const std::vector<ImagePair>& images, std::size_t patch);

/// Cuts an (h, w) window starting at (top, left) from a single-image tensor.
Tensor crop(const Tensor& t, std::size_t top, std::size_t left, std::size_t h, std::size_t w);

struct Batch {
  Tensor lr;
  Tensor hr;
};

Batch stack_batch(const std::vector<SamplePair>& pairs);

}  // namespace srres
