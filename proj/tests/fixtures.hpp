#pragma once

// Test-only helpers: temporary directories and procedurally generated
// textured scenes (facades, window grids, stripes, edges) standing in for a
// natural-image dataset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "srres/image.hpp"
#include "srres/tensor.hpp"

namespace srres::fixture {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("srres_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// RGB scene in [0, 1] built from axis-aligned and slanted structures.
inline Image8 synth_scene(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> img(3 * h * w);
  auto set = [&](std::size_t y, std::size_t x, const double* rgb) {
    for (int c = 0; c < 3; ++c) img[(std::size_t(c) * h + y) * w + x] = rgb[c];
  };
  auto color = [&rng](double* rgb, double lo, double hi) {
    const double base = rng.uniform(lo, hi);
    for (int c = 0; c < 3; ++c) rgb[c] = std::clamp(base + rng.uniform(-0.12, 0.12), 0.0, 1.0);
  };

  // Sky-like vertical gradient.
  double top[3], bottom[3];
  color(top, 0.55, 0.95);
  color(bottom, 0.2, 0.6);
  for (std::size_t y = 0; y < h; ++y) {
    const double t = double(y) / double(h - 1);
    for (std::size_t x = 0; x < w; ++x) {
      double rgb[3];
      for (int c = 0; c < 3; ++c) rgb[c] = (1 - t) * top[c] + t * bottom[c];
      set(y, x, rgb);
    }
  }

  // Buildings with window grids.
  const std::size_t buildings = 3 + rng.below(3);
  for (std::size_t b = 0; b < buildings; ++b) {
    const std::size_t bw = w / 5 + rng.below(w / 3);
    const std::size_t bx = rng.below(w - std::min(bw, w - 1));
    const std::size_t by = rng.below(h / 2);
    double wall[3], window[3];
    color(wall, 0.15, 0.75);
    color(window, 0.0, 1.0);
    const std::size_t pitch_x = 3 + rng.below(5);
    const std::size_t pitch_y = 3 + rng.below(6);
    const std::size_t win_w = 1 + rng.below(pitch_x - 1);
    const std::size_t win_h = 1 + rng.below(pitch_y - 1);
    for (std::size_t y = by; y < h; ++y) {
      for (std::size_t x = bx; x < std::min(w, bx + bw); ++x) {
        const bool is_window = (x - bx) % pitch_x < win_w && (y - by) % pitch_y < win_h && y > by + 1;
        set(y, x, is_window ? window : wall);
      }
    }
  }

  // Slanted stripes (railings, cables) clipped to a band.
  const std::size_t bands = 1 + rng.below(3);
  for (std::size_t k = 0; k < bands; ++k) {
    double ink[3];
    color(ink, 0.0, 1.0);
    const double angle = rng.uniform(0.0, 3.14159);
    const double period = rng.uniform(3.0, 9.0);
    const double nx = std::cos(angle), ny = std::sin(angle);
    const std::size_t y0 = rng.below(h), y1 = std::min(h, y0 + h / 4 + rng.below(h / 3));
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double phase = std::fmod(std::abs(nx * double(x) + ny * double(y)), period);
        if (phase < period * 0.35) set(y, x, ink);
      }
    }
  }

  // A few discs (signs, lamps).
  const std::size_t discs = 2 + rng.below(3);
  for (std::size_t k = 0; k < discs; ++k) {
    double ink[3];
    color(ink, 0.0, 1.0);
    const double cy = rng.uniform(0.0, double(h)), cx = rng.uniform(0.0, double(w));
    const double rad = rng.uniform(2.0, double(std::min(h, w)) / 8.0);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (std::hypot(double(y) - cy, double(x) - cx) <= rad) set(y, x, ink);
      }
    }
  }

  Image8 out{w, h, 3, std::vector<std::uint8_t>(3 * h * w)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out.pixels[(y * w + x) * 3 + c] = quantize_unit(float(img[(c * h + y) * w + x]));
      }
    }
  }
  return out;
}

/// Writes `count` scenes named scene_00.png, scene_01.png, ... into `dir`.
inline void write_scenes(const std::string& dir, std::size_t count, std::size_t h, std::size_t w,
                         std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%02zu.png", i);
    write_png((std::filesystem::path(dir) / name).string(), synth_scene(h, w, seed * 1000 + i));
  }
}

inline std::string data_file(const std::string& name) {
  return std::string(SRRES_TEST_DATA_DIR) + "/" + name;
}

}  // namespace srres::fixture
