#include "srres/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <png.h>

#include "srres/metrics.hpp"

namespace srres {

Image8 read_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DecodeError(path + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  Image8 out;
  out.width = image.width;
  out.height = image.height;
  out.channels = color ? 3 : 1;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError(path + ": " + msg);
  }
  if (out.width == 0 || out.height == 0) throw DecodeError(path + ": empty image");
  return out;
}

void write_png(const std::string& path, const Image8& img) {
  if (img.channels != 1 && img.channels != 3) throw InvalidShape("PNG output needs 1 or 3 channels");
  if (img.pixels.size() != img.width * img.height * img.channels) throw InvalidShape("pixel buffer size mismatch");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw IoError(path + ": " + image.message);
  }
}

Tensor image_to_tensor(const Image8& img) {
  Tensor t({1, img.channels, img.height, img.width}, 0.0f);
  const std::size_t plane = img.width * img.height;
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < img.channels; ++c) {
      t[c * plane + i] = float(img.pixels[i * img.channels + c]) / 255.0f;
    }
  }
  return t;
}

std::uint8_t quantize_unit(float v) {
  const double scaled = double(std::clamp(v, 0.0f, 1.0f)) * 255.0;
  // std::round is half-away-from-zero.
  return static_cast<std::uint8_t>(std::round(scaled));
}

Image8 tensor_to_image(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.n != 1 || (s.c != 1 && s.c != 3)) throw InvalidShape("cannot encode " + s.str() + " as an image");
  Image8 img{s.w, s.h, s.c, std::vector<std::uint8_t>(s.numel())};
  const std::size_t plane = s.plane();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < s.c; ++c) img.pixels[i * s.c + c] = quantize_unit(t[c * plane + i]);
  }
  return img;
}

Tensor load_image(const std::string& path, ColorMode mode) {
  const Image8 img = read_png(path);
  Tensor t = image_to_tensor(img);
  if (mode == ColorMode::kLuma) return to_luma(t);
  if (t.shape().c == 1) {
    const Shape& s = t.shape();
    Tensor rgb({1, 3, s.h, s.w}, 0.0f);
    for (std::size_t c = 0; c < 3; ++c) std::copy(t.data().begin(), t.data().end(), rgb.plane_ptr(0, c));
    return rgb;
  }
  return t;
}

namespace {

constexpr double kR = 0.299;
constexpr double kG = 0.587;
constexpr double kB = 0.114;
constexpr double kCb = 2.0 * (1.0 - kB);  // 1.772
constexpr double kCr = 2.0 * (1.0 - kR);  // 1.402

}  // namespace

Tensor rgb_to_ycbcr(const Tensor& rgb) {
  const Shape& s = rgb.shape();
  if (s.c != 3) throw ShapeMismatch("rgb_to_ycbcr needs 3 channels, got " + s.str());
  Tensor out(s, 0.0f);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t i = 0; i < s.plane(); ++i) {
      const double r = rgb.plane_ptr(n, 0)[i];
      const double g = rgb.plane_ptr(n, 1)[i];
      const double b = rgb.plane_ptr(n, 2)[i];
      const double y = kR * r + kG * g + kB * b;
      out.plane_ptr(n, 0)[i] = float(y);
      out.plane_ptr(n, 1)[i] = float((b - y) / kCb + 0.5);
      out.plane_ptr(n, 2)[i] = float((r - y) / kCr + 0.5);
    }
  }
  return out;
}

Tensor ycbcr_to_rgb(const Tensor& ycbcr) {
  const Shape& s = ycbcr.shape();
  if (s.c != 3) throw ShapeMismatch("ycbcr_to_rgb needs 3 channels, got " + s.str());
  Tensor out(s, 0.0f);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t i = 0; i < s.plane(); ++i) {
      const double y = ycbcr.plane_ptr(n, 0)[i];
      const double cb = ycbcr.plane_ptr(n, 1)[i] - 0.5;
      const double cr = ycbcr.plane_ptr(n, 2)[i] - 0.5;
      const double r = y + kCr * cr;
      const double b = y + kCb * cb;
      const double g = (y - kR * r - kB * b) / kG;
      out.plane_ptr(n, 0)[i] = float(r);
      out.plane_ptr(n, 1)[i] = float(g);
      out.plane_ptr(n, 2)[i] = float(b);
    }
  }
  return out;
}

}  // namespace srres
