#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace echosr {

/// Single-channel 2D image, row-major, intensities nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> px;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), px(static_cast<std::size_t>(h) * w, fill) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("Image: non-positive dims");
  }

  double& at(int y, int x) { return px[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return px[static_cast<std::size_t>(y) * width + x]; }

  std::size_t size() const { return px.size(); }
};

using ImagePtr = std::shared_ptr<const Image>;

inline ImagePtr share(Image&& img) { return std::make_shared<const Image>(std::move(img)); }

inline Image center_crop(const Image& img, int out_h, int out_w) {
  if (out_h > img.height || out_w > img.width || out_h <= 0 || out_w <= 0)
    throw std::invalid_argument("center_crop: crop larger than image");
  const int oy = (img.height - out_h) / 2;
  const int ox = (img.width - out_w) / 2;
  Image out(out_h, out_w);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) out.at(y, x) = img.at(y + oy, x + ox);
  return out;
}

inline void clamp01(Image& img) {
  for (double& v : img.px) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

inline double image_mean(const Image& img) {
  double s = 0.0;
  for (double v : img.px) s += v;
  return s / static_cast<double>(img.size());
}

inline double image_variance(const Image& img) {
  const double m = image_mean(img);
  double s = 0.0;
  for (double v : img.px) s += (v - m) * (v - m);
  return s / static_cast<double>(img.size());
}

inline bool image_finite(const Image& img) {
  for (double v : img.px)
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool image_in_unit_range(const Image& img) {
  for (double v : img.px)
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return true;
}

}  // namespace echosr
