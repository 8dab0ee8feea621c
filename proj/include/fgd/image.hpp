#pragma once

#include <cstddef>
#include <vector>

namespace fgd {

/// Dense H x W x C image of doubles. Storage is planar: channel c occupies
/// one contiguous row-major H*W plane, so per-channel operations run over
/// flat arrays.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int height, int width, int channels, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }

  /// Pixels per channel plane.
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  /// Total scalar count across all planes.
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* plane(int c);
  const double* plane(int c) const;

  double& at(int y, int x, int c = 0);
  double at(int y, int x, int c = 0) const;

  bool same_shape(const ImageBuffer& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }
  bool empty() const { return data_.empty(); }
  bool is_finite() const;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// out = a*x + b*y, elementwise. Shapes must match.
ImageBuffer axpby_image(double a, const ImageBuffer& x, double b, const ImageBuffer& y);

/// dst += a*x, elementwise. Shapes must match.
void add_scaled(ImageBuffer& dst, double a, const ImageBuffer& x);

ImageBuffer add(const ImageBuffer& a, const ImageBuffer& b);
ImageBuffer subtract(const ImageBuffer& a, const ImageBuffer& b);
ImageBuffer scale_image(const ImageBuffer& x, double a);

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);
bool bitwise_equal(const ImageBuffer& a, const ImageBuffer& b);

/// Resample to out_h x out_w with bilinear interpolation, pixel centers
/// aligned (source position = (dst + 0.5) * scale - 0.5, clamped).
ImageBuffer bilinear_resize(const ImageBuffer& img, int out_h, int out_w);

} // namespace fgd
