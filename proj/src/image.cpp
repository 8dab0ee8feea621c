#include "fgd/image.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "fgd/kernels.hpp"

namespace fgd {

ImageBuffer::ImageBuffer(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw std::invalid_argument("ImageBuffer: dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

double* ImageBuffer::plane(int c) {
  if (c < 0 || c >= channels_) throw std::invalid_argument("ImageBuffer::plane: bad channel");
  return data_.data() + static_cast<std::size_t>(c) * pixel_count();
}

const double* ImageBuffer::plane(int c) const {
  if (c < 0 || c >= channels_) throw std::invalid_argument("ImageBuffer::plane: bad channel");
  return data_.data() + static_cast<std::size_t>(c) * pixel_count();
}

double& ImageBuffer::at(int y, int x, int c) {
  return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
}

double ImageBuffer::at(int y, int x, int c) const {
  return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
}

bool ImageBuffer::is_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* who) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

} // namespace

ImageBuffer axpby_image(double a, const ImageBuffer& x, double b, const ImageBuffer& y) {
  require_same_shape(x, y, "axpby_image");
  ImageBuffer out(x.height(), x.width(), x.channels());
  kern::axpby(a, x.data(), b, y.data(), out.data(), out.size());
  return out;
}

void add_scaled(ImageBuffer& dst, double a, const ImageBuffer& x) {
  require_same_shape(dst, x, "add_scaled");
  kern::axpy(a, x.data(), dst.data(), dst.size());
}

ImageBuffer add(const ImageBuffer& a, const ImageBuffer& b) { return axpby_image(1.0, a, 1.0, b); }

ImageBuffer subtract(const ImageBuffer& a, const ImageBuffer& b) {
  return axpby_image(1.0, a, -1.0, b);
}

ImageBuffer scale_image(const ImageBuffer& x, double a) {
  ImageBuffer out(x.height(), x.width(), x.channels());
  kern::axpy(a, x.data(), out.data(), out.size());
  return out;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(pa[i] - pb[i]));
  return m;
}

bool bitwise_equal(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

ImageBuffer bilinear_resize(const ImageBuffer& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("bilinear_resize: bad output size");
  if (img.empty()) throw std::invalid_argument("bilinear_resize: empty input");
  ImageBuffer out(out_h, out_w, img.channels());
  const double sy = static_cast<double>(img.height()) / out_h;
  const double sx = static_cast<double>(img.width()) / out_w;
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < out_h; ++y) {
      double fy = (y + 0.5) * sy - 0.5;
      fy = std::min(std::max(fy, 0.0), static_cast<double>(img.height() - 1));
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, img.height() - 1);
      const double wy = fy - y0;
      for (int x = 0; x < out_w; ++x) {
        double fx = (x + 0.5) * sx - 0.5;
        fx = std::min(std::max(fx, 0.0), static_cast<double>(img.width() - 1));
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, img.width() - 1);
        const double wx = fx - x0;
        const double top = img.at(y0, x0, c) * (1.0 - wx) + img.at(y0, x1, c) * wx;
        const double bot = img.at(y1, x0, c) * (1.0 - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return out;
}

} // namespace fgd
