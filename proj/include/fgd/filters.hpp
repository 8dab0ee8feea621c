#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fgd/image.hpp"

namespace fgd {

/// Joint bilateral parameters. radius <= 0 selects the default window
/// radius ceil(3 * sigma_spatial).
struct BilateralParams {
  double sigma_spatial = 5.0;
  double sigma_value = 0.35;
  int radius = 0;

  int effective_radius() const;
};

/// Per-image linear operator: filters every channel of x independently.
class GuideFilter {
 public:
  virtual ~GuideFilter() = default;
  virtual ImageBuffer apply(const ImageBuffer& x) const = 0;
};

/// Joint bilateral filter packed into an explicit per-pixel weight table.
/// For each output pixel p the tensor holds a (2r+1)^2 block of
/// non-negative weights over p's window; out-of-bounds neighbors carry
/// weight 0 and each block sums to 1. Immutable after build. Application
/// is a fixed linear operator, identical for every channel.
class FilterTensor : public GuideFilter {
 public:
  int height() const { return height_; }
  int width() const { return width_; }
  int radius() const { return radius_; }
  int window() const { return 2 * radius_ + 1; }
  std::size_t weights_per_pixel() const {
    return static_cast<std::size_t>(window()) * window();
  }

  /// out(p, c) = sum_q w(p, q) x(q, c). x must be height x width.
  ImageBuffer apply(const ImageBuffer& x) const override;

  /// Weight of window offset (dy, dx) for output pixel (y, x).
  double weight(int y, int x, int dy, int dx) const;
  /// Sum of the weight block of flat pixel p (1 up to rounding).
  double row_sum(std::size_t p) const;

  /// Binary dump: magic "FGDT", u32 height, width, radius, then
  /// little-endian f32 weights, pixel-major row-major (for each pixel in
  /// row-major order its (2r+1)^2 block, window scanned row-major).
  void save(const std::string& path) const;
  static FilterTensor load(const std::string& path);

 private:
  friend FilterTensor build_bilateral_tensor(const ImageBuffer&, const BilateralParams&);

  FilterTensor(int height, int width, int radius);

  // Offset-major storage: weights_[k * H*W + p] is the weight of window
  // offset k = (dy+r)*(2r+1) + (dx+r) at flat pixel p. Apply then runs as
  // (2r+1)^2 shifted elementwise fmadd passes over contiguous spans.
  std::vector<double> weights_;
  int height_ = 0;
  int width_ = 0;
  int radius_ = 0;
};

/// Builds the joint bilateral FilterTensor for a guide image:
/// w(p, q) proportional to exp(-|p-q|^2 / 2 sigma_s^2)
///                       * exp(-|G(p)-G(q)|^2 / 2 sigma_v^2),
/// value distance taken jointly over all guide channels, normalized over
/// the in-bounds window.
FilterTensor build_bilateral_tensor(const ImageBuffer& guide, const BilateralParams& params);

/// Reference implementation: computes the same output as
/// build_bilateral_tensor + apply directly from the definition, one
/// pixel at a time. Test oracle; no shared code with the packed path.
ImageBuffer brute_force_joint_bilateral(const ImageBuffer& guide, const ImageBuffer& x,
                                        const BilateralParams& params);

/// x - f(x): the detail the filter removes.
ImageBuffer residual_detail(const ImageBuffer& x, const GuideFilter& f);

/// Free-function spelling of f.apply(x).
inline ImageBuffer apply_filter(const GuideFilter& f, const ImageBuffer& x) { return f.apply(x); }

/// ILVR low-pass: box-downsample by factor N (to ceil(H/N) x ceil(W/N))
/// and upsample back. `bilinear` interpolates between cell centers
/// (the default); `box` replicates cells, which makes the operator an
/// exact projection (f∘f = f) when N divides both dimensions.
class IlvrFilter : public GuideFilter {
 public:
  enum class Upsample { bilinear, box };

  explicit IlvrFilter(int factor, Upsample up = Upsample::bilinear);

  int factor() const { return factor_; }
  Upsample upsample() const { return upsample_; }
  ImageBuffer apply(const ImageBuffer& x) const override;

 private:
  int factor_;
  Upsample upsample_;
};

/// Box-downsample by N, bilinear-upsample back.
ImageBuffer ilvr_lowpass(const ImageBuffer& x, int N);

} // namespace fgd
