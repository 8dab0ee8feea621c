#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgd/image.hpp"
#include "fgd/schedule.hpp"

namespace fgd {

/// Black-box noise predictor. t indexes the schedule the chain runs on
/// (t in 1..T); implementations are stateless and safe to call
/// concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual ImageBuffer predict_eps(const ImageBuffer& x_t, int t) const = 0;
};

/// Exact posterior denoiser for x0 ~ N(mean0, sigma0^2 I):
///   x0_hat = (sigma0^2 sqrt(ac) x_t + (1 - ac) mean0) / (ac sigma0^2 + 1 - ac)
///   eps    = (x_t - sqrt(ac) x0_hat) / sqrt(1 - ac)
/// A near-point-mass prior (sigma0 ~ 1e-6) pins x0_hat to mean0.
class GaussianPrior : public Denoiser {
 public:
  GaussianPrior(VarianceSchedule schedule, ImageBuffer mean0, double sigma0);

  ImageBuffer predict_eps(const ImageBuffer& x_t, int t) const override;
  /// Posterior mean E[x0 | x_t].
  ImageBuffer posterior_x0(const ImageBuffer& x_t, int t) const;

  const ImageBuffer& mean0() const { return mean0_; }
  double sigma0() const { return sigma0_; }

 private:
  VarianceSchedule schedule_;
  ImageBuffer mean0_;
  double sigma0_;
};

/// Exact posterior denoiser for a mixture of isotropic Gaussians around
/// template images. Component responsibilities are evaluated in log
/// space, so far-off inputs saturate instead of overflowing.
class TemplateMixture : public Denoiser {
 public:
  /// weights empty = uniform. sigma0 is the per-component std deviation.
  TemplateMixture(VarianceSchedule schedule, std::vector<ImageBuffer> templates,
                  std::vector<double> weights = {}, double sigma0 = 0.2);

  ImageBuffer predict_eps(const ImageBuffer& x_t, int t) const override;
  ImageBuffer posterior_x0(const ImageBuffer& x_t, int t) const;
  std::vector<double> responsibilities(const ImageBuffer& x_t, int t) const;

  const std::vector<ImageBuffer>& templates() const { return templates_; }
  double sigma0() const { return sigma0_; }

 private:
  VarianceSchedule schedule_;
  std::vector<ImageBuffer> templates_;
  std::vector<double> log_weights_;
  double sigma0_;
};

enum class TemplateKind { stripes, blobs, gradients };

TemplateKind template_kind_from_string(const std::string& s);

/// Deterministic synthetic template sets with distinct low-frequency
/// structure. Same (kind, size, count, seed, channels) always yields the
/// same images; values lie in [-1, 1].
std::vector<ImageBuffer> make_test_templates(TemplateKind kind, int size, int count,
                                             std::uint64_t seed, int channels = 1);

/// Loads every .png/.pgm/.ppm in a directory (sorted by filename) as a
/// template set. All images must share one shape.
std::vector<ImageBuffer> load_templates(const std::string& dir);

} // namespace fgd
