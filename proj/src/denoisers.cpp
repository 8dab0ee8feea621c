#include "fgd/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "fgd/image_io.hpp"
#include "fgd/kernels.hpp"
#include "fgd/rng.hpp"

namespace fgd {

namespace {

void require_step(const VarianceSchedule& s, int t, const char* who) {
  if (t < 1 || t > s.steps()) {
    throw std::invalid_argument(std::string(who) + ": t must be in [1, T]");
  }
}

ImageBuffer eps_from_x0(const VarianceSchedule& s, const ImageBuffer& x_t,
                        const ImageBuffer& x0_hat, int t) {
  const auto sn = signal_noise_strength(s, t);
  return axpby_image(1.0 / sn.noise, x_t, -sn.signal / sn.noise, x0_hat);
}

} // namespace

GaussianPrior::GaussianPrior(VarianceSchedule schedule, ImageBuffer mean0, double sigma0)
    : schedule_(std::move(schedule)), mean0_(std::move(mean0)), sigma0_(sigma0) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("GaussianPrior: sigma0 must be positive");
  if (mean0_.empty()) throw std::invalid_argument("GaussianPrior: empty mean image");
}

ImageBuffer GaussianPrior::posterior_x0(const ImageBuffer& x_t, int t) const {
  require_step(schedule_, t, "GaussianPrior::posterior_x0");
  if (!x_t.same_shape(mean0_)) {
    throw std::invalid_argument("GaussianPrior: x_t shape does not match prior mean");
  }
  const double ac = schedule_.alpha_cum(t);
  const double var = ac * sigma0_ * sigma0_ + (1.0 - ac);
  return axpby_image(sigma0_ * sigma0_ * std::sqrt(ac) / var, x_t, (1.0 - ac) / var, mean0_);
}

ImageBuffer GaussianPrior::predict_eps(const ImageBuffer& x_t, int t) const {
  return eps_from_x0(schedule_, x_t, posterior_x0(x_t, t), t);
}

TemplateMixture::TemplateMixture(VarianceSchedule schedule, std::vector<ImageBuffer> templates,
                                 std::vector<double> weights, double sigma0)
    : schedule_(std::move(schedule)), templates_(std::move(templates)), sigma0_(sigma0) {
  if (templates_.empty()) throw std::invalid_argument("TemplateMixture: no templates");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("TemplateMixture: sigma0 must be positive");
  for (const auto& m : templates_) {
    if (!m.same_shape(templates_.front())) {
      throw std::invalid_argument("TemplateMixture: templates must share one shape");
    }
  }
  if (weights.empty()) {
    log_weights_.assign(templates_.size(), 0.0); // uniform up to normalization
  } else {
    if (weights.size() != templates_.size()) {
      throw std::invalid_argument("TemplateMixture: weight count does not match templates");
    }
    log_weights_.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0)) {
        throw std::invalid_argument("TemplateMixture: weights must be positive");
      }
      log_weights_[i] = std::log(weights[i]);
    }
  }
}

std::vector<double> TemplateMixture::responsibilities(const ImageBuffer& x_t, int t) const {
  require_step(schedule_, t, "TemplateMixture::responsibilities");
  if (!x_t.same_shape(templates_.front())) {
    throw std::invalid_argument("TemplateMixture: x_t shape does not match templates");
  }
  const double ac = schedule_.alpha_cum(t);
  const double sig = std::sqrt(ac);
  const double var = ac * sigma0_ * sigma0_ + (1.0 - ac);
  // log p_k = log w_k - |x_t - sqrt(ac) mu_k|^2 / (2 var) + shared const
  std::vector<double> logits(templates_.size());
  ImageBuffer scaled(x_t.height(), x_t.width(), x_t.channels());
  for (std::size_t k = 0; k < templates_.size(); ++k) {
    kern::axpby(sig, templates_[k].data(), 0.0, templates_[k].data(), scaled.data(),
                scaled.size());
    const double ssd = kern::sum_sq_diff(x_t.data(), scaled.data(), x_t.size());
    logits[k] = log_weights_[k] - ssd / (2.0 * var);
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - m);
    z += l;
  }
  for (double& l : logits) l /= z;
  return logits;
}

ImageBuffer TemplateMixture::posterior_x0(const ImageBuffer& x_t, int t) const {
  const std::vector<double> resp = responsibilities(x_t, t);
  const double ac = schedule_.alpha_cum(t);
  const double var = ac * sigma0_ * sigma0_ + (1.0 - ac);
  // Component posteriors share the x_t coefficient, so the mixture mean
  // needs only the responsibility-weighted template average.
  ImageBuffer mix(x_t.height(), x_t.width(), x_t.channels());
  for (std::size_t k = 0; k < templates_.size(); ++k) {
    kern::axpy(resp[k], templates_[k].data(), mix.data(), mix.size());
  }
  return axpby_image(sigma0_ * sigma0_ * std::sqrt(ac) / var, x_t, (1.0 - ac) / var, mix);
}

ImageBuffer TemplateMixture::predict_eps(const ImageBuffer& x_t, int t) const {
  return eps_from_x0(schedule_, x_t, posterior_x0(x_t, t), t);
}

TemplateKind template_kind_from_string(const std::string& s) {
  if (s == "stripes") return TemplateKind::stripes;
  if (s == "blobs") return TemplateKind::blobs;
  if (s == "gradients") return TemplateKind::gradients;
  throw std::invalid_argument("unknown template kind: " + s);
}

namespace {

double draw(std::uint64_t seed, int index, int which) {
  return rng::uniform01(seed, static_cast<std::uint32_t>(index), rng::Purpose::template_gen,
                        static_cast<std::uint64_t>(which));
}

void fill_stripes(ImageBuffer& img, int c, std::uint64_t seed, int index) {
  const int base = c * 16;
  const double angle = draw(seed, index, base) * std::numbers::pi;
  const double freq = 1.0 + std::floor(draw(seed, index, base + 1) * 3.0); // 1..3 cycles
  const double phase = draw(seed, index, base + 2) * 2.0 * std::numbers::pi;
  const double kx = std::cos(angle) * freq * 2.0 * std::numbers::pi / img.width();
  const double ky = std::sin(angle) * freq * 2.0 * std::numbers::pi / img.height();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      img.at(y, x, c) = 0.8 * std::sin(kx * x + ky * y + phase);
    }
  }
}

void fill_blobs(ImageBuffer& img, int c, std::uint64_t seed, int index) {
  const int base = c * 16;
  const int nblobs = 3;
  double cy[nblobs], cx[nblobs], rad[nblobs], sign[nblobs];
  for (int b = 0; b < nblobs; ++b) {
    cy[b] = draw(seed, index, base + 4 * b) * (img.height() - 1);
    cx[b] = draw(seed, index, base + 4 * b + 1) * (img.width() - 1);
    rad[b] = (0.12 + 0.18 * draw(seed, index, base + 4 * b + 2)) *
             std::min(img.height(), img.width());
    sign[b] = draw(seed, index, base + 4 * b + 3) < 0.5 ? -1.0 : 1.0;
  }
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double v = 0.0;
      for (int b = 0; b < nblobs; ++b) {
        const double d2 = (y - cy[b]) * (y - cy[b]) + (x - cx[b]) * (x - cx[b]);
        v += sign[b] * std::exp(-d2 / (2.0 * rad[b] * rad[b]));
      }
      img.at(y, x, c) = std::clamp(0.9 * v, -1.0, 1.0);
    }
  }
}

void fill_gradients(ImageBuffer& img, int c, std::uint64_t seed, int index) {
  const int base = c * 16;
  const double angle = draw(seed, index, base) * 2.0 * std::numbers::pi;
  const double gx = std::cos(angle);
  const double gy = std::sin(angle);
  const double span = std::abs(gx) + std::abs(gy);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double u = img.width() > 1 ? 2.0 * x / (img.width() - 1) - 1.0 : 0.0;
      const double v = img.height() > 1 ? 2.0 * y / (img.height() - 1) - 1.0 : 0.0;
      img.at(y, x, c) = 0.9 * (gx * u + gy * v) / span;
    }
  }
}

} // namespace

std::vector<ImageBuffer> make_test_templates(TemplateKind kind, int size, int count,
                                             std::uint64_t seed, int channels) {
  if (size < 1 || count < 1 || channels < 1) {
    throw std::invalid_argument("make_test_templates: bad size/count/channels");
  }
  std::vector<ImageBuffer> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    ImageBuffer img(size, size, channels);
    for (int c = 0; c < channels; ++c) {
      switch (kind) {
        case TemplateKind::stripes: fill_stripes(img, c, seed, i); break;
        case TemplateKind::blobs: fill_blobs(img, c, seed, i); break;
        case TemplateKind::gradients: fill_gradients(img, c, seed, i); break;
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<ImageBuffer> load_templates(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("load_templates: not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(e.path());
  }
  if (files.empty()) {
    throw std::runtime_error("load_templates: no .png/.pgm/.ppm files in " + dir);
  }
  std::sort(files.begin(), files.end());
  std::vector<ImageBuffer> out;
  out.reserve(files.size());
  for (const auto& p : files) {
    out.push_back(read_image(p.string()));
    if (!out.back().same_shape(out.front())) {
      throw std::runtime_error("load_templates: image shapes differ: " + p.string());
    }
  }
  return out;
}

} // namespace fgd
