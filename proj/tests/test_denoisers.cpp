#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "fgd/denoisers.hpp"
#include "fgd/image_io.hpp"
#include "fgd/samplers.hpp"
#include "test_support.hpp"

using namespace fgd;
using testutil::max_abs;
using testutil::noise_image;
using testutil::uniform_image;

namespace {

// One-step schedule with alpha_cum(1) = 0.64; keeps examples hand-checkable.
VarianceSchedule toy_schedule() { return VarianceSchedule::linear(1, 0.36, 0.36); }

double mean_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  const ImageBuffer d = subtract(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += std::abs(d.data()[i]);
  return s / static_cast<double>(d.size());
}

/// Posterior mean of x0 for a scalar Gaussian prior by Simpson quadrature
/// over the definition; independent of the closed form under test.
double posterior_mean_quadrature(double x_t, double ac, double mu0, double sigma0) {
  const double a = mu0 - 12.0 * sigma0 - 12.0, b = mu0 + 12.0 * sigma0 + 12.0;
  const int n = 24000; // even
  const double h = (b - a) / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x0 = a + h * i;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double prior = std::exp(-0.5 * (x0 - mu0) * (x0 - mu0) / (sigma0 * sigma0));
    const double like =
        std::exp(-0.5 * (x_t - std::sqrt(ac) * x0) * (x_t - std::sqrt(ac) * x0) /
                 (1.0 - ac));
    num += w * x0 * prior * like;
    den += w * prior * like;
  }
  return num / den;
}

} // namespace

TEST_CASE("Gaussian prior closed form at a hand example") {
  // ac = 0.64, mu0 = 0, sigma0 = 1: shrinkage = sqrt(ac) = 0.8 and
  // eps = (x - 0.64 x) / 0.6 = 0.6 x.
  GaussianPrior prior(toy_schedule(), ImageBuffer(1, 1, 1, 0.0), 1.0);
  const ImageBuffer x(1, 1, 1, 1.0);
  CHECK(prior.posterior_x0(x, 1).at(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(prior.predict_eps(x, 1).at(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("Gaussian prior matches quadrature") {
  const VarianceSchedule s = VarianceSchedule::linear(1000, 1e-4, 0.02);
  for (const double mu0 : {0.0, -0.3}) {
    for (const double sigma0 : {0.5, 1.0}) {
      GaussianPrior prior(s, ImageBuffer(1, 1, 1, mu0), sigma0);
      for (const int t : {1, 250, 1000}) {
        const double xval = 0.7;
        const ImageBuffer x(1, 1, 1, xval);
        const double got = prior.posterior_x0(x, t).at(0, 0);
        const double want =
            posterior_mean_quadrature(xval, s.alpha_cum(t), mu0, sigma0);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("near-point-mass prior pins the estimate to the mean") {
  GaussianPrior prior(toy_schedule(), ImageBuffer(2, 2, 1, 0.25), 1e-6);
  const ImageBuffer far(2, 2, 1, 50.0);
  CHECK(max_abs_diff(prior.posterior_x0(far, 1), prior.mean0()) <= 1e-6);
}

TEST_CASE("centered prior and centered input predict zero noise") {
  GaussianPrior prior(toy_schedule(), ImageBuffer(3, 3, 2, 0.0), 0.7);
  const ImageBuffer zero(3, 3, 2, 0.0);
  CHECK(max_abs(prior.predict_eps(zero, 1)) == 0.0);
  CHECK(max_abs(prior.posterior_x0(zero, 1)) == 0.0);
}

TEST_CASE("a single-template mixture equals the Gaussian prior") {
  const VarianceSchedule s = VarianceSchedule::linear(100, 1e-4, 0.02);
  const ImageBuffer mu = uniform_image(6, 6, 1, 1);
  GaussianPrior prior(s, mu, 0.3);
  TemplateMixture mix(s, {mu}, {}, 0.3);
  for (const int t : {1, 50, 100}) {
    const ImageBuffer x = noise_image(6, 6, 1, t);
    CHECK(bitwise_equal(mix.posterior_x0(x, t), prior.posterior_x0(x, t)));
    CHECK(bitwise_equal(mix.predict_eps(x, t), prior.predict_eps(x, t)));
  }
}

TEST_CASE("responsibilities saturate for well-separated components") {
  const VarianceSchedule s = VarianceSchedule::linear(1000, 1e-4, 0.02);
  const ImageBuffer a(4, 4, 1, 0.5);
  const ImageBuffer b(4, 4, 1, -0.5);
  TemplateMixture mix(s, {a, b}, {}, 0.2);

  // x_t placed exactly on the noiseless trajectory of component 0 at t = 1,
  // where the components sit hundreds of posterior stds apart.
  const ImageBuffer x = scale_image(a, signal_noise_strength(s, 1).signal);
  const auto r = mix.responsibilities(x, 1);
  REQUIRE(r.size() == 2);
  CHECK(r[0] > 1.0 - 1e-6);
  CHECK(r[0] + r[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric mixture cancels exactly at the midpoint") {
  const ImageBuffer a(4, 4, 1, 0.5);
  const ImageBuffer b(4, 4, 1, -0.5);
  TemplateMixture mix(toy_schedule(), {a, b}, {}, 0.2);
  const ImageBuffer zero(4, 4, 1, 0.0);
  const auto r = mix.responsibilities(zero, 1);
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 0.5);
  CHECK(max_abs(mix.posterior_x0(zero, 1)) == 0.0);
  CHECK(max_abs(mix.predict_eps(zero, 1)) == 0.0);
}

TEST_CASE("extreme inputs stay finite") {
  const ImageBuffer a(3, 3, 1, 0.9);
  const ImageBuffer b(3, 3, 1, -0.9);
  TemplateMixture mix(toy_schedule(), {a, b}, {0.25, 0.75}, 0.2);
  for (const double v : {1e6, -1e6}) {
    const ImageBuffer x(3, 3, 1, v);
    CHECK(mix.posterior_x0(x, 1).is_finite());
    CHECK(mix.predict_eps(x, 1).is_finite());
    const auto r = mix.responsibilities(x, 1);
    CHECK(r[0] >= 0.0);
    CHECK(r[1] >= 0.0);
  }
}

TEST_CASE("eps and x0 predictions are two views of one estimate") {
  const VarianceSchedule s = VarianceSchedule::linear(500, 1e-4, 0.02);
  auto tpl = make_test_templates(TemplateKind::blobs, 8, 3, 5, 1);
  TemplateMixture mix(s, tpl, {}, 0.25);
  for (const int t : {1, 100, 500}) {
    const ImageBuffer x = noise_image(8, 8, 1, static_cast<std::uint64_t>(t));
    const ImageBuffer via_eps = predict_x0(s, x, mix.predict_eps(x, t), t);
    CHECK(max_abs_diff(via_eps, mix.posterior_x0(x, t)) <= 1e-9);
  }
}

TEST_CASE("synthetic template sets") {
  SUBCASE("deterministic and well-ranged") {
    const auto a = make_test_templates(TemplateKind::stripes, 12, 5, 9, 2);
    const auto b = make_test_templates(TemplateKind::stripes, 12, 5, 9, 2);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(bitwise_equal(a[i], b[i]));
      CHECK(a[i].height() == 12);
      CHECK(a[i].channels() == 2);
      CHECK(testutil::max_abs(a[i]) <= 1.0);
    }
    // Distinct members and distinct channels.
    CHECK(!bitwise_equal(a[0], a[1]));
    CHECK(a[0].at(3, 3, 0) != a[0].at(3, 3, 1));
  }

  SUBCASE("kinds produce separated structure") {
    const auto s = make_test_templates(TemplateKind::stripes, 16, 4, 7, 1);
    const auto bl = make_test_templates(TemplateKind::blobs, 16, 4, 7, 1);
    const auto g = make_test_templates(TemplateKind::gradients, 16, 4, 7, 1);
    // Measured minima across kinds are >= 0.22 mean-abs per pixel.
    for (const auto& x : s)
      for (const auto& y : bl)
        CHECK(mean_abs_diff(x, y) >= 0.1);
    for (const auto& x : s)
      for (const auto& y : g) CHECK(mean_abs_diff(x, y) >= 0.1);
    for (const auto& x : bl)
      for (const auto& y : g) CHECK(mean_abs_diff(x, y) >= 0.1);
  }

  SUBCASE("string names map to kinds") {
    CHECK(template_kind_from_string("stripes") == TemplateKind::stripes);
    CHECK(template_kind_from_string("blobs") == TemplateKind::blobs);
    CHECK(template_kind_from_string("gradients") == TemplateKind::gradients);
    CHECK_THROWS_AS(template_kind_from_string("squares"), std::invalid_argument);
  }

  SUBCASE("bad geometry throws") {
    CHECK_THROWS_AS(make_test_templates(TemplateKind::blobs, 0, 1, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_test_templates(TemplateKind::blobs, 8, 0, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_test_templates(TemplateKind::blobs, 8, 1, 1, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("template sets round trip through a directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fgd_tpl_dir";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const auto tpl = make_test_templates(TemplateKind::blobs, 8, 2, 3, 1);
  write_image(tpl[0], (dir / "a.png").string());
  write_image(tpl[1], (dir / "b.png").string());
  const auto loaded = load_templates(dir.string());
  REQUIRE(loaded.size() == 2);
  // PNG quantizes to 8 bits; half a bin in [-1, 1] units is ~0.0040.
  CHECK(max_abs_diff(loaded[0], tpl[0]) <= 0.004);
  CHECK(max_abs_diff(loaded[1], tpl[1]) <= 0.004);

  CHECK_THROWS_AS(load_templates((dir / "nope").string()), std::runtime_error);
  const fs::path empty = fs::temp_directory_path() / "fgd_tpl_empty";
  fs::create_directories(empty);
  CHECK_THROWS_AS(load_templates(empty.string()), std::runtime_error);

  write_image(make_test_templates(TemplateKind::blobs, 9, 1, 3, 1)[0], (dir / "c.png").string());
  CHECK_THROWS_AS(load_templates(dir.string()), std::runtime_error);
  fs::remove_all(dir);
  fs::remove_all(empty);
}

TEST_CASE("constructor and step guards") {
  const VarianceSchedule s = toy_schedule();
  CHECK_THROWS_AS(GaussianPrior(s, ImageBuffer(2, 2, 1, 0.0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianPrior(s, ImageBuffer(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TemplateMixture(s, {}), std::invalid_argument);
  CHECK_THROWS_AS(TemplateMixture(s, {ImageBuffer(2, 2, 1, 0.0)}, {}, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(TemplateMixture(s, {ImageBuffer(2, 2, 1, 0.0), ImageBuffer(3, 2, 1, 0.0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TemplateMixture(s, {ImageBuffer(2, 2, 1, 0.0)}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TemplateMixture(s, {ImageBuffer(2, 2, 1, 0.0)}, {0.0}),
                  std::invalid_argument);

  GaussianPrior prior(s, ImageBuffer(2, 2, 1, 0.0), 1.0);
  const ImageBuffer x(2, 2, 1, 0.0);
  CHECK_THROWS_AS(prior.predict_eps(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(prior.predict_eps(x, 2), std::invalid_argument);
  CHECK_THROWS_AS(prior.predict_eps(ImageBuffer(3, 2, 1, 0.0), 1), std::invalid_argument);
}
