#include "fgd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "fgd/rng.hpp"

namespace fgd {

namespace {

using Complex = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Complex> roots_of_unity(int n, double sign) {
  std::vector<Complex> tw(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    tw[static_cast<std::size_t>(k)] = std::polar(1.0, sign * kTwoPi * k / n);
  return tw;
}

/// Signed frequency index of DFT row/column u on an n-point axis.
int signed_freq(int u, int n) { return u <= n / 2 ? u : u - n; }

/// Band radius in cycles per min(H, W) pixels.
double band_radius(int u, int v, int h, int w) {
  const int s = std::min(h, w);
  const double fu = static_cast<double>(signed_freq(u, h)) * s / h;
  const double fv = static_cast<double>(signed_freq(v, w)) * s / w;
  return std::hypot(fu, fv);
}

} // namespace

Dft2D dft2d(const ImageBuffer& img, int channel) {
  const int H = img.height();
  const int W = img.width();
  if (channel < 0 || channel >= img.channels())
    throw std::invalid_argument("dft2d: channel out of range");
  const double* p = img.plane(channel);
  const auto tw_w = roots_of_unity(W, -1.0);
  const auto tw_h = roots_of_unity(H, -1.0);

  // Row pass: G(y, v) = sum_x f(y, x) w^(v x), then column pass over y.
  std::vector<Complex> g(static_cast<std::size_t>(H) * W);
  for (int y = 0; y < H; ++y)
    for (int v = 0; v < W; ++v) {
      Complex acc = 0.0;
      for (int x = 0; x < W; ++x)
        acc += p[static_cast<std::size_t>(y) * W + x] *
               tw_w[static_cast<std::size_t>(v) * x % W];
      g[static_cast<std::size_t>(y) * W + v] = acc;
    }

  Dft2D out;
  out.h = H;
  out.w = W;
  out.coef.resize(static_cast<std::size_t>(H) * W);
  for (int u = 0; u < H; ++u)
    for (int v = 0; v < W; ++v) {
      Complex acc = 0.0;
      for (int y = 0; y < H; ++y)
        acc += g[static_cast<std::size_t>(y) * W + v] *
               tw_h[static_cast<std::size_t>(u) * y % H];
      out.coef[static_cast<std::size_t>(u) * W + v] = acc;
    }
  return out;
}

ImageBuffer idft2d_real(const Dft2D& f) {
  const int H = f.h;
  const int W = f.w;
  if (H < 1 || W < 1 || f.coef.size() != static_cast<std::size_t>(H) * W)
    throw std::invalid_argument("idft2d_real: malformed transform");
  const auto tw_w = roots_of_unity(W, 1.0);
  const auto tw_h = roots_of_unity(H, 1.0);

  std::vector<Complex> g(static_cast<std::size_t>(H) * W);
  for (int u = 0; u < H; ++u)
    for (int x = 0; x < W; ++x) {
      Complex acc = 0.0;
      for (int v = 0; v < W; ++v)
        acc += f.coef[static_cast<std::size_t>(u) * W + v] *
               tw_w[static_cast<std::size_t>(x) * v % W];
      g[static_cast<std::size_t>(u) * W + x] = acc;
    }

  ImageBuffer out(H, W, 1);
  double* p = out.plane(0);
  const double scale = 1.0 / (static_cast<double>(H) * W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      Complex acc = 0.0;
      for (int u = 0; u < H; ++u)
        acc += g[static_cast<std::size_t>(u) * W + x] *
               tw_h[static_cast<std::size_t>(y) * u % H];
      p[static_cast<std::size_t>(y) * W + x] = acc.real() * scale;
    }
  return out;
}

RadialSpectrum radial_spectrum(const Dft2D& f) {
  const int bins = std::min(f.h, f.w) / 2 + 1;
  RadialSpectrum rs;
  rs.amplitude.assign(static_cast<std::size_t>(bins), 0.0);
  rs.count.assign(static_cast<std::size_t>(bins), 0);
  for (int u = 0; u < f.h; ++u)
    for (int v = 0; v < f.w; ++v) {
      const long bin = std::lround(band_radius(u, v, f.h, f.w));
      if (bin >= bins) continue; // corner frequencies beyond the Nyquist radius
      rs.amplitude[static_cast<std::size_t>(bin)] += std::abs(f.at(u, v));
      ++rs.count[static_cast<std::size_t>(bin)];
    }
  for (int b = 0; b < bins; ++b)
    if (rs.count[static_cast<std::size_t>(b)] > 0)
      rs.amplitude[static_cast<std::size_t>(b)] /= rs.count[static_cast<std::size_t>(b)];
  return rs;
}

double spectrum_slope(const RadialSpectrum& rs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t b = 1; b < rs.amplitude.size(); ++b) {
    if (rs.count[b] == 0 || rs.amplitude[b] <= 0.0) continue;
    const double lx = std::log(static_cast<double>(b));
    const double ly = std::log(rs.amplitude[b]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("spectrum_slope: fewer than two usable bands");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("spectrum_slope: degenerate abscissa");
  return (n * sxy - sx * sy) / denom;
}

ImageBuffer synth_one_over_f(int h, int w, int channels, std::uint64_t seed,
                             bool normalize) {
  ImageBuffer out(h, w, channels);
  for (int c = 0; c < channels; ++c) {
    Dft2D f;
    f.h = h;
    f.w = w;
    f.coef.assign(static_cast<std::size_t>(h) * w, Complex{});
    for (int u = 0; u < h; ++u)
      for (int v = 0; v < w; ++v) {
        const int pu = (h - u) % h;
        const int pv = (w - v) % w;
        if (std::tie(u, v) > std::tie(pu, pv)) continue; // partner fills it
        const std::size_t idx = static_cast<std::size_t>(u) * w + v;
        const double rho = band_radius(u, v, h, w);
        const double amp = (u == 0 && v == 0) ? 0.0 : 1.0 / std::max(rho, 1.0);
        if (pu == u && pv == v) {
          f.coef[idx] = amp; // self-conjugate coefficients must be real
        } else {
          const double phi =
              kTwoPi * rng::uniform01(seed, static_cast<std::uint32_t>(c),
                                      rng::Purpose::spectrum_phase, idx);
          f.coef[idx] = std::polar(amp, phi);
          f.coef[static_cast<std::size_t>(pu) * w + pv] = std::conj(f.coef[idx]);
        }
      }
    ImageBuffer plane = idft2d_real(f);
    std::memcpy(out.plane(c), plane.plane(0), out.pixel_count() * sizeof(double));
  }
  if (normalize) {
    double peak = 0.0;
    const double* p = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) peak = std::max(peak, std::abs(p[i]));
    if (peak > 0.0) {
      const double k = 0.9 / peak;
      double* q = out.data();
      for (std::size_t i = 0; i < out.size(); ++i) q[i] *= k;
    }
  }
  return out;
}

RadialSpectrum radial_amplitude_spectrum(const ImageBuffer& img) {
  RadialSpectrum acc = radial_spectrum(dft2d(img, 0));
  for (int c = 1; c < img.channels(); ++c) {
    const RadialSpectrum rs = radial_spectrum(dft2d(img, c));
    for (std::size_t b = 0; b < acc.amplitude.size(); ++b) acc.amplitude[b] += rs.amplitude[b];
  }
  if (img.channels() > 1)
    for (double& a : acc.amplitude) a /= img.channels();
  return acc;
}

FrequencySnr snr_per_frequency(const ImageBuffer& x0, const VarianceSchedule& s, int t) {
  const RadialSpectrum rs = radial_amplitude_spectrum(x0);
  const SignalNoise a = signal_noise_strength(s, t);
  FrequencySnr out;
  out.signal_amplitude.resize(rs.amplitude.size());
  for (std::size_t b = 0; b < rs.amplitude.size(); ++b)
    out.signal_amplitude[b] = a.signal * rs.amplitude[b];
  if (t == 0) {
    out.noise_free = true;
    return out;
  }
  const double noise_floor =
      a.noise * std::sqrt(static_cast<double>(x0.pixel_count()));
  out.snr.resize(out.signal_amplitude.size());
  for (std::size_t b = 0; b < out.snr.size(); ++b)
    out.snr[b] = out.signal_amplitude[b] / noise_floor;
  return out;
}

double structure_distance(const ImageBuffer& a, const ImageBuffer& b,
                          const GuideFilter& f) {
  return d_score(subtract(f.apply(a), f.apply(b)));
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return -1.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Entries arrive in sampling order (t descending). The active window is the
/// span between the first and last lambda > 0 entries; everything after it
/// is the post-stop tail.
template <class Entry>
TraceSummary summarize(const std::vector<Entry>& entries, double flat_threshold) {
  TraceSummary ts;
  std::ptrdiff_t first = -1;
  std::ptrdiff_t last = -1;
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (entries[static_cast<std::size_t>(i)].lambda > 0.0) {
      if (first < 0) first = i;
      last = i;
      ++ts.active_steps;
    }
  }
  if (first < 0) return ts;
  ts.d_first = entries[static_cast<std::size_t>(first)].d_score;
  ts.d_last = entries[static_cast<std::size_t>(last)].d_score;
  for (std::ptrdiff_t i = first; i <= last; ++i)
    ts.d_max = std::max(ts.d_max, entries[static_cast<std::size_t>(i)].d_score);

  std::vector<double> during, after, after_rel;
  for (std::ptrdiff_t i = first; i + 1 <= last; ++i) {
    const double a = entries[static_cast<std::size_t>(i)].d_score;
    const double b = entries[static_cast<std::size_t>(i + 1)].d_score;
    during.push_back(std::abs(b - a));
  }
  for (std::ptrdiff_t i = last; i + 1 < n; ++i) {
    const double a = entries[static_cast<std::size_t>(i)].d_score;
    const double b = entries[static_cast<std::size_t>(i + 1)].d_score;
    after.push_back(std::abs(b - a));
    after_rel.push_back(std::abs(b - a) / std::max(std::abs(a), 1e-12));
  }
  ts.median_abs_step_during = median_of(during);
  ts.median_abs_step_after = median_of(after);
  ts.flattens_after_stop = !after_rel.empty() && median_of(after_rel) < flat_threshold;
  return ts;
}

} // namespace

TraceSummary trace_summary(const std::vector<GuidanceTraceEntry>& trace,
                           double flat_threshold) {
  return summarize(trace, flat_threshold);
}

TraceSummary trace_summary(const std::vector<StepRecord>& steps, double flat_threshold) {
  return summarize(steps, flat_threshold);
}

TraceSummary trace_summary(const Trajectory& traj, double flat_threshold) {
  TraceSummary ts = summarize(traj.steps, flat_threshold);
  if (!traj.steps.empty()) ts.final_structure = traj.steps.back().l1_to_guide_filtered;
  return ts;
}

} // namespace fgd
