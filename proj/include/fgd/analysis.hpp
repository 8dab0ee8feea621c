#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "fgd/filters.hpp"
#include "fgd/guidance.hpp"
#include "fgd/image.hpp"
#include "fgd/samplers.hpp"
#include "fgd/schedule.hpp"

namespace fgd {

/// Full 2-D DFT of one channel, sum convention:
///   F(u, v) = sum_{y, x} f(y, x) exp(-2 pi i (u y / H + v x / W))
/// coef is row-major, u * w + v.
struct Dft2D {
  int h = 0;
  int w = 0;
  std::vector<std::complex<double>> coef;

  const std::complex<double>& at(int u, int v) const {
    return coef[static_cast<std::size_t>(u) * static_cast<std::size_t>(w) + v];
  }
};

Dft2D dft2d(const ImageBuffer& img, int channel = 0);

/// Inverse transform, real part: f = Re[(1 / HW) sum F exp(+2 pi i ...)].
ImageBuffer idft2d_real(const Dft2D& f);

/// Mean coefficient magnitude per radial frequency band. Frequencies are
/// measured in cycles per min(H, W) pixels, so bands are isotropic on
/// non-square images; bins run 0..floor(min(H, W) / 2).
struct RadialSpectrum {
  std::vector<double> amplitude; // mean |F| of the band, 0 where empty
  std::vector<int> count;
};

RadialSpectrum radial_spectrum(const Dft2D& f);

/// Radial spectrum of an image with amplitudes averaged over channels.
RadialSpectrum radial_amplitude_spectrum(const ImageBuffer& img);

/// Log-log least-squares slope of amplitude vs band index over bands >= 1
/// (DC excluded; empty and zero bands skipped). Needs two usable bands.
double spectrum_slope(const RadialSpectrum& rs);

/// Random-phase image with an exactly 1/rho amplitude spectrum (DC = 0,
/// rho capped below 1). Phases come from the (seed, channel) stream, so
/// the image is reproducible. normalize rescales to max |value| = 0.9.
ImageBuffer synth_one_over_f(int h, int w, int channels, std::uint64_t seed,
                             bool normalize = true);

/// Expected per-band signal-to-noise of x_t = sqrt(ac) x0 + sqrt(1-ac) eps:
/// the signal amplitude is sqrt(ac) A_x0(band) (channel-averaged), the
/// white-noise floor is flat at sqrt((1 - ac) H W), the RMS coefficient
/// magnitude of unit white noise. Amplitude ratio, not power ratio. t = 0
/// has no noise; snr is left empty and noise_free is set.
struct FrequencySnr {
  std::vector<double> signal_amplitude;
  std::vector<double> snr;
  bool noise_free = false;
};

FrequencySnr snr_per_frequency(const ImageBuffer& x0, const VarianceSchedule& s, int t);

/// Mean absolute difference of the two filtered images: how far apart the
/// structures are that the filter preserves.
double structure_distance(const ImageBuffer& a, const ImageBuffer& b,
                          const GuideFilter& f);

/// Shape of a guidance trace: the d-score arc over the active window and
/// how the series settles once guidance stops.
struct TraceSummary {
  double d_first = 0.0; // d_score at the first active step
  double d_last = 0.0;  // d_score at the last active step
  double d_max = 0.0;   // max d_score over active steps
  int active_steps = 0; // steps with lambda > 0
  /// Median |d-score change| between consecutive entries inside the active
  /// window / after its last entry; -1 when there are too few entries.
  double median_abs_step_during = -1.0;
  double median_abs_step_after = -1.0;
  /// True when the post-window median relative per-step change is below
  /// flat_threshold. Post-window d-scores require always_score.
  bool flattens_after_stop = false;
  /// l1_to_guide_filtered of the last step; -1 when not recorded.
  double final_structure = -1.0;
};

TraceSummary trace_summary(const std::vector<GuidanceTraceEntry>& trace,
                           double flat_threshold = 0.02);
TraceSummary trace_summary(const std::vector<StepRecord>& steps,
                           double flat_threshold = 0.02);
TraceSummary trace_summary(const Trajectory& traj, double flat_threshold = 0.02);

} // namespace fgd
