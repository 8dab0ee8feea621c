#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fgd/filters.hpp"
#include "fgd/image.hpp"
#include "fgd/schedule.hpp"

namespace fgd {

struct GuidanceTraceEntry {
  int t;
  double d_score;
  double lambda;
};

/// Everything a guided run carries across steps: the frozen filter, the
/// filtered guide f(x_g), the clamp scale delta, the active window
/// [t_stop, t_start], and the per-step trace.
struct GuidanceState {
  std::shared_ptr<const GuideFilter> filter;
  ImageBuffer guide_filtered;
  double delta = 0.05;
  int t_start = 50;
  int t_stop = 10;
  /// Score d_bar on steps outside the window too (diagnostic; costs one
  /// filter apply per step). Off leaves those trace entries at 0.
  bool always_score = true;
  std::vector<GuidanceTraceEntry> trace;
};

GuidanceState make_guidance_state(std::shared_ptr<const GuideFilter> filter,
                                  const ImageBuffer& guide, double delta, int t_start,
                                  int t_stop);

/// d_t = f(x_g) - f(mu).
ImageBuffer guidance_vector(const GuidanceState& gs, const ImageBuffer& mu);

/// Mean absolute value over all pixel values.
double d_score(const ImageBuffer& d);

/// lambda = min(d_bar / delta, 1) * signal_strength. delta must be > 0
/// (+infinity disables guidance smoothly: lambda = 0).
double adaptive_weight(double d_bar, double delta, double signal_strength);

/// mu + lambda * d. lambda = 0 returns mu bit-identically.
ImageBuffer guided_mean(const ImageBuffer& mu, const ImageBuffer& d, double lambda);

/// What a sampler's mean hook returns.
struct HookOutcome {
  ImageBuffer value;
  double d_score = 0.0;
  double lambda = 0.0;
};

/// Hook signature samplers call each step. The sampler passes the
/// lambda_scale its space requires: sqrt(alpha_cum(t)) when hooking the
/// posterior mean, 1 when hooking a predicted x0.
using MeanHook =
    std::function<HookOutcome(const ImageBuffer& mean_like, int t, double lambda_scale)>;

/// Wraps a GuidanceState (held by reference; must outlive the hook).
MeanHook make_hook(GuidanceState& gs);

/// Core hook: inside [t_stop, t_start] returns the guided mean and
/// appends (t, d_bar, lambda) to the trace; outside returns mean_like
/// unchanged (bit-identical) and records lambda = 0.
HookOutcome apply_hook(GuidanceState& gs, const ImageBuffer& mean_like, int t,
                       double lambda_scale);

/// Posterior-mean-space hook: lambda scaled by sqrt(alpha_cum(t)).
ImageBuffer guidance_hook(GuidanceState& gs, const ImageBuffer& mu, int t,
                          const VarianceSchedule& s);

/// x0 - f(x0) + f(guide): keep the sample's detail, take the guide's
/// low-frequency structure.
ImageBuffer laplacian_blend(const ImageBuffer& x0, const ImageBuffer& guide,
                            const GuideFilter& f);

/// Named parameter bundles matching the published configurations.
struct GuidancePreset {
  const char* name;
  const char* sampler; // "ddpm", "ddim" or "plms"
  const char* init;    // "noise" or "sdedit"
  int steps;
  int t_start;
  int t_stop;
  double delta;
  double sigma_spatial;
  double sigma_value;
  double strength; // sdedit only
};

const std::vector<GuidancePreset>& guidance_presets();
const GuidancePreset* find_preset(const std::string& name);

} // namespace fgd
