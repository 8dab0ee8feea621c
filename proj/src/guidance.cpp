#include "fgd/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fgd/kernels.hpp"

namespace fgd {

GuidanceState make_guidance_state(std::shared_ptr<const GuideFilter> filter,
                                  const ImageBuffer& guide, double delta, int t_start,
                                  int t_stop) {
  if (!filter) throw std::invalid_argument("guidance: null filter");
  if (!(delta > 0.0)) throw std::invalid_argument("guidance: delta must be > 0");
  if (t_stop < 0 || t_start < t_stop)
    throw std::invalid_argument("guidance: need t_start >= t_stop >= 0");
  GuidanceState gs;
  gs.guide_filtered = filter->apply(guide);
  gs.filter = std::move(filter);
  gs.delta = delta;
  gs.t_start = t_start;
  gs.t_stop = t_stop;
  return gs;
}

ImageBuffer guidance_vector(const GuidanceState& gs, const ImageBuffer& mu) {
  if (!mu.same_shape(gs.guide_filtered))
    throw std::invalid_argument("guidance: mean shape differs from guide");
  return subtract(gs.guide_filtered, gs.filter->apply(mu));
}

double d_score(const ImageBuffer& d) {
  return kern::sum_abs(d.data(), d.size()) / static_cast<double>(d.size());
}

double adaptive_weight(double d_bar, double delta, double signal_strength) {
  if (!(delta > 0.0)) throw std::invalid_argument("guidance: delta must be > 0");
  return std::min(d_bar / delta, 1.0) * signal_strength;
}

ImageBuffer guided_mean(const ImageBuffer& mu, const ImageBuffer& d, double lambda) {
  ImageBuffer out = mu;
  if (lambda == 0.0) return out; // exact: never touch the values
  add_scaled(out, lambda, d);
  return out;
}

HookOutcome apply_hook(GuidanceState& gs, const ImageBuffer& mean_like, int t,
                       double lambda_scale) {
  const bool active = t >= gs.t_stop && t <= gs.t_start;
  if (!active && !gs.always_score) {
    gs.trace.push_back({t, 0.0, 0.0});
    return {mean_like, 0.0, 0.0};
  }
  ImageBuffer d = guidance_vector(gs, mean_like);
  const double d_bar = d_score(d);
  const double lambda = active ? adaptive_weight(d_bar, gs.delta, lambda_scale) : 0.0;
  gs.trace.push_back({t, d_bar, lambda});
  return {guided_mean(mean_like, d, lambda), d_bar, lambda};
}

ImageBuffer guidance_hook(GuidanceState& gs, const ImageBuffer& mu, int t,
                          const VarianceSchedule& s) {
  return apply_hook(gs, mu, t, signal_noise_strength(s, t).signal).value;
}

MeanHook make_hook(GuidanceState& gs) {
  return [&gs](const ImageBuffer& mean_like, int t, double lambda_scale) {
    return apply_hook(gs, mean_like, t, lambda_scale);
  };
}

ImageBuffer laplacian_blend(const ImageBuffer& x0, const ImageBuffer& guide,
                            const GuideFilter& f) {
  // Difference of the two filtered images first: for guide == x0 the
  // difference is exactly zero and the blend returns x0 unchanged.
  ImageBuffer low_shift = subtract(f.apply(guide), f.apply(x0));
  return add(x0, low_shift);
}

const std::vector<GuidancePreset>& guidance_presets() {
  static const std::vector<GuidancePreset> table = {
      // name, sampler, init, steps, t_start, t_stop, delta, sigma_s, sigma_v, strength
      {"sd-ddim", "ddim", "noise", 50, 50, 10, 0.05, 5.0, 0.35, 0.0},
      {"sd-plms", "plms", "noise", 50, 50, 10, 0.05, 5.0, 0.35, 0.0},
      {"sd-sdedit", "plms", "sdedit", 50, 50, 10, 0.05, 5.0, 0.35, 0.6},
      {"sd-ddpm", "ddpm", "noise", 50, 50, 25, 0.2, 5.0, 0.35, 0.0},
      {"glide-ddpm", "ddpm", "noise", 100, 100, 50, 0.6, 3.0, 0.2, 0.0},
  };
  return table;
}

const GuidancePreset* find_preset(const std::string& name) {
  for (const auto& p : guidance_presets())
    if (name == p.name) return &p;
  return nullptr;
}

} // namespace fgd
