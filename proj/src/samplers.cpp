#include "fgd/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fgd/rng.hpp"

namespace fgd {

namespace {

void check_step(const VarianceSchedule& s, int t, const char* who) {
  if (t < 1 || t > s.steps())
    throw std::invalid_argument(std::string(who) + ": step out of range");
}

// Forward-process ops also accept t = 0 (alpha_cum[0] = 1, a no-op).
void check_step0(const VarianceSchedule& s, int t, const char* who) {
  if (t < 0 || t > s.steps())
    throw std::invalid_argument(std::string(who) + ": step out of range");
}

std::uint32_t noise_key(const VarianceSchedule& s, int t) {
  return static_cast<std::uint32_t>(s.source_step(t));
}

} // namespace

ImageBuffer forward_diffuse(const VarianceSchedule& s, const ImageBuffer& x0, int t,
                            const ImageBuffer& eps) {
  check_step0(s, t, "forward_diffuse");
  if (t == 0) return x0;
  const SignalNoise a = signal_noise_strength(s, t);
  return axpby_image(a.signal, x0, a.noise, eps);
}

ImageBuffer forward_diffuse(const VarianceSchedule& s, const ImageBuffer& x0, int t,
                            std::uint64_t seed) {
  check_step0(s, t, "forward_diffuse");
  if (t == 0) return x0;
  ImageBuffer eps = rng::gaussian_image(x0.height(), x0.width(), x0.channels(), seed,
                                        noise_key(s, t), rng::Purpose::init_noise);
  return forward_diffuse(s, x0, t, eps);
}

ImageBuffer predict_x0(const VarianceSchedule& s, const ImageBuffer& x_t,
                       const ImageBuffer& eps, int t) {
  check_step0(s, t, "predict_x0");
  if (t == 0) return x_t;
  const SignalNoise a = signal_noise_strength(s, t);
  return axpby_image(1.0 / a.signal, x_t, -a.noise / a.signal, eps);
}

ImageBuffer posterior_mean(const VarianceSchedule& s, const ImageBuffer& x_t,
                           const ImageBuffer& eps, int t) {
  check_step(s, t, "posterior_mean");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(s.alpha(t));
  const double eps_coef = s.beta(t) / std::sqrt(1.0 - s.alpha_cum(t));
  return axpby_image(inv_sqrt_alpha, x_t, -inv_sqrt_alpha * eps_coef, eps);
}

double posterior_variance(const VarianceSchedule& s, int t) {
  check_step(s, t, "posterior_variance");
  return (1.0 - s.alpha_cum(t - 1)) / (1.0 - s.alpha_cum(t)) * s.beta(t);
}

double ddim_sigma(const VarianceSchedule& s, int t, int t_prev, double eta) {
  check_step(s, t, "ddim_sigma");
  const double ac_t = s.alpha_cum(t);
  const double ac_p = s.alpha_cum(t_prev);
  // Early out keeps forward jumps (ac_t > ac_p makes the radicand negative)
  // from turning 0 * sqrt(negative) into NaN.
  if (eta == 0.0) return 0.0;
  return eta * std::sqrt((1.0 - ac_p) / (1.0 - ac_t) * (1.0 - ac_t / ac_p));
}

StepOutput ddpm_step(const Denoiser& d, const VarianceSchedule& s, const ImageBuffer& x_t,
                     int t, std::uint64_t seed, const MeanHook* hook) {
  check_step(s, t, "ddpm_step");
  ImageBuffer eps = d.predict_eps(x_t, t);
  ImageBuffer mu = posterior_mean(s, x_t, eps, t);

  StepOutput out;
  if (hook) {
    HookOutcome h = (*hook)(mu, t, signal_noise_strength(s, t).signal);
    mu = std::move(h.value);
    out.d_score = h.d_score;
    out.lambda = h.lambda;
  }
  if (t > 1) {
    ImageBuffer z = rng::gaussian_image(x_t.height(), x_t.width(), x_t.channels(), seed,
                                        noise_key(s, t), rng::Purpose::step_noise);
    out.x_prev = mu;
    add_scaled(out.x_prev, std::sqrt(posterior_variance(s, t)), z);
  } else {
    out.x_prev = mu; // last step is noiseless
  }
  out.mean = std::move(mu);
  return out;
}

namespace {

/// Shared DDIM transport t -> t_prev along a given eps direction:
///   x_prev = sqrt(ac_p) x0_g + sqrt(1 - ac_p - sigma^2) eps + sigma z
/// where x0_g is the (possibly hooked) clean estimate.
StepOutput ddim_transport(const VarianceSchedule& s, const ImageBuffer& x_t,
                          const ImageBuffer& eps, int t, int t_prev, double eta,
                          std::uint64_t seed, const MeanHook* hook) {
  ImageBuffer x0_hat = predict_x0(s, x_t, eps, t);

  StepOutput out;
  if (hook) {
    HookOutcome h = (*hook)(x0_hat, t, 1.0);
    x0_hat = std::move(h.value);
    out.d_score = h.d_score;
    out.lambda = h.lambda;
  }

  const double ac_p = s.alpha_cum(t_prev);
  const double sigma = ddim_sigma(s, t, t_prev, eta);
  const double dir = std::sqrt(std::max(0.0, 1.0 - ac_p - sigma * sigma));
  out.x_prev = axpby_image(std::sqrt(ac_p), x0_hat, dir, eps);
  if (sigma > 0.0) {
    ImageBuffer z = rng::gaussian_image(x_t.height(), x_t.width(), x_t.channels(), seed,
                                        noise_key(s, t), rng::Purpose::step_noise);
    add_scaled(out.x_prev, sigma, z);
  }
  out.mean = std::move(x0_hat);
  return out;
}

} // namespace

StepOutput ddim_step(const Denoiser& d, const VarianceSchedule& s, const ImageBuffer& x_t,
                     int t, int t_prev, double eta, std::uint64_t seed,
                     const MeanHook* hook) {
  check_step(s, t, "ddim_step");
  if (t_prev < 0 || t_prev > s.steps() || t_prev == t)
    throw std::invalid_argument("ddim_step: bad target step");
  if (eta < 0.0) throw std::invalid_argument("ddim_step: eta must be >= 0");
  if (t_prev > t && eta != 0.0)
    throw std::invalid_argument("ddim_step: forward jumps must be deterministic");
  ImageBuffer eps = d.predict_eps(x_t, t);
  return ddim_transport(s, x_t, eps, t, t_prev, eta, seed, hook);
}

ImageBuffer ddim_invert(const Denoiser& d, const VarianceSchedule& s,
                        const ImageBuffer& x0) {
  const int K = s.steps();
  // Lift 0 -> 1. There is no source-time eps for clean data, so the
  // direction comes from the denoiser at the destination step.
  ImageBuffer eps = d.predict_eps(x0, 1);
  const SignalNoise a1 = signal_noise_strength(s, 1);
  ImageBuffer x = axpby_image(a1.signal, x0, a1.noise, eps);
  for (int k = 1; k < K; ++k)
    x = ddim_step(d, s, x, k, k + 1, 0.0, 0, nullptr).x_prev;
  return x;
}

StepOutput plms_step(const Denoiser& d, const VarianceSchedule& s, const ImageBuffer& x_t,
                     int t, int t_prev, EpsHistory& history, const MeanHook* hook) {
  check_step(s, t, "plms_step");
  if (t_prev < 0 || t_prev >= t)
    throw std::invalid_argument("plms_step: target must precede t");
  ImageBuffer eps = d.predict_eps(x_t, t);

  ImageBuffer eps_used;
  if (history.size() >= 3) {
    // (55 e - 59 h0 + 37 h1 - 9 h2) / 24, written as e plus a combination of
    // differences so a stationary eps stream passes through untouched.
    ImageBuffer corr = scale_image(subtract(eps, history[0]), 59.0 / 24.0);
    add_scaled(corr, -37.0 / 24.0, subtract(eps, history[1]));
    add_scaled(corr, 9.0 / 24.0, subtract(eps, history[2]));
    eps_used = add(eps, corr);
  } else if (t_prev >= 1) {
    ImageBuffer probe = ddim_transport(s, x_t, eps, t, t_prev, 0.0, 0, nullptr).x_prev;
    eps_used = axpby_image(0.5, eps, 0.5, d.predict_eps(probe, t_prev));
  } else {
    eps_used = eps;
  }

  StepOutput out = ddim_transport(s, x_t, eps_used, t, t_prev, 0.0, 0, hook);
  history.push_front(std::move(eps));
  if (history.size() > 3) history.pop_back();
  return out;
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "ddpm") return SamplerKind::ddpm;
  if (s == "ddim") return SamplerKind::ddim;
  if (s == "plms") return SamplerKind::plms;
  throw std::invalid_argument("unknown sampler: " + s);
}

InitMode init_mode_from_string(const std::string& s) {
  if (s == "noise") return InitMode::noise;
  if (s == "sdedit") return InitMode::sdedit;
  if (s == "invert") return InitMode::invert;
  throw std::invalid_argument("unknown init mode: " + s);
}

const char* to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::ddpm: return "ddpm";
    case SamplerKind::ddim: return "ddim";
    case SamplerKind::plms: return "plms";
  }
  return "?";
}

const char* to_string(InitMode m) {
  switch (m) {
    case InitMode::noise: return "noise";
    case InitMode::sdedit: return "sdedit";
    case InitMode::invert: return "invert";
  }
  return "?";
}

Trajectory run_sampler(const Denoiser& d, const SamplerConfig& cfg, GuidanceState* gs,
                       const ImageBuffer* init_image) {
  const VarianceSchedule& s = cfg.schedule;
  const int K = s.steps();

  MeanHook hook;
  const MeanHook* hp = nullptr;
  if (gs) {
    hook = make_hook(*gs);
    hp = &hook;
  }

  int k_start = K;
  ImageBuffer x;
  switch (cfg.init) {
    case InitMode::noise:
      x = rng::gaussian_image(cfg.height, cfg.width, cfg.channels, cfg.seed,
                              noise_key(s, K), rng::Purpose::init_noise);
      break;
    case InitMode::sdedit: {
      if (!init_image) throw std::invalid_argument("run_sampler: sdedit needs an image");
      if (!(cfg.sdedit_strength > 0.0) || cfg.sdedit_strength > 1.0)
        throw std::invalid_argument("run_sampler: sdedit strength must be in (0, 1]");
      k_start = std::clamp(static_cast<int>(std::lround(cfg.sdedit_strength * K)), 1, K);
      x = forward_diffuse(s, *init_image, k_start, cfg.seed);
      break;
    }
    case InitMode::invert:
      if (!init_image) throw std::invalid_argument("run_sampler: invert needs an image");
      x = ddim_invert(d, s, *init_image);
      break;
  }

  Trajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(k_start));
  if (cfg.record_images) traj.images.push_back(x);

  EpsHistory history;
  for (int k = k_start; k >= 1; --k) {
    StepOutput so;
    switch (cfg.kind) {
      case SamplerKind::ddpm:
        so = ddpm_step(d, s, x, k, cfg.seed, hp);
        break;
      case SamplerKind::ddim:
        so = ddim_step(d, s, x, k, k - 1, cfg.eta, cfg.seed, hp);
        break;
      case SamplerKind::plms:
        so = plms_step(d, s, x, k, k - 1, history, hp);
        break;
    }
    x = std::move(so.x_prev);

    StepRecord rec;
    rec.k = k;
    rec.t = s.source_step(k);
    rec.d_score = so.d_score;
    rec.lambda = so.lambda;
    if (gs && cfg.record_structure)
      rec.l1_to_guide_filtered =
          d_score(subtract(gs->filter->apply(x), gs->guide_filtered));
    traj.steps.push_back(rec);
    if (cfg.record_images) traj.images.push_back(x);
  }
  traj.final_x = std::move(x);
  return traj;
}

} // namespace fgd
