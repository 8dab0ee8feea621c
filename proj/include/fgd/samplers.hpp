#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "fgd/denoisers.hpp"
#include "fgd/guidance.hpp"
#include "fgd/image.hpp"
#include "fgd/schedule.hpp"

namespace fgd {

// ---- single-step primitives ----------------------------------------------

/// x_t = sqrt(ac_t) x0 + sqrt(1 - ac_t) eps, with the given eps.
ImageBuffer forward_diffuse(const VarianceSchedule& s, const ImageBuffer& x0, int t,
                            const ImageBuffer& eps);

/// Same, drawing eps from the (seed, source_step(t), init_noise) stream.
ImageBuffer forward_diffuse(const VarianceSchedule& s, const ImageBuffer& x0, int t,
                            std::uint64_t seed);

/// x0_hat = (x_t - sqrt(1 - ac_t) eps) / sqrt(ac_t).
ImageBuffer predict_x0(const VarianceSchedule& s, const ImageBuffer& x_t,
                       const ImageBuffer& eps, int t);

/// mu_t = (x_t - beta_t / sqrt(1 - ac_t) eps) / sqrt(alpha_t).
ImageBuffer posterior_mean(const VarianceSchedule& s, const ImageBuffer& x_t,
                           const ImageBuffer& eps, int t);

/// beta_tilde_t = (1 - ac_{t-1}) / (1 - ac_t) beta_t. Zero at t = 1.
double posterior_variance(const VarianceSchedule& s, int t);

/// DDIM noise scale sigma_t(eta) for the jump t -> t_prev.
double ddim_sigma(const VarianceSchedule& s, int t, int t_prev, double eta);

struct StepOutput {
  ImageBuffer x_prev;
  ImageBuffer mean; // hooked posterior mean (ddpm) or hooked x0_hat (ddim/plms)
  double d_score = 0.0;
  double lambda = 0.0;
};

/// One ancestral step t -> t-1. hook (nullable) edits the posterior mean
/// before noise is added; its lambda_scale is sqrt(ac_t). The t = 1 step
/// adds no noise: x_prev is the hooked mean, bit for bit.
StepOutput ddpm_step(const Denoiser& d, const VarianceSchedule& s, const ImageBuffer& x_t,
                     int t, std::uint64_t seed, const MeanHook* hook);

/// One DDIM jump t -> t_prev (t_prev in 0..T, t_prev != t). eta > 0 mixes
/// in sigma(eta) noise; a forward jump (t_prev > t) requires eta = 0.
/// hook edits x0_hat; its lambda_scale is 1.
StepOutput ddim_step(const Denoiser& d, const VarianceSchedule& s, const ImageBuffer& x_t,
                     int t, int t_prev, double eta, std::uint64_t seed,
                     const MeanHook* hook);

/// Deterministic DDIM map x0 -> x_T over the whole schedule. The chain
/// has no step 0, so the first lift 0 -> 1 queries the denoiser at the
/// destination step.
ImageBuffer ddim_invert(const Denoiser& d, const VarianceSchedule& s,
                        const ImageBuffer& x0);

/// Most recent raw eps predictions, newest first. Holds at most three.
using EpsHistory = std::deque<ImageBuffer>;

/// One pseudo linear multistep jump t -> t_prev. With a full history the
/// transport direction is the 4th-order Adams-Bashforth combination
/// (55 e - 59 h1 + 37 h2 - 9 h3) / 24; the first three steps fall back to
/// an improved-Euler probe (plain Euler when t_prev = 0, where the
/// denoiser cannot be queried). Only the raw eps enters the history. hook
/// edits x0_hat on the final transport; the probe transport is unhooked.
StepOutput plms_step(const Denoiser& d, const VarianceSchedule& s, const ImageBuffer& x_t,
                     int t, int t_prev, EpsHistory& history, const MeanHook* hook);

// ---- whole-chain driver ----------------------------------------------------

enum class SamplerKind { ddpm, ddim, plms };
enum class InitMode { noise, sdedit, invert };

SamplerKind sampler_kind_from_string(const std::string& s);
InitMode init_mode_from_string(const std::string& s);
const char* to_string(SamplerKind k);
const char* to_string(InitMode m);

struct SamplerConfig {
  VarianceSchedule schedule; // chain to run (already respaced)
  SamplerKind kind = SamplerKind::ddpm;
  double eta = 0.0; // ddim only
  std::uint64_t seed = 0;
  InitMode init = InitMode::noise;
  double sdedit_strength = 0.6; // fraction of the chain kept, (0, 1]
  int height = 64;
  int width = 64;
  int channels = 1;
  bool record_images = false;
  /// Record the structural distance to the filtered guide each step (one
  /// extra filter apply per step; turn off when timing).
  bool record_structure = true;
};

struct StepRecord {
  int k; // chain index, counts down
  int t; // source timestep behind k
  double d_score = 0.0;
  double lambda = 0.0;
  double l1_to_guide_filtered = -1.0; // -1 = not recorded
};

struct Trajectory {
  ImageBuffer final_x;
  std::vector<StepRecord> steps;
  std::vector<ImageBuffer> images; // filled when record_images; [0] is the init
};

/// Runs the configured chain. gs may be null (unguided run). init_image
/// is required by the sdedit and invert modes and ignored otherwise.
Trajectory run_sampler(const Denoiser& d, const SamplerConfig& cfg,
                       GuidanceState* gs = nullptr,
                       const ImageBuffer* init_image = nullptr);

} // namespace fgd
