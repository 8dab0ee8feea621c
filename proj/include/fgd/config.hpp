#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fgd/denoisers.hpp"
#include "fgd/filters.hpp"
#include "fgd/guidance.hpp"
#include "fgd/samplers.hpp"
#include "fgd/schedule.hpp"

namespace fgd {

/// Everything one run needs, flat and serializable. Precedence when
/// assembling: struct defaults, then preset, then config file, then
/// command-line flags.
struct RunConfig {
  // schedule
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int steps = 50; // respaced chain length

  // sampler
  std::string sampler = "ddpm";
  double eta = 0.0;
  std::string init = "noise";
  double sdedit_strength = 0.6;
  std::uint64_t seed = 0;

  // image
  int height = 64;
  int width = 64;
  int channels = 1;

  // denoiser
  std::string denoiser = "mixture"; // "mixture" or "gaussian"
  /// Template source: a kind name (stripes/blobs/gradients) or a
  /// directory of images.
  std::string templates = "blobs";
  int template_count = 8;
  std::uint64_t template_seed = 7;
  double sigma0 = 0.2;

  // guidance
  bool guided = true;
  std::string guide_path; // empty = guide with the first template
  /// "bilateral", "ilvr" (factor from ilvr_factor), "ilvr-N", or "none".
  std::string filter = "bilateral";
  double sigma_spatial = 5.0;
  double sigma_value = 0.35;
  int radius = 0; // 0 = default window
  int ilvr_factor = 8;
  double delta = 0.05;
  int t_start = 50;
  int t_stop = 10;

  // diagnostics
  bool record_structure = true;
};

/// Throws std::invalid_argument on any out-of-range or inconsistent field.
void validate(const RunConfig& c);

/// False when guidance is off, either explicitly or via filter "none".
bool guidance_enabled(const RunConfig& c);

/// Copies a preset's sampler, chain length, window, delta and filter
/// widths onto c. Schedule and image fields are untouched.
void apply_preset(RunConfig& c, const GuidancePreset& p);

/// Canonical key=value text, one pair per line. Starts with
/// fgd_config_version and includes the derived schedule.step_list, so a
/// stored config pins the exact chain even if respacing rules change.
std::string to_kv(const RunConfig& c);

/// Applies key=value lines ('#' comments, blank lines ignored) onto base.
/// Unknown keys and malformed values throw; a stored step_list that
/// contradicts the derived one throws.
RunConfig config_from_kv(const std::string& text, RunConfig base = {});

/// FNV-1a 64 over the canonical text; hex form names run directories.
std::uint64_t config_hash(const RunConfig& c);
std::string config_hash_hex(const RunConfig& c);

// ---- assembly -------------------------------------------------------------

VarianceSchedule make_schedule(const RunConfig& c);
std::vector<ImageBuffer> make_templates(const RunConfig& c);
std::unique_ptr<Denoiser> make_denoiser(const RunConfig& c, const VarianceSchedule& chain,
                                        std::vector<ImageBuffer> templates);
/// The guide image: guide_path if set, else templates[0]. A guide whose
/// size differs from the run is bilinearly resampled with a warning on
/// stderr; a channel mismatch throws.
ImageBuffer make_guide(const RunConfig& c, const std::vector<ImageBuffer>& templates);
/// nullptr when the filter kind is "none" (guidance disabled).
std::shared_ptr<const GuideFilter> make_filter(const RunConfig& c,
                                               const ImageBuffer& guide);
SamplerConfig make_sampler_config(const RunConfig& c, VarianceSchedule chain);

} // namespace fgd
