#pragma once

#include <vector>

namespace fgd {

/// Variance schedule of a diffusion process. Steps are indexed t = 1..T;
/// t = 0 is the clean-data boundary with alpha_cum(0) = 1. alpha_cum is
/// strictly decreasing in t.
class VarianceSchedule {
 public:
  /// Linear beta ramp from beta_start to beta_end over T steps.
  static VarianceSchedule linear(int T, double beta_start, double beta_end);

  /// Schedule from explicit per-step betas, each in (0, 1).
  static VarianceSchedule from_betas(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }

  double beta(int t) const;      // t in 1..T
  double alpha(int t) const;     // 1 - beta(t)
  double alpha_cum(int t) const; // t in 0..T

  /// Original training-step index behind step t (identity when the
  /// schedule has not been respaced). t in 1..T.
  int source_step(int t) const;
  const std::vector<int>& source_steps() const { return source_; }

  /// Respaced schedule with K steps. Retains evenly spaced source steps,
  /// always including the last one (ties toward larger t), and preserves
  /// alpha_cum exactly at the retained indices:
  /// beta'[k] = 1 - alpha_cum[t_k] / alpha_cum[t_{k-1}].
  VarianceSchedule respaced(int K) const;

 private:
  VarianceSchedule(std::vector<double> betas, std::vector<int> source);

  std::vector<double> betas_;
  std::vector<double> alpha_cum_; // size T+1, [0] = 1
  std::vector<int> source_;
};

struct SignalNoise {
  double signal; // sqrt(alpha_cum)
  double noise;  // sqrt(1 - alpha_cum)
};

/// Signal and noise strength at step t (t in 0..T; t = 0 gives {1, 0}).
SignalNoise signal_noise_strength(const VarianceSchedule& s, int t);

} // namespace fgd
