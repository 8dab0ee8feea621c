#include "fgd/schedule.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fgd {

VarianceSchedule::VarianceSchedule(std::vector<double> betas, std::vector<int> source)
    : betas_(std::move(betas)), source_(std::move(source)) {
  alpha_cum_.resize(betas_.size() + 1);
  alpha_cum_[0] = 1.0;
  for (std::size_t t = 1; t <= betas_.size(); ++t) {
    alpha_cum_[t] = alpha_cum_[t - 1] * (1.0 - betas_[t - 1]);
  }
}

VarianceSchedule VarianceSchedule::linear(int T, double beta_start, double beta_end) {
  if (T < 1) throw std::invalid_argument("VarianceSchedule::linear: T must be >= 1");
  if (beta_end < beta_start) {
    throw std::invalid_argument("VarianceSchedule::linear: beta_end < beta_start");
  }
  std::vector<double> betas(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    betas[t] = T == 1 ? beta_start
                      : beta_start + (beta_end - beta_start) * static_cast<double>(t) / (T - 1);
  }
  return from_betas(std::move(betas));
}

VarianceSchedule VarianceSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw std::invalid_argument("VarianceSchedule: empty beta list");
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("VarianceSchedule: beta outside (0, 1)");
    }
  }
  std::vector<int> source(betas.size());
  std::iota(source.begin(), source.end(), 1);
  return VarianceSchedule(std::move(betas), std::move(source));
}

double VarianceSchedule::beta(int t) const {
  if (t < 1 || t > steps()) {
    throw std::invalid_argument("VarianceSchedule::beta: t out of range [1, T]");
  }
  return betas_[static_cast<std::size_t>(t) - 1];
}

double VarianceSchedule::alpha(int t) const { return 1.0 - beta(t); }

double VarianceSchedule::alpha_cum(int t) const {
  if (t < 0 || t > steps()) {
    throw std::invalid_argument("VarianceSchedule::alpha_cum: t out of range [0, T]");
  }
  return alpha_cum_[static_cast<std::size_t>(t)];
}

int VarianceSchedule::source_step(int t) const {
  if (t < 1 || t > steps()) {
    throw std::invalid_argument("VarianceSchedule::source_step: t out of range [1, T]");
  }
  return source_[static_cast<std::size_t>(t) - 1];
}

VarianceSchedule VarianceSchedule::respaced(int K) const {
  const int T = steps();
  if (K < 1 || K > T) {
    throw std::invalid_argument("VarianceSchedule::respaced: K must be in [1, T]");
  }
  std::vector<double> betas(static_cast<std::size_t>(K));
  std::vector<int> source(static_cast<std::size_t>(K));
  int prev = 0;
  for (int k = 1; k <= K; ++k) {
    // Even spacing, last step always retained, .5 ties land on larger t.
    const int tk = static_cast<int>(std::floor(static_cast<double>(k) * T / K + 0.5));
    betas[k - 1] = 1.0 - alpha_cum_[tk] / alpha_cum_[prev];
    source[k - 1] = source_[tk - 1];
    prev = tk;
  }
  return VarianceSchedule(std::move(betas), std::move(source));
}

SignalNoise signal_noise_strength(const VarianceSchedule& s, int t) {
  const double ac = s.alpha_cum(t); // validates range
  return {std::sqrt(ac), std::sqrt(1.0 - ac)};
}

} // namespace fgd
