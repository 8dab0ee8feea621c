#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "fgd/image.hpp"

// Counter-based noise source (Philox 4x32-10). Every draw is addressed by
// (seed, t, purpose, index), so the stream a sampler consumes at step t
// does not depend on how many draws other components made. Guided and
// unguided runs therefore see identical noise.

namespace fgd::rng {

enum class Purpose : std::uint32_t {
  init_noise = 1,
  step_noise = 2,
  template_gen = 3,
  spectrum_phase = 4,
  probe = 5,
};

/// One Philox 4x32-10 block: 128-bit counter -> four 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::array<std::uint32_t, 4> counter);

/// Uniform double in [0, 1) for draw `index` of the (seed, t, purpose) stream.
double uniform01(std::uint64_t seed, std::uint32_t t, Purpose p, std::uint64_t index);

/// Fills buf with standard normals (Box-Muller over the stream).
void fill_gaussian(double* buf, std::size_t n, std::uint64_t seed, std::uint32_t t, Purpose p);

/// Image of standard normals.
ImageBuffer gaussian_image(int h, int w, int c, std::uint64_t seed, std::uint32_t t, Purpose p);

} // namespace fgd::rng
