#pragma once

#include <cmath>
#include <cstdint>

#include "fgd/image.hpp"
#include "fgd/rng.hpp"

// Shared helpers for the test binaries. Everything here is deterministic.

namespace testutil {

/// Image with values spread over [-1, 1), distinct per (seed, stream).
inline fgd::ImageBuffer uniform_image(int h, int w, int c, std::uint64_t seed,
                                      std::uint32_t stream = 0) {
  fgd::ImageBuffer img(h, w, c);
  for (std::size_t i = 0; i < img.size(); ++i)
    img.data()[i] =
        2.0 * fgd::rng::uniform01(seed, stream, fgd::rng::Purpose::probe, i) - 1.0;
  return img;
}

inline fgd::ImageBuffer noise_image(int h, int w, int c, std::uint64_t seed,
                                    std::uint32_t stream = 0) {
  return fgd::rng::gaussian_image(h, w, c, seed, stream, fgd::rng::Purpose::probe);
}

inline double max_abs(const fgd::ImageBuffer& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) m = std::max(m, std::abs(b.data()[i]));
  return m;
}

} // namespace testutil
