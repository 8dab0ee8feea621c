#include "fgd/rng.hpp"

#include <cmath>
#include <numbers>

namespace fgd::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::array<std::uint32_t, 4> ctr) {
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::array<std::uint32_t, 4> next{
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
        static_cast<std::uint32_t>(p0),
    };
    ctr = next;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

double uniform01(std::uint64_t seed, std::uint32_t t, Purpose p, std::uint64_t index) {
  const auto w = philox4x32(seed, {static_cast<std::uint32_t>(index),
                                   static_cast<std::uint32_t>(index >> 32), t,
                                   static_cast<std::uint32_t>(p)});
  return to_unit(w[0], w[1]);
}

void fill_gaussian(double* buf, std::size_t n, std::uint64_t seed, std::uint32_t t, Purpose p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::uint64_t block = 0;
  std::size_t i = 0;
  while (i < n) {
    const auto w = philox4x32(seed, {static_cast<std::uint32_t>(block),
                                     static_cast<std::uint32_t>(block >> 32), t,
                                     static_cast<std::uint32_t>(p)});
    const double u1 = to_unit(w[0], w[1]);
    const double u2 = to_unit(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1)); // 1-u1 in (0,1]
    buf[i++] = r * std::cos(two_pi * u2);
    if (i < n) buf[i++] = r * std::sin(two_pi * u2);
    ++block;
  }
}

ImageBuffer gaussian_image(int h, int w, int c, std::uint64_t seed, std::uint32_t t, Purpose p) {
  ImageBuffer img(h, w, c);
  fill_gaussian(img.data(), img.size(), seed, t, p);
  return img;
}

} // namespace fgd::rng
