#include "fgd/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fgd/kernels.hpp"
#include "fgd/parallel.hpp"

namespace fgd {

namespace {

void validate_bilateral(const ImageBuffer& guide, const BilateralParams& p) {
  if (guide.empty()) throw std::invalid_argument("build_bilateral_tensor: empty guide");
  if (!guide.is_finite()) throw std::invalid_argument("build_bilateral_tensor: non-finite guide");
  if (!(p.sigma_spatial > 0.0) || !(p.sigma_value > 0.0)) {
    throw std::invalid_argument("build_bilateral_tensor: sigmas must be positive");
  }
}

} // namespace

int BilateralParams::effective_radius() const {
  if (radius > 0) return radius;
  return static_cast<int>(std::ceil(3.0 * sigma_spatial));
}

FilterTensor::FilterTensor(int height, int width, int radius)
    : height_(height), width_(width), radius_(radius) {
  if (height < 1 || width < 1 || radius < 0) {
    throw std::invalid_argument("FilterTensor: bad dimensions");
  }
  const std::size_t hw = static_cast<std::size_t>(height) * width;
  weights_.assign(weights_per_pixel() * hw, 0.0);
}

ImageBuffer FilterTensor::apply(const ImageBuffer& x) const {
  if (x.height() != height_ || x.width() != width_) {
    throw std::invalid_argument("FilterTensor::apply: image dimensions do not match tensor");
  }
  const std::size_t hw = x.pixel_count();
  const int win = window();
  ImageBuffer out(height_, width_, x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    const double* xp = x.plane(c);
    double* op = out.plane(c);
    // Each offset contributes w_k[p] * x[p + off] on the span where the
    // flat index stays in range; weights are zero wherever the true 2-D
    // neighbor is out of bounds, so wrapped column reads are harmless.
    parallel_for(0, hw, [&](std::size_t lo, std::size_t hi) {
      for (int dy = -radius_; dy <= radius_; ++dy) {
        for (int dx = -radius_; dx <= radius_; ++dx) {
          const std::size_t k =
              static_cast<std::size_t>(dy + radius_) * win + static_cast<std::size_t>(dx + radius_);
          const double* wk = weights_.data() + k * hw;
          const long off = static_cast<long>(dy) * width_ + dx;
          // Signed span arithmetic: |off| can exceed hw when the window is
          // larger than the image, leaving an empty (negative) span.
          const long vlo = std::max<long>(static_cast<long>(lo), off < 0 ? -off : 0);
          const long vhi = std::min<long>(static_cast<long>(hi),
                                          static_cast<long>(hw) - (off > 0 ? off : 0));
          if (vlo >= vhi) continue;
          kern::fmadd(op + vlo, wk + vlo, xp + vlo + off,
                      static_cast<std::size_t>(vhi - vlo));
        }
      }
    });
  }
  return out;
}

double FilterTensor::weight(int y, int x, int dy, int dx) const {
  if (y < 0 || y >= height_ || x < 0 || x >= width_ || std::abs(dy) > radius_ ||
      std::abs(dx) > radius_) {
    throw std::invalid_argument("FilterTensor::weight: out of range");
  }
  const std::size_t hw = static_cast<std::size_t>(height_) * width_;
  const std::size_t k =
      static_cast<std::size_t>(dy + radius_) * window() + static_cast<std::size_t>(dx + radius_);
  return weights_[k * hw + static_cast<std::size_t>(y) * width_ + x];
}

double FilterTensor::row_sum(std::size_t p) const {
  const std::size_t hw = static_cast<std::size_t>(height_) * width_;
  if (p >= hw) throw std::invalid_argument("FilterTensor::row_sum: pixel out of range");
  double s = 0.0;
  for (std::size_t k = 0; k < weights_per_pixel(); ++k) s += weights_[k * hw + p];
  return s;
}

FilterTensor build_bilateral_tensor(const ImageBuffer& guide, const BilateralParams& params) {
  validate_bilateral(guide, params);
  const int r = params.effective_radius();
  const int h = guide.height();
  const int w = guide.width();
  const int win = 2 * r + 1;
  const std::size_t hw = guide.pixel_count();
  const double inv2ss = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
  const double inv2sv = 1.0 / (2.0 * params.sigma_value * params.sigma_value);

  FilterTensor f(h, w, r);

  // Raw weights per offset, over the rows where the shifted neighbor is
  // in bounds. Guide value distance accumulates jointly over channels.
  parallel_for(0, static_cast<std::size_t>(win) * win, [&](std::size_t klo, std::size_t khi) {
    std::vector<double> dist2(static_cast<std::size_t>(w));
    for (std::size_t k = klo; k < khi; ++k) {
      const int dy = static_cast<int>(k) / win - r;
      const int dx = static_cast<int>(k) % win - r;
      const double spatial = std::exp(-(static_cast<double>(dy) * dy + static_cast<double>(dx) * dx) * inv2ss);
      double* wk = f.weights_.data() + k * hw;
      const long off = static_cast<long>(dy) * w + dx;
      const int ylo = std::max(0, -dy);
      const int yhi = h - std::max(0, dy);
      const int xlo = std::max(0, -dx);
      const int xhi = w - std::max(0, dx);
      if (xlo >= xhi) continue;
      const std::size_t len = static_cast<std::size_t>(xhi - xlo);
      for (int y = ylo; y < yhi; ++y) {
        const std::size_t base = static_cast<std::size_t>(y) * w + xlo;
        std::fill(dist2.begin(), dist2.begin() + len, 0.0);
        for (int c = 0; c < guide.channels(); ++c) {
          const double* gc = guide.plane(c);
          kern::sq_diff_acc(dist2.data(), gc + base, gc + base + off, len);
        }
        for (std::size_t i = 0; i < len; ++i) {
          wk[base + i] = spatial * std::exp(-dist2[i] * inv2sv);
        }
      }
    }
  });

  // Normalize each pixel's block. The center weight is exp(0) = 1, so
  // the sum is at least 1.
  std::vector<double> norm(hw, 0.0);
  for (std::size_t k = 0; k < f.weights_per_pixel(); ++k) {
    kern::axpy(1.0, f.weights_.data() + k * hw, norm.data(), hw);
  }
  for (std::size_t p = 0; p < hw; ++p) norm[p] = 1.0 / norm[p];
  parallel_for(0, f.weights_per_pixel(), [&](std::size_t klo, std::size_t khi) {
    for (std::size_t k = klo; k < khi; ++k) {
      kern::mul(f.weights_.data() + k * hw, norm.data(), hw);
    }
  });
  return f;
}

ImageBuffer brute_force_joint_bilateral(const ImageBuffer& guide, const ImageBuffer& x,
                                        const BilateralParams& params) {
  validate_bilateral(guide, params);
  if (x.height() != guide.height() || x.width() != guide.width()) {
    throw std::invalid_argument("brute_force_joint_bilateral: image/guide dimension mismatch");
  }
  const int r = params.effective_radius();
  const int h = guide.height();
  const int w = guide.width();
  ImageBuffer out(h, w, x.channels());
  std::vector<double> acc(static_cast<std::size_t>(x.channels()));
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double wsum = 0.0;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int qy = y + dy;
          const int qx = xx + dx;
          if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
          double vdist2 = 0.0;
          for (int c = 0; c < guide.channels(); ++c) {
            const double dv = guide.at(y, xx, c) - guide.at(qy, qx, c);
            vdist2 += dv * dv;
          }
          const double sdist2 = static_cast<double>(dy) * dy + static_cast<double>(dx) * dx;
          const double wt =
              std::exp(-sdist2 / (2.0 * params.sigma_spatial * params.sigma_spatial)) *
              std::exp(-vdist2 / (2.0 * params.sigma_value * params.sigma_value));
          wsum += wt;
          for (int c = 0; c < x.channels(); ++c) acc[static_cast<std::size_t>(c)] += wt * x.at(qy, qx, c);
        }
      }
      for (int c = 0; c < x.channels(); ++c) out.at(y, xx, c) = acc[static_cast<std::size_t>(c)] / wsum;
    }
  }
  return out;
}

ImageBuffer residual_detail(const ImageBuffer& x, const GuideFilter& f) {
  return subtract(x, f.apply(x));
}

namespace {

struct Cells {
  std::vector<int> lo;        // first source index of each cell
  std::vector<int> hi;        // one past last
  std::vector<double> center; // mean position of the cell
};

Cells make_cells(int size, int n) {
  Cells c;
  for (int j = 0; j * n < size; ++j) {
    const int lo = j * n;
    const int hi = std::min(lo + n, size);
    c.lo.push_back(lo);
    c.hi.push_back(hi);
    c.center.push_back(0.5 * (lo + hi - 1));
  }
  return c;
}

} // namespace

IlvrFilter::IlvrFilter(int factor, Upsample up) : factor_(factor), upsample_(up) {
  if (factor < 1) throw std::invalid_argument("IlvrFilter: factor must be >= 1");
}

ImageBuffer IlvrFilter::apply(const ImageBuffer& x) const {
  if (x.empty()) throw std::invalid_argument("IlvrFilter::apply: empty image");
  if (factor_ == 1) return x;
  const Cells rows = make_cells(x.height(), factor_);
  const Cells cols = make_cells(x.width(), factor_);
  const int lh = static_cast<int>(rows.lo.size());
  const int lw = static_cast<int>(cols.lo.size());

  ImageBuffer low(lh, lw, x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    for (int j = 0; j < lh; ++j) {
      for (int i = 0; i < lw; ++i) {
        double s = 0.0;
        for (int y = rows.lo[j]; y < rows.hi[j]; ++y) {
          for (int xx = cols.lo[i]; xx < cols.hi[i]; ++xx) s += x.at(y, xx, c);
        }
        low.at(j, i, c) = s / ((rows.hi[j] - rows.lo[j]) * (cols.hi[i] - cols.lo[i]));
      }
    }
  }

  ImageBuffer out(x.height(), x.width(), x.channels());
  if (upsample_ == Upsample::box) {
    for (int c = 0; c < x.channels(); ++c) {
      for (int y = 0; y < x.height(); ++y) {
        for (int xx = 0; xx < x.width(); ++xx) {
          out.at(y, xx, c) = low.at(y / factor_, xx / factor_, c);
        }
      }
    }
    return out;
  }

  // Bilinear between cell centers, clamped beyond the outermost centers.
  auto locate = [](const Cells& cells, double pos, int& i0, int& i1, double& t) {
    const int n = static_cast<int>(cells.center.size());
    if (pos <= cells.center.front()) {
      i0 = i1 = 0;
      t = 0.0;
      return;
    }
    if (pos >= cells.center.back()) {
      i0 = i1 = n - 1;
      t = 0.0;
      return;
    }
    int j = 0;
    while (j + 1 < n && cells.center[j + 1] < pos) ++j;
    i0 = j;
    i1 = j + 1;
    t = (pos - cells.center[j]) / (cells.center[j + 1] - cells.center[j]);
  };

  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < x.height(); ++y) {
      int j0, j1;
      double ty;
      locate(rows, y, j0, j1, ty);
      for (int xx = 0; xx < x.width(); ++xx) {
        int i0, i1;
        double tx;
        locate(cols, xx, i0, i1, tx);
        const double top = low.at(j0, i0, c) * (1.0 - tx) + low.at(j0, i1, c) * tx;
        const double bot = low.at(j1, i0, c) * (1.0 - tx) + low.at(j1, i1, c) * tx;
        out.at(y, xx, c) = top * (1.0 - ty) + bot * ty;
      }
    }
  }
  return out;
}

ImageBuffer ilvr_lowpass(const ImageBuffer& x, int N) { return IlvrFilter(N).apply(x); }

void FilterTensor::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("FilterTensor::save: cannot open " + path);
  const char magic[4] = {'F', 'G', 'D', 'T'};
  out.write(magic, 4);
  const std::uint32_t fields[3] = {static_cast<std::uint32_t>(height_),
                                   static_cast<std::uint32_t>(width_),
                                   static_cast<std::uint32_t>(radius_)};
  out.write(reinterpret_cast<const char*>(fields), sizeof(fields));
  const std::size_t hw = static_cast<std::size_t>(height_) * width_;
  const std::size_t kpp = weights_per_pixel();
  std::vector<float> block(kpp);
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t k = 0; k < kpp; ++k) block[k] = static_cast<float>(weights_[k * hw + p]);
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(kpp * sizeof(float)));
  }
  if (!out) throw std::runtime_error("FilterTensor::save: write failed for " + path);
}

FilterTensor FilterTensor::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("FilterTensor::load: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FGDT", 4) != 0) {
    throw std::runtime_error("FilterTensor::load: bad magic in " + path);
  }
  std::uint32_t fields[3];
  in.read(reinterpret_cast<char*>(fields), sizeof(fields));
  if (!in) throw std::runtime_error("FilterTensor::load: truncated header in " + path);
  if (fields[0] < 1 || fields[1] < 1 || fields[0] > (1u << 20) || fields[1] > (1u << 20) ||
      fields[2] > (1u << 16)) {
    throw std::runtime_error("FilterTensor::load: implausible dimensions in " + path);
  }
  FilterTensor f(static_cast<int>(fields[0]), static_cast<int>(fields[1]),
                 static_cast<int>(fields[2]));
  const std::size_t hw = static_cast<std::size_t>(f.height_) * f.width_;
  const std::size_t kpp = f.weights_per_pixel();
  std::vector<float> block(kpp);
  for (std::size_t p = 0; p < hw; ++p) {
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(kpp * sizeof(float)));
    if (!in) throw std::runtime_error("FilterTensor::load: truncated weights in " + path);
    for (std::size_t k = 0; k < kpp; ++k) f.weights_[k * hw + p] = block[k];
  }
  return f;
}

} // namespace fgd
