// SPDX-License-Identifier: Apache-2.0
#include "dpsim/image_metrics.hpp"

#include <array>
#include <cmath>

#include "dpsim/error.hpp"

namespace dpsim {

namespace {

void check_pair(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidArgument("image shapes differ");
  if (a.data.empty()) throw InvalidArgument("empty image");
}

constexpr int kTaps = 11;

std::array<double, kTaps> gaussian_taps() {
  std::array<double, kTaps> g{};
  double sum = 0.0;
  for (int k = 0; k < kTaps; ++k) {
    const double x = k - kTaps / 2;
    g[k] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
    sum += g[k];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Valid-region separable filter of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::array<double, kTaps>& g) {
  const int ow = w - kTaps + 1, oh = h - kTaps + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kTaps; ++k) s += g[k] * src[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kTaps; ++k) s += g[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_pair(a, b);
  double se = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data.size());
  if (mse < 1e-10) return 99.0;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
  check_pair(a, b);
  if (a.width < kTaps || a.height < kTaps) throw InvalidArgument("SSIM needs images of at least 11x11");
  const double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  const double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const auto g = gaussian_taps();
  const std::size_t n = static_cast<std::size_t>(a.width) * a.height;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
    for (std::size_t k = 0; k < n; ++k) {
      pa[k] = a.data[k * a.channels + c];
      pb[k] = b.data[k * b.channels + c];
      paa[k] = pa[k] * pa[k];
      pbb[k] = pb[k] * pb[k];
      pab[k] = pa[k] * pb[k];
    }
    const auto ma = filter_valid(pa, a.width, a.height, g);
    const auto mb = filter_valid(pb, a.width, a.height, g);
    const auto saa = filter_valid(paa, a.width, a.height, g);
    const auto sbb = filter_valid(pbb, a.width, a.height, g);
    const auto sab = filter_valid(pab, a.width, a.height, g);
    double acc = 0.0;
    for (std::size_t k = 0; k < ma.size(); ++k) {
      const double va = saa[k] - ma[k] * ma[k];
      const double vb = sbb[k] - mb[k] * mb[k];
      const double cov = sab[k] - ma[k] * mb[k];
      acc += ((2.0 * ma[k] * mb[k] + c1) * (2.0 * cov + c2)) /
             ((ma[k] * ma[k] + mb[k] * mb[k] + c1) * (va + vb + c2));
    }
    total += acc / static_cast<double>(ma.size());
  }
  return total / a.channels;
}

}  // namespace dpsim
