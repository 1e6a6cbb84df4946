// SPDX-License-Identifier: Apache-2.0
#include "dpsim/psf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpsim/error.hpp"

namespace dpsim {
namespace {

struct Moments {
  double aa = 0.0, bb = 0.0, ab = 0.0, diff2 = 0.0;
};

Moments joint_moments(const DpPsf& a, const DpPsf& b) {
  if (a.ks != b.ks) throw InvalidArgument("PSF kernel sizes differ");
  Moments m;
  const auto accumulate = [&m](const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      m.aa += x[k] * x[k];
      m.bb += y[k] * y[k];
      m.ab += x[k] * y[k];
      const double d = x[k] - y[k];
      m.diff2 += d * d;
    }
  };
  accumulate(a.left, b.left);
  accumulate(a.right, b.right);
  if (!(m.aa > 0.0) || !(m.bb > 0.0)) throw InvalidArgument("PSF has zero norm");
  return m;
}

}  // namespace

DpPsf DpPsf::zeros(int ks) {
  if (ks <= 0 || ks % 2 == 0) throw InvalidArgument("kernel size must be odd and positive");
  DpPsf psf;
  psf.ks = ks;
  psf.left.assign(psf.cells(), 0.0);
  psf.right.assign(psf.cells(), 0.0);
  return psf;
}

double DpPsf::left_total() const { return std::accumulate(left.begin(), left.end(), 0.0); }
double DpPsf::right_total() const { return std::accumulate(right.begin(), right.end(), 0.0); }

bool DpPsf::all_zero() const {
  const auto zero = [](double v) { return v == 0.0; };
  return std::all_of(left.begin(), left.end(), zero) && std::all_of(right.begin(), right.end(), zero);
}

std::vector<double> DpPsf::concatenated() const {
  std::vector<double> out(left);
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

DpPsf normalize(const DpPsf& psf, PsfNormalization mode) {
  if (psf.all_zero()) throw InvalidArgument("cannot normalize an all-zero PSF");
  double scale = 1.0;
  switch (mode) {
    case PsfNormalization::RawCounts: return psf;
    case PsfNormalization::Max: {
      const double lmax = *std::max_element(psf.left.begin(), psf.left.end());
      const double rmax = *std::max_element(psf.right.begin(), psf.right.end());
      scale = std::max(lmax, rmax);
      break;
    }
    case PsfNormalization::Sum: scale = psf.total(); break;
  }
  DpPsf out = psf;
  for (double& v : out.left) v /= scale;
  for (double& v : out.right) v /= scale;
  out.normalization = mode;
  return out;
}

double ncc(const DpPsf& a, const DpPsf& b) {
  const Moments m = joint_moments(a, b);
  return m.ab / std::sqrt(m.aa * m.bb);
}

double nsd(const DpPsf& a, const DpPsf& b) {
  const Moments m = joint_moments(a, b);
  return m.diff2 / std::sqrt(m.aa * m.bb);
}

double centroid_x(std::span<const double> kernel, int ks) {
  const int half = ks / 2;
  double mass = 0.0, moment = 0.0;
  for (int row = 0; row < ks; ++row) {
    for (int col = 0; col < ks; ++col) {
      const double v = kernel[static_cast<std::size_t>(row * ks + col)];
      mass += v;
      moment += v * (col - half);
    }
  }
  return mass > 0.0 ? moment / mass : 0.0;
}

double centroid_disparity(const DpPsf& psf) {
  return centroid_x(psf.left, psf.ks) - centroid_x(psf.right, psf.ks);
}

std::vector<double> flip_x(std::span<const double> kernel, int ks) {
  std::vector<double> out(kernel.size());
  for (int row = 0; row < ks; ++row)
    for (int col = 0; col < ks; ++col)
      out[static_cast<std::size_t>(row * ks + col)] = kernel[static_cast<std::size_t>(row * ks + (ks - 1 - col))];
  return out;
}

}  // namespace dpsim
