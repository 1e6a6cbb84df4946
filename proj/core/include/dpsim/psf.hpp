// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpsim {

/// Column `i`, row `j` on the pixel lattice.
struct PixelIndex {
  int i = 0;
  int j = 0;
  friend constexpr bool operator==(PixelIndex, PixelIndex) = default;
};

enum class PsfNormalization { RawCounts, Max, Sum };

/// Left/right kernel pair of size ks x ks, row-major, centred on `anchor`.
///
/// Raw counts satisfy left_total + right_total + missed_count = rays emitted.
/// `missed_count` includes rays lost in the lens (`vignetted`), rays that hit
/// the dead zone between sub-pixels, and rays assigned to a sub-pixel outside
/// the window (`outside_window`).
struct DpPsf {
  int ks = 0;
  std::vector<double> left;
  std::vector<double> right;
  PixelIndex anchor;
  std::uint64_t missed_count = 0;
  std::uint64_t outside_window = 0;
  std::uint64_t vignetted = 0;
  PsfNormalization normalization = PsfNormalization::RawCounts;

  static DpPsf zeros(int ks);

  std::size_t cells() const noexcept { return static_cast<std::size_t>(ks) * static_cast<std::size_t>(ks); }
  double left_total() const;
  double right_total() const;
  double total() const { return left_total() + right_total(); }
  bool all_zero() const;

  /// Left kernel followed by the right kernel.
  std::vector<double> concatenated() const;
};

/// Joint max or joint sum normalization of both kernels.
DpPsf normalize(const DpPsf& psf, PsfNormalization mode);

/// Normalized cross-correlation over the concatenated pair.
double ncc(const DpPsf& a, const DpPsf& b);

/// Normalized squared difference over the concatenated pair.
double nsd(const DpPsf& a, const DpPsf& b);

/// Energy-weighted mean column offset from the window centre, in pixels.
double centroid_x(std::span<const double> kernel, int ks);

/// centroid_x(left) - centroid_x(right).
double centroid_disparity(const DpPsf& psf);

/// Mirrors a single ks x ks kernel left to right.
std::vector<double> flip_x(std::span<const double> kernel, int ks);

}  // namespace dpsim
