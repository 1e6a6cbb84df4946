// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "dpsim/psf.hpp"
#include "dpsim/vec.hpp"

namespace dpsim {

/// Microlens and sub-pixel structure of one dual-pixel site, in millimetres.
///
/// The microlens is a thin lens of radius `r` and focal length `f` centred on
/// the pixel; the two photodiodes of width `w` sit a distance `h` below it.
/// The left diode covers [x_i, x_i + w] and the right one [x_i - w, x_i].
struct DpPixelGeometry {
  double ps = 0.0;
  double r = 0.0;
  double f = 0.0;
  double h = 0.0;
  double w = 0.0;

  static DpPixelGeometry from_ratios(double ps, double r_over_ps, double f_over_ps, double h_over_ps,
                                     double w_over_ps);
  /// h = 0.78 ps, f = 1.44 ps, w = 0.30 ps, r = 0.50 ps.
  static DpPixelGeometry calibrated_default(double ps);

  void validate() const;
  friend bool operator==(const DpPixelGeometry&, const DpPixelGeometry&) = default;
};

struct SensorGeometry {
  double width = 0.0;   // mm
  double height = 0.0;  // mm
  int cols = 0;
  int rows = 0;

  double pitch() const noexcept { return width / cols; }
  void validate() const;
};

enum class SubPixel { Left, Right, Missed };

struct PixelLookup {
  std::optional<PixelIndex> index;  // empty when off-sensor
  Vec2 center;                      // lattice cell centre, mm
};

/// Pixel lattice centred on the optical axis; index = floor((coord + extent/2) / ps).
PixelLookup pixel_of(const SensorGeometry& sensor, Vec2 point);

/// Lattice index without the sensor-extent check.
PixelIndex lattice_index(const SensorGeometry& sensor, Vec2 point);

/// Boundary lines for a ray refracted by the microlens.
struct SubPixelBounds {
  double left = 0.0;   // x_L
  double middle = 0.0;  // x_M
  double right = 0.0;  // x_R
};

SubPixelBounds refracted_bounds(const DpPixelGeometry& geom, double x_i, double tan_theta);
SubPixelBounds direct_bounds(const DpPixelGeometry& geom, double x_i, double tan_theta);

/// Left iff x_M < x_k <= x_L, Right iff x_R <= x_k <= x_M, otherwise Missed.
SubPixel assign_refracted(const DpPixelGeometry& geom, double x_i, double x_k, double tan_theta);
SubPixel assign_direct(const DpPixelGeometry& geom, double x_i, double x_k, double tan_theta);

/// Assignment inside a known lattice cell: microlens containment is a disc of
/// radius r about `center`, tan(theta) = dir.x / dir.z.
SubPixel assign_in_cell(const DpPixelGeometry& geom, Vec2 center, Vec2 landing, Vec3 dir);

struct SubPixelHit {
  std::optional<PixelIndex> pixel;
  SubPixel side = SubPixel::Missed;
};

SubPixelHit assign_subpixel(const DpPixelGeometry& geom, const SensorGeometry& sensor, Vec2 landing, Vec3 dir);

/// Unit-impulse accumulation into a ks x ks window centred on `anchor`.
DpPsf accumulate_psf(std::span<const SubPixelHit> hits, PixelIndex anchor, int ks);

}  // namespace dpsim
