// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/dp_sensor.hpp"
#include "dpsim/lens.hpp"
#include "dpsim/optics.hpp"
#include "dpsim/psf.hpp"

namespace dpsim {

/// Imaging settings applied on top of a design prescription.
struct RigSettings {
  double focus_m = 1.0;  // measured from the first lens vertex; may be +inf
  double f_number = 4.0;
  double d_min = 0.5;  // metres
  double d_max = 20.0;
  int n_rays = 4096;
  int ks = 21;
};

/// A lens stopped down and focused in front of a dual-pixel sensor.
///
/// Construction validates every invariant and caches the paraxial
/// quantities and pupil samples shared by all traces.
class CameraRig {
 public:
  CameraRig(const LensPrescription& design, const SensorGeometry& sensor, const DpPixelGeometry& dp,
            const RigSettings& settings);

  /// Same optics with a different DP pixel structure.
  CameraRig with_dp(const DpPixelGeometry& dp) const;
  CameraRig with_ks(int ks) const;

  const LensPrescription& lens() const noexcept { return lens_; }
  const SensorGeometry& sensor() const noexcept { return sensor_; }
  const DpPixelGeometry& dp() const noexcept { return dp_; }
  const RigSettings& settings() const noexcept { return settings_; }
  double efl() const noexcept { return efl_; }
  const EntrancePupil& pupil() const noexcept { return pupil_; }
  const std::vector<Vec2>& pupil_samples() const noexcept { return pupil_samples_; }
  const std::vector<double>& vertex_z() const noexcept { return vertex_z_; }
  int ks() const noexcept { return settings_.ks; }
  int n_rays() const noexcept { return settings_.n_rays; }

 private:
  CameraRig() = default;

  LensPrescription lens_;
  SensorGeometry sensor_;
  DpPixelGeometry dp_;
  RigSettings settings_;
  double efl_ = 0.0;
  EntrancePupil pupil_;
  std::vector<Vec2> pupil_samples_;
  std::vector<double> vertex_z_;
};

/// Object point in lens coordinates: lateral mm, axial depth in metres from
/// the first vertex.
struct WorldPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double depth_m = 1.0;
};

/// Object point in normalized frustum coordinates, |u|, |v| <= 1.
struct FrustumPoint {
  double u = 0.0;
  double v = 0.0;
  double depth_m = 1.0;
  friend bool operator==(const FrustumPoint&, const FrustumPoint&) = default;
};

/// x = u * (sensor half-width) * depth / EFL, y likewise with the half-height.
WorldPoint frustum_to_world(const CameraRig& rig, const FrustumPoint& p);
FrustumPoint world_to_frustum(const CameraRig& rig, const WorldPoint& p);

/// Throws InvalidArgument when the point lies outside the frustum.
void check_in_frustum(const CameraRig& rig, const FrustumPoint& p);

/// Lens-traced rays of one object point, before sub-pixel assignment.
struct TracedBundle {
  std::vector<TraceOutcome> rays;
  std::optional<Vec2> chief;  // landing of the ray through the pupil centre
  std::size_t landed = 0;
};

TracedBundle trace_bundle(const CameraRig& rig, const WorldPoint& p);

/// Sub-pixel assignment of a traced bundle. The pixel lattice is aligned so
/// that the chief ray lands on the centre of the anchor cell (the centroid of
/// landed rays stands in when the chief ray is clipped). Kernels are stored
/// in read-out orientation, i.e. rotated 180 degrees from sensor coordinates
/// so that they match the upright image.
DpPsf classify_bundle(const TracedBundle& bundle, const SensorGeometry& sensor, const DpPixelGeometry& dp, int ks);

/// Raw-count DP PSF of an object point. Throws VignettedError when no ray
/// reaches a sub-pixel.
DpPsf trace_dp_psf(const CameraRig& rig, const FrustumPoint& p);
DpPsf trace_dp_psf(const CameraRig& rig, const WorldPoint& p);

/// Sensor pixel containing the chief-ray landing (unbounded lattice).
PixelIndex chief_ray_anchor(const CameraRig& rig, const FrustumPoint& p);

/// Thin-lens circle-of-confusion diameter in mm on the sensor.
double coc_diameter_mm(const CameraRig& rig, double depth_m);

/// Half-disc CoC baseline, sum-normalized. Near points put the left half on
/// the +x side of the window, matching the traced PSFs.
DpPsf coc_dp_psf(const CameraRig& rig, const FrustumPoint& p);

struct GridSpec {
  enum class Mode { Lattice, Random };
  Mode mode = Mode::Lattice;
  int n_u = 0, n_v = 0, n_d = 0;  // lattice
  std::size_t count = 0;          // random
  std::uint64_t seed = 0;
};

struct PsfRecord {
  FrustumPoint point;
  DpPsf psf;  // raw counts; all-zero when skipped
  bool skipped = false;
};

struct PsfGrid {
  int ks = 0;
  std::vector<PsfRecord> records;
  GridSpec spec;
};

/// Sample points of a grid spec: lattice in (u, v) and inverse depth, or
/// seeded uniform draws in the same space.
std::vector<FrustumPoint> grid_points(const CameraRig& rig, const GridSpec& spec);

PsfGrid generate_grid(const CameraRig& rig, const GridSpec& spec);

/// Structural parameter lists in multiples of the pixel pitch.
struct DpSearchRanges {
  std::vector<double> h, f, w, r;

  /// h 0.50..1.20, f 1.00..2.00, w 0.10..0.50 (step 0.02), r {0.40, 0.45, 0.50}.
  static DpSearchRanges defaults();
};

struct DpSearchRow {
  double h = 0.0, f = 0.0, w = 0.0, r = 0.0;  // multiples of ps
  double ncc = 0.0;
  double nsd = 0.0;
  bool valid = true;
};

struct DpSearchResult {
  DpPixelGeometry best;
  DpSearchRow best_row;
  std::vector<DpSearchRow> table;  // iteration order: h, f, w, r (r fastest)
};

struct ReferencePsf {
  FrustumPoint point;
  DpPsf psf;
};

/// Exhaustive search maximizing mean NCC over the reference points, mean
/// NSD breaking ties, then iteration order.
DpSearchResult grid_search_dp_params(const CameraRig& rig_template, const std::vector<ReferencePsf>& reference,
                                     const DpSearchRanges& ranges);

/// CSV with header h,f,w,r,ncc,nsd; invalid candidates are omitted.
std::string score_table_csv(const std::vector<DpSearchRow>& table);

}  // namespace dpsim
