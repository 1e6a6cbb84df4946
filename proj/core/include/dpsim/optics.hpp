// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dpsim/lens.hpp"
#include "dpsim/vec.hpp"

namespace dpsim {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length, direction.z > 0
};

enum class TraceStatus { Landed, Missed };
enum class MissReason { None, ApertureClip, TotalInternalReflection, NoIntersection, Diverged };

struct TraceOutcome {
  TraceStatus status = TraceStatus::Missed;
  MissReason miss_reason = MissReason::None;
  Vec2 landing;    // sensor-plane point, valid when landed
  Vec3 direction;  // unit direction at the sensor, valid when landed

  bool landed() const noexcept { return status == TraceStatus::Landed; }
};

/// Even-asphere sag at radial height `h`. Planar surfaces return 0.
/// Throws DomainError when the conic square root goes negative.
double surface_sag(const SurfaceSpec& surface, double h);

/// Vector Snell refraction. The normal may face either way. Returns nullopt
/// on total internal reflection.
std::optional<Vec3> refract(Vec3 dir, Vec3 normal, double n1, double n2);

/// Sequential trace from object space to the sensor plane.
TraceOutcome trace_ray(const LensPrescription& lens, const Ray& ray);

/// Same as trace_ray with the vertex positions precomputed.
TraceOutcome trace_ray(const LensPrescription& lens, std::span<const double> vertex_z, const Ray& ray);

/// 2x2 paraxial matrix acting on (height, reduced angle n*u).
struct ParaxialMatrix {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  friend ParaxialMatrix operator*(const ParaxialMatrix& l, const ParaxialMatrix& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
  }
};

/// Product of refractions and gaps from the vertex plane of surface `first`
/// up to (and including) the refraction at surface `last`. Gaps between the
/// two are included; the gap after `last` is not.
ParaxialMatrix paraxial_system(const LensPrescription& lens, std::size_t first, std::size_t last);

double paraxial_efl(const LensPrescription& lens);

/// Back focal distance measured from the last refracting surface.
double paraxial_bfd(const LensPrescription& lens);

struct EntrancePupil {
  double z = 0.0;         // axial position relative to surface 0's vertex
  double diameter = 0.0;
  double magnification = 1.0;  // pupil diameter / stop diameter
};

EntrancePupil locate_entrance_pupil(const LensPrescription& lens);

/// Stops the lens down by scaling the physical stop. N must not be below the
/// native F-number.
LensPrescription set_f_number(const LensPrescription& lens, double f_number);

/// Moves the sensor to the paraxial image of an on-axis object
/// `focus_distance_m` metres in front of surface 0's vertex. Infinity is
/// accepted.
LensPrescription refocus(const LensPrescription& lens, double focus_distance_m);

/// Equal-area polar grid of n_radial * n_angular aim points on the pupil
/// plane. The set is exactly closed under x- and y-mirror reflection.
std::vector<Vec2> sample_pupil(const EntrancePupil& pupil, std::size_t n_radial, std::size_t n_angular);

/// As above with the default factoring: n_angular is the smallest multiple
/// of 4 that is at least ceil(sqrt(n)) and divides n.
std::vector<Vec2> sample_pupil(const EntrancePupil& pupil, std::size_t n);

}  // namespace dpsim
