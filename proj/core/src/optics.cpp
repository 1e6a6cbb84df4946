// SPDX-License-Identifier: Apache-2.0
#include "dpsim/optics.hpp"

#include <cmath>
#include <numbers>

#include "dpsim/error.hpp"

namespace dpsim {
namespace {

constexpr double kNewtonTolerance = 1e-10;  // mm
constexpr int kNewtonMaxIterations = 50;

// Sag as a function of rho^2 so that mirrored rays see bit-identical values.
std::optional<double> sag_rho2(const SurfaceSpec& s, double rho2) {
  if (s.planar() && s.kind != SurfaceKind::EvenAsphere) return 0.0;
  const double c = s.curvature();
  double sag = 0.0;
  if (c != 0.0) {
    const double arg = 1.0 - (1.0 + s.conic) * c * c * rho2;
    if (arg < 0.0) return std::nullopt;
    sag = c * rho2 / (1.0 + std::sqrt(arg));
  }
  if (s.kind == SurfaceKind::EvenAsphere) {
    const auto& a = s.asphere;
    const double r4 = rho2 * rho2;
    sag += r4 * (a[0] + rho2 * (a[1] + rho2 * (a[2] + rho2 * (a[3] + rho2 * a[4]))));
  }
  return sag;
}

// d(sag)/d(rho) divided by rho.
std::optional<double> slope_over_rho(const SurfaceSpec& s, double rho2) {
  const double c = s.curvature();
  double q = 0.0;
  if (c != 0.0) {
    const double arg = 1.0 - (1.0 + s.conic) * c * c * rho2;
    if (arg <= 0.0) return std::nullopt;
    q = c / std::sqrt(arg);
  }
  if (s.kind == SurfaceKind::EvenAsphere) {
    const auto& a = s.asphere;
    q += rho2 * (4.0 * a[0] + rho2 * (6.0 * a[1] + rho2 * (8.0 * a[2] + rho2 * (10.0 * a[3] + rho2 * 12.0 * a[4]))));
  }
  return q;
}

// Ray parameter of the surface crossing, origin relative to the vertex.
std::optional<double> intersect(const SurfaceSpec& s, Vec3 o, Vec3 d) {
  if (s.planar() && s.kind != SurfaceKind::EvenAsphere) return -o.z / d.z;
  if (s.kind == SurfaceKind::Sphere && s.conic == 0.0) {
    const double c = s.curvature();
    const double b = c * dot(o, d) - d.z;
    const double cc = c * dot(o, o) - 2.0 * o.z;
    const double disc = b * b - c * cc;
    if (disc < 0.0) return std::nullopt;
    const double den = -b + std::sqrt(disc);
    if (!(den > 0.0)) return std::nullopt;
    return cc / den;
  }
  // Conic or asphere: damped Newton on z(t) - sag(rho(t)) from the vertex plane.
  double t = -o.z / d.z;
  double g_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const Vec3 p = o + t * d;
    const double rho2 = p.x * p.x + p.y * p.y;
    const auto sag = sag_rho2(s, rho2);
    const auto q = slope_over_rho(s, rho2);
    if (!sag || !q) return std::nullopt;
    const double g = p.z - *sag;
    const double dg = d.z - *q * (p.x * d.x + p.y * d.y);
    if (dg == 0.0 || !std::isfinite(dg)) return std::nullopt;
    double step = g / dg;
    if (std::abs(g) > std::abs(g_prev)) step *= 0.5;
    g_prev = g;
    t -= step;
    if (std::abs(step) < kNewtonTolerance) return t;
  }
  return std::nullopt;
}

}  // namespace

double surface_sag(const SurfaceSpec& surface, double h) {
  const auto sag = sag_rho2(surface, h * h);
  if (!sag) throw DomainError("sag undefined at h = " + std::to_string(h));
  return *sag;
}

std::optional<Vec3> refract(Vec3 dir, Vec3 normal, double n1, double n2) {
  double cos_i = -dot(normal, dir);
  if (cos_i < 0.0) {
    normal = -normal;
    cos_i = -cos_i;
  }
  const double eta = n1 / n2;
  const double k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
  if (k < 0.0) return std::nullopt;
  return normalized(eta * dir + (eta * cos_i - std::sqrt(k)) * normal);
}

TraceOutcome trace_ray(const LensPrescription& lens, const Ray& ray) {
  const auto z = lens.vertex_positions();
  return trace_ray(lens, z, ray);
}

TraceOutcome trace_ray(const LensPrescription& lens, std::span<const double> vertex_z, const Ray& ray) {
  TraceOutcome out;
  Vec3 pos = ray.origin;
  Vec3 dir = ray.direction;
  double n1 = 1.0;
  const auto miss = [&out](MissReason why) {
    out.status = TraceStatus::Missed;
    out.miss_reason = why;
    return out;
  };
  if (!(dir.z > 0.0)) return miss(MissReason::Diverged);

  for (std::size_t k = 0; k < lens.surfaces.size(); ++k) {
    const SurfaceSpec& s = lens.surfaces[k];
    const Vec3 o{pos.x, pos.y, pos.z - vertex_z[k]};
    if (s.kind == SurfaceKind::Sensor) {
      const double t = -o.z / dir.z;
      out.status = TraceStatus::Landed;
      out.landing = {pos.x + t * dir.x, pos.y + t * dir.y};
      out.direction = dir;
      return out;
    }
    const auto t = intersect(s, o, dir);
    if (!t || !std::isfinite(*t)) return miss(MissReason::NoIntersection);
    const Vec3 p = o + *t * dir;
    const double rho2 = p.x * p.x + p.y * p.y;
    if (rho2 > s.semi_diameter * s.semi_diameter) return miss(MissReason::ApertureClip);
    const double n2 = s.index_after();
    if (n2 != n1) {
      const auto q = slope_over_rho(s, rho2);
      if (!q) return miss(MissReason::NoIntersection);
      const Vec3 normal = normalized({-*q * p.x, -*q * p.y, 1.0});
      const auto refracted = refract(dir, normal, n1, n2);
      if (!refracted) return miss(MissReason::TotalInternalReflection);
      dir = *refracted;
    }
    if (!(dir.z > 0.0)) return miss(MissReason::Diverged);
    n1 = n2;
    pos = {p.x, p.y, p.z + vertex_z[k]};
  }
  return miss(MissReason::NoIntersection);
}

ParaxialMatrix paraxial_system(const LensPrescription& lens, std::size_t first, std::size_t last) {
  ParaxialMatrix m;
  double n_before = first == 0 ? 1.0 : lens.surfaces[first - 1].index_after();
  for (std::size_t k = first; k <= last; ++k) {
    const SurfaceSpec& s = lens.surfaces[k];
    if (k > first) {
      const double gap = lens.surfaces[k - 1].thickness;
      m = ParaxialMatrix{1.0, gap / n_before, 0.0, 1.0} * m;
    }
    const double n_after = s.index_after();
    const double power = (n_after - n_before) * s.curvature();
    m = ParaxialMatrix{1.0, 0.0, -power, 1.0} * m;
    n_before = n_after;
  }
  return m;
}

double paraxial_efl(const LensPrescription& lens) {
  const ParaxialMatrix m = paraxial_system(lens, 0, lens.last_optical_index());
  if (std::abs(m.c) < 1e-12) throw InvalidArgument("afocal system has no focal length");
  return -1.0 / m.c;
}

double paraxial_bfd(const LensPrescription& lens) {
  const std::size_t last = lens.last_optical_index();
  const ParaxialMatrix m = paraxial_system(lens, 0, last);
  if (std::abs(m.c) < 1e-12) throw InvalidArgument("afocal system has no focal length");
  return -m.a * lens.surfaces[last].index_after() / m.c;
}

EntrancePupil locate_entrance_pupil(const LensPrescription& lens) {
  const std::size_t stop = lens.stop_index;
  const double stop_diameter = 2.0 * lens.surfaces[stop].semi_diameter;
  if (stop == 0) return {0.0, stop_diameter, 1.0};
  ParaxialMatrix front = paraxial_system(lens, 0, stop - 1);
  const double gap = lens.surfaces[stop - 1].thickness;
  front = ParaxialMatrix{1.0, gap / lens.surfaces[stop - 1].index_after(), 0.0, 1.0} * front;
  if (std::abs(front.a) < 1e-12) throw InvalidArgument("entrance pupil at infinity (object-space telecentric)");
  EntrancePupil pupil;
  pupil.z = front.b / front.a;
  pupil.magnification = 1.0 / front.a;
  pupil.diameter = stop_diameter * std::abs(pupil.magnification);
  return pupil;
}

LensPrescription set_f_number(const LensPrescription& lens, double f_number) {
  if (!(f_number >= lens.native_f_number * (1.0 - 1e-12)))
    throw InvalidArgument("F/" + std::to_string(f_number) + " is faster than the native aperture");
  LensPrescription out = lens;
  if (f_number != lens.native_f_number) out.surfaces[out.stop_index].semi_diameter *= lens.native_f_number / f_number;
  return out;
}

LensPrescription refocus(const LensPrescription& lens, double focus_distance_m) {
  const std::size_t last = lens.last_optical_index();
  const double n_image = lens.surfaces[last].index_after();
  double gap = 0.0;
  if (std::isinf(focus_distance_m) && focus_distance_m > 0.0) {
    gap = paraxial_bfd(lens);
  } else {
    const double d_mm = focus_distance_m * 1000.0;
    if (!(d_mm > paraxial_efl(lens))) throw InvalidArgument("focus distance must exceed the focal length");
    const ParaxialMatrix m = paraxial_system(lens, 0, last);
    // Axial object point: height d at the vertex plane for unit slope.
    const double y = m.a * d_mm + m.b;
    const double nu = m.c * d_mm + m.d;
    gap = -y * n_image / nu;
  }
  if (!(gap > 0.0) || !std::isfinite(gap)) throw InvalidArgument("object inside the front focal distance");
  LensPrescription out = lens;
  out.surfaces[last].thickness = gap;
  return out;
}

std::vector<Vec2> sample_pupil(const EntrancePupil& pupil, std::size_t n_radial, std::size_t n_angular) {
  if (n_radial == 0 || n_angular == 0 || n_angular % 4 != 0)
    throw InvalidArgument("pupil grid needs n_radial >= 1 and n_angular a positive multiple of 4");
  const double radius = 0.5 * pupil.diameter;
  const std::size_t quarter = n_angular / 4;
  std::vector<double> cs(quarter), sn(quarter);
  for (std::size_t j = 0; j < quarter; ++j) {
    const double phi = (static_cast<double>(j) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(n_angular);
    cs[j] = std::cos(phi);
    sn[j] = std::sin(phi);
  }
  std::vector<Vec2> pts;
  pts.reserve(n_radial * n_angular);
  for (std::size_t i = 0; i < n_radial; ++i) {
    const double r = radius * std::sqrt((static_cast<double>(i) + 0.5) / static_cast<double>(n_radial));
    for (std::size_t j = 0; j < n_angular; ++j) {
      const std::size_t q = j / quarter;
      const std::size_t jj = j % quarter;
      const std::size_t m = quarter - 1 - jj;
      switch (q) {
        case 0: pts.push_back({r * cs[jj], r * sn[jj]}); break;
        case 1: pts.push_back({-(r * cs[m]), r * sn[m]}); break;
        case 2: pts.push_back({-(r * cs[jj]), -(r * sn[jj])}); break;
        default: pts.push_back({r * cs[m], -(r * sn[m])}); break;
      }
    }
  }
  return pts;
}

std::vector<Vec2> sample_pupil(const EntrancePupil& pupil, std::size_t n) {
  if (n == 0) throw InvalidArgument("pupil sample count must be positive");
  const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::size_t n_angular = (root + 3) / 4 * 4;
  while (n_angular <= n && n % n_angular != 0) n_angular += 4;
  if (n_angular > n) throw InvalidArgument("cannot factor " + std::to_string(n) + " rays into a polar grid");
  return sample_pupil(pupil, n / n_angular, n_angular);
}

}  // namespace dpsim
