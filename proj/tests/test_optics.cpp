// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "dpsim/error.hpp"
#include "dpsim/optics.hpp"
#include "support.hpp"

namespace dpsim {
namespace {

// Independent y-nu marginal ray trace: returns (EFL, BFD).
std::pair<double, double> ynu_trace(const LensPrescription& lens) {
  double y = 1.0, nu = 0.0, n = 1.0;
  const std::size_t last = lens.last_optical_index();
  for (std::size_t k = 0; k <= last; ++k) {
    const SurfaceSpec& s = lens.surfaces[k];
    const double n2 = s.index_after();
    nu = nu - y * (n2 - n) * s.curvature();
    n = n2;
    if (k < last) y += s.thickness * nu / n;
  }
  const double u = nu / n;
  return {-1.0 / u, -y / u};
}

TEST(Sag, SphereMatchesCircle) {
  SurfaceSpec s;
  s.radius = 50.0;
  s.semi_diameter = 20.0;
  for (double h : {0.0, 5.0, 12.5, 19.0}) EXPECT_NEAR(surface_sag(s, h), 50.0 - std::sqrt(2500.0 - h * h), 1e-12);
  s.radius = -50.0;
  EXPECT_NEAR(surface_sag(s, 10.0), -(50.0 - std::sqrt(2400.0)), 1e-12);
}

TEST(Sag, AsphereAddsPolynomial) {
  SurfaceSpec s;
  s.kind = SurfaceKind::EvenAsphere;
  s.radius = 0.0;
  s.asphere = {1e-3, 0, 0, 0, 0};
  EXPECT_NEAR(surface_sag(s, 2.0), 16e-3, 1e-15);
  s.radius = 1.0;
  s.conic = 3.0;
  EXPECT_THROW(surface_sag(s, 0.8), DomainError);
}

TEST(Refract, SnellsLaw) {
  const double theta = 0.4;
  const Vec3 dir{std::sin(theta), 0.0, std::cos(theta)};
  const auto out = refract(dir, Vec3{0, 0, -1}, 1.0, 1.5);
  ASSERT_TRUE(out.has_value());
  EXPECT_NEAR(out->x, std::sin(theta) / 1.5, 1e-14);
  EXPECT_NEAR(norm(*out), 1.0, 1e-14);
  // Same result with the normal flipped.
  const auto flipped = refract(dir, Vec3{0, 0, 1}, 1.0, 1.5);
  EXPECT_NEAR(flipped->x, out->x, 1e-15);
  EXPECT_NEAR(flipped->z, out->z, 1e-15);
}

TEST(Refract, TotalInternalReflection) {
  const double theta = 0.9;  // beyond asin(1/1.5)
  EXPECT_FALSE(refract(Vec3{std::sin(theta), 0, std::cos(theta)}, Vec3{0, 0, -1}, 1.5, 1.0).has_value());
}

TEST(Paraxial, MatchesIndependentMarginalRay) {
  for (const LensPrescription& lens : {test::rf50(), test::rf35()}) {
    const auto [efl, bfd] = ynu_trace(lens);
    EXPECT_NEAR(paraxial_efl(lens), efl, 1e-9 * std::abs(efl));
    EXPECT_NEAR(paraxial_bfd(lens), bfd, 1e-9 * std::abs(bfd));
  }
}

TEST(Paraxial, Rf50FocalLengthAndBackFocus) {
  const LensPrescription lens = test::rf50();
  EXPECT_NEAR(paraxial_efl(lens), 50.0, 1.0);
  // The table's last gap is the back focal distance for an object at infinity.
  EXPECT_NEAR(paraxial_bfd(lens), 25.67, 0.05);
}

TEST(Paraxial, SingletThinLensFormula) {
  // Thin biconvex singlet: 1/f = (n - 1)(1/R1 - 1/R2).
  const LensPrescription lens = parse_lens_prescription(
      "1 STOP - 0 - 10\n2 S 100 0 1.5/60 20\n3 S -100 95 - 20\n4 SENSOR - - - 30\n");
  EXPECT_NEAR(paraxial_efl(lens), 100.0, 1e-9);
  EXPECT_NEAR(paraxial_bfd(lens), 100.0, 1e-9);
}

TEST(Trace, RealRayNearAxisConvergesToParaxialFocus) {
  LensPrescription lens = test::rf50();
  const double bfd = paraxial_bfd(lens);
  lens.surfaces[lens.last_optical_index()].thickness = bfd;
  const auto z = lens.vertex_positions();
  const TraceOutcome out = trace_ray(lens, z, Ray{Vec3{0.01, 0.0, -10.0}, Vec3{0, 0, 1}});
  ASSERT_TRUE(out.landed());
  EXPECT_NEAR(out.landing.x, 0.0, 1e-6);
  // EFL from the real ray slope.
  EXPECT_NEAR(-0.01 / (out.direction.x / out.direction.z), paraxial_efl(lens), 1e-3);
}

TEST(Trace, MirrorRaysLandMirrored) {
  const LensPrescription lens = refocus(set_f_number(test::rf50(), 4.0), 1.0);
  const auto z = lens.vertex_positions();
  const Vec3 d = normalized(Vec3{0.05, -0.03, 1.0});
  const TraceOutcome a = trace_ray(lens, z, Ray{Vec3{1.5, 2.0, -5.0}, d});
  const TraceOutcome b = trace_ray(lens, z, Ray{Vec3{-1.5, 2.0, -5.0}, Vec3{-d.x, d.y, d.z}});
  ASSERT_TRUE(a.landed());
  ASSERT_TRUE(b.landed());
  EXPECT_EQ(a.landing.x, -b.landing.x);
  EXPECT_EQ(a.landing.y, b.landing.y);
}

TEST(Trace, ApertureClip) {
  const LensPrescription lens = test::rf50();
  const TraceOutcome out = trace_ray(lens, Ray{Vec3{14.0, 0.0, -1.0}, Vec3{0, 0, 1}});
  EXPECT_FALSE(out.landed());
  EXPECT_EQ(out.miss_reason, MissReason::ApertureClip);
}

TEST(Pupil, Rf50EntrancePupil) {
  const LensPrescription lens = test::rf50();
  const EntrancePupil p = locate_entrance_pupil(lens);
  EXPECT_NEAR(p.diameter, paraxial_efl(lens) / 1.8, 0.05 * p.diameter);
  EXPECT_GT(p.z, 0.0);
  EXPECT_NEAR(p.diameter, p.magnification * 2.0 * lens.surfaces[lens.stop_index].semi_diameter, 1e-12);
}

TEST(Pupil, FNumberScalesPupil) {
  const LensPrescription lens = test::rf50();
  const EntrancePupil wide = locate_entrance_pupil(lens);
  const EntrancePupil f4 = locate_entrance_pupil(set_f_number(lens, 4.0));
  EXPECT_NEAR(f4.diameter, wide.diameter * 1.8 / 4.0, 1e-12);
  EXPECT_NEAR(f4.diameter, 12.5, 0.05 * 12.5);
  EXPECT_THROW(set_f_number(lens, 1.2), InvalidArgument);
}

TEST(Refocus, OneMetreExtendsBackFocus) {
  const LensPrescription lens = test::rf50();
  const LensPrescription at1 = refocus(lens, 1.0);
  const LensPrescription inf = refocus(lens, std::numeric_limits<double>::infinity());
  const std::size_t g = lens.last_optical_index();
  EXPECT_NEAR(inf.surfaces[g].thickness, paraxial_bfd(lens), 1e-12);
  const double shift = at1.surfaces[g].thickness - inf.surfaces[g].thickness;
  const double f = paraxial_efl(lens);
  EXPECT_NEAR(shift, f * f / (1000.0 - f), 0.15 * shift);
  EXPECT_THROW(refocus(lens, -1.0), InvalidArgument);
}

TEST(PupilSampling, EqualAreaAndMirrorClosed) {
  EntrancePupil p;
  p.z = 10.0;
  p.diameter = 8.0;
  const auto pts = sample_pupil(p, 4096);
  ASSERT_EQ(pts.size(), 4096u);
  std::set<std::pair<double, double>> set;
  double r2 = 0.0;
  for (const Vec2& q : pts) {
    set.insert({q.x, q.y});
    EXPECT_LE(q.x * q.x + q.y * q.y, 16.0 + 1e-12);
    r2 += q.x * q.x + q.y * q.y;
  }
  for (const Vec2& q : pts) {
    EXPECT_TRUE(set.count({-q.x, q.y}));
    EXPECT_TRUE(set.count({q.x, -q.y}));
  }
  // Uniform disc: E[r^2] = R^2 / 2.
  EXPECT_NEAR(r2 / pts.size(), 8.0, 0.01);
}

TEST(PupilSampling, RejectsBadFactoring) {
  EntrancePupil p;
  p.diameter = 1.0;
  EXPECT_THROW(sample_pupil(p, 4, 6), InvalidArgument);
  EXPECT_THROW(sample_pupil(p, 0), InvalidArgument);
}

}  // namespace
}  // namespace dpsim
