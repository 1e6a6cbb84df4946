// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "dpsim/error.hpp"
#include "dpsim/psf_engine.hpp"
#include "support.hpp"

namespace dpsim {
namespace {

class Rf50Rig : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { rig_ = new CameraRig(test::rf50_rig()); }
  static void TearDownTestSuite() {
    delete rig_;
    rig_ = nullptr;
  }
  static const CameraRig& rig() { return *rig_; }

 private:
  static inline CameraRig* rig_ = nullptr;
};

TEST_F(Rf50Rig, CachedQuantities) {
  EXPECT_NEAR(rig().efl(), 50.0, 1.0);
  // The stop is scaled from the native aperture, so EFL / N holds only approximately.
  EXPECT_NEAR(rig().pupil().diameter, rig().efl() / 4.0, 0.05 * rig().efl() / 4.0);
  EXPECT_EQ(rig().pupil_samples().size(), 4096u);
}

TEST_F(Rf50Rig, FrustumMapping) {
  const FrustumPoint p{0.5, -0.25, 2.0};
  const WorldPoint w = frustum_to_world(rig(), p);
  EXPECT_NEAR(w.x_mm, 0.5 * 18.0 * 2000.0 / rig().efl(), 1e-9);
  EXPECT_NEAR(w.y_mm, -0.25 * 12.0 * 2000.0 / rig().efl(), 1e-9);
  const FrustumPoint back = world_to_frustum(rig(), w);
  EXPECT_NEAR(back.u, p.u, 1e-12);
  EXPECT_NEAR(back.v, p.v, 1e-12);
  EXPECT_THROW(check_in_frustum(rig(), {0, 0, 0.1}), InvalidArgument);
  EXPECT_THROW(check_in_frustum(rig(), {1.2, 0, 1.0}), InvalidArgument);
  EXPECT_NO_THROW(check_in_frustum(rig(), {-1, 1, 20.0}));
}

TEST_F(Rf50Rig, FocusedPointIsAnImpulse) {
  const DpPsf psf = trace_dp_psf(rig(), FrustumPoint{0, 0, 1.0});
  const int c = 21 * 21 / 2;
  EXPECT_DOUBLE_EQ(psf.left[c], 2048.0);
  EXPECT_DOUBLE_EQ(psf.right[c], 2048.0);
  EXPECT_EQ(psf.missed_count, 0u);
  EXPECT_EQ(psf.anchor, (PixelIndex{384, 256}));
}

TEST_F(Rf50Rig, ConservationAcrossFrustum) {
  for (const FrustumPoint& p : {FrustumPoint{0.9, -0.8, 0.5}, FrustumPoint{-1, 1, 20}, FrustumPoint{0.3, 0.4, 3}}) {
    const DpPsf psf = trace_dp_psf(rig(), p);
    EXPECT_DOUBLE_EQ(psf.total() + static_cast<double>(psf.missed_count), 4096.0);
    EXPECT_LE(psf.vignetted + psf.outside_window, psf.missed_count);
  }
}

TEST_F(Rf50Rig, OnAxisMirrorSymmetry) {
  for (double d : {0.5, 3.0}) {
    const DpPsf psf = trace_dp_psf(rig(), FrustumPoint{0, 0, d});
    EXPECT_EQ(flip_x(psf.right, psf.ks), psf.left) << d;
  }
}

TEST_F(Rf50Rig, DisparitySignFlipsThroughFocus) {
  const double near = centroid_disparity(trace_dp_psf(rig(), FrustumPoint{0, 0, 0.5}));
  const double far = centroid_disparity(trace_dp_psf(rig(), FrustumPoint{0, 0, 1.5}));
  EXPECT_GT(near, 0.5);
  EXPECT_LT(far, 0.0);
}

TEST_F(Rf50Rig, VignettingGrowsOffAxis) {
  const DpPsf centre = trace_dp_psf(rig(), FrustumPoint{0, 0, 0.5});
  const DpPsf corner = trace_dp_psf(rig(), FrustumPoint{1, 1, 0.5});
  EXPECT_EQ(centre.vignetted, 0u);
  EXPECT_GE(corner.vignetted, centre.vignetted);
}

TEST_F(Rf50Rig, ChiefRayAnchor) {
  const FrustumPoint p{0.5, 0.5, 2.0};
  const DpPsf psf = trace_dp_psf(rig(), p);
  EXPECT_EQ(psf.anchor, chief_ray_anchor(rig(), p));
  // The image is inverted on the sensor, and focusing at 1 m enlarges it by
  // roughly v / f over the infinity-focus position half way to the edge.
  EXPECT_NEAR(psf.anchor.i, 384 - 192 * 1.05, 6);
  EXPECT_LT(psf.anchor.j, 256 - 96);
}

TEST_F(Rf50Rig, CocDiameterFormula) {
  const double A = rig().pupil().diameter, F = rig().efl();
  for (double d : {0.5, 2.0, 1.0}) {
    const double dmm = d * 1000.0, fmm = 1000.0;
    EXPECT_NEAR(coc_diameter_mm(rig(), d), A * std::abs(dmm - fmm) / dmm * F / (fmm - F), 1e-12);
  }
  EXPECT_DOUBLE_EQ(coc_diameter_mm(rig(), 1.0), 0.0);
}

TEST_F(Rf50Rig, CocKernelBehaviour) {
  const DpPsf focus = coc_dp_psf(rig(), FrustumPoint{0, 0, 1.0});
  EXPECT_DOUBLE_EQ(focus.left[21 * 21 / 2], 0.5);
  EXPECT_DOUBLE_EQ(focus.right[21 * 21 / 2], 0.5);
  const DpPsf near = coc_dp_psf(rig(), FrustumPoint{0, 0, 0.5});
  EXPECT_NEAR(near.total(), 1.0, 1e-12);
  EXPECT_GT(centroid_disparity(near), 0.0);
  const DpPsf far = coc_dp_psf(rig(), FrustumPoint{0, 0, 5.0});
  EXPECT_LT(centroid_disparity(far), 0.0);
  EXPECT_EQ(flip_x(near.right, 21), near.left);
}

TEST_F(Rf50Rig, GridPointsDeterministic) {
  GridSpec lat;
  lat.n_u = 3;
  lat.n_v = 2;
  lat.n_d = 4;
  const auto pts = grid_points(rig(), lat);
  ASSERT_EQ(pts.size(), 24u);
  for (const auto& p : pts) EXPECT_NO_THROW(check_in_frustum(rig(), p));
  GridSpec rnd;
  rnd.mode = GridSpec::Mode::Random;
  rnd.count = 50;
  rnd.seed = 3;
  EXPECT_EQ(grid_points(rig(), rnd), grid_points(rig(), rnd));
  rnd.seed = 4;
  const auto other = grid_points(rig(), rnd);
  EXPECT_NE(grid_points(rig(), GridSpec{GridSpec::Mode::Random, 0, 0, 0, 50, 3}), other);
}

TEST_F(Rf50Rig, GenerateGridRecordsMatchPoints) {
  GridSpec spec{GridSpec::Mode::Lattice, 2, 2, 2, 0, 0};
  const PsfGrid grid = generate_grid(rig(), spec);
  const auto pts = grid_points(rig(), spec);
  ASSERT_EQ(grid.records.size(), pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_EQ(grid.records[k].point, pts[k]);
    EXPECT_EQ(grid.records[k].psf.left, trace_dp_psf(rig(), pts[k]).left);
  }
}

TEST_F(Rf50Rig, GridSearchDegenerateAndTieBreak) {
  const double ps = rig().sensor().pitch();
  const std::vector<ReferencePsf> refs = {{FrustumPoint{0, 0, 0.5}, trace_dp_psf(rig(), FrustumPoint{0, 0, 0.5})}};
  DpSearchRanges one{{0.78}, {1.44}, {0.30}, {0.50}};
  const DpSearchResult r1 = grid_search_dp_params(rig(), refs, one);
  EXPECT_NEAR(r1.best_row.ncc, 1.0, 1e-12);
  EXPECT_NEAR(r1.best_row.nsd, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(r1.best.h, 0.78 * ps);

  // f <= h candidates are flagged, not scored.
  DpSearchRanges bad{{0.78}, {0.70, 1.44}, {0.30}, {0.50}};
  const DpSearchResult r2 = grid_search_dp_params(rig(), refs, bad);
  ASSERT_EQ(r2.table.size(), 2u);
  EXPECT_FALSE(r2.table[0].valid);
  EXPECT_TRUE(r2.table[1].valid);
  EXPECT_EQ(score_table_csv(r2.table).substr(0, 16), "h,f,w,r,ncc,nsd\n");
  EXPECT_THROW(grid_search_dp_params(rig(), refs, DpSearchRanges{{0.78}, {0.70}, {0.30}, {0.50}}), InvalidArgument);
}

TEST_F(Rf50Rig, GridSearchRecoversTruth) {
  const std::vector<FrustumPoint> pts = {{0, 0, 0.5}, {0.6, -0.4, 0.7}, {-0.5, 0.5, 5.0}};
  std::vector<ReferencePsf> refs;
  for (const auto& p : pts) refs.push_back({p, trace_dp_psf(rig(), p)});
  DpSearchRanges ranges{{0.70, 0.78, 0.86}, {1.36, 1.44, 1.52}, {0.26, 0.30, 0.34}, {0.45, 0.50}};
  const DpSearchResult res = grid_search_dp_params(rig(), refs, ranges);
  EXPECT_DOUBLE_EQ(res.best_row.h, 0.78);
  EXPECT_DOUBLE_EQ(res.best_row.f, 1.44);
  EXPECT_DOUBLE_EQ(res.best_row.w, 0.30);
  EXPECT_DOUBLE_EQ(res.best_row.r, 0.50);
  EXPECT_EQ(res.table.size(), 54u);
}

TEST(DefaultRanges, LatticeContainsCalibratedValues) {
  const DpSearchRanges r = DpSearchRanges::defaults();
  EXPECT_EQ(r.h.size(), 36u);
  EXPECT_EQ(r.f.size(), 51u);
  EXPECT_EQ(r.w.size(), 21u);
  EXPECT_NE(std::find(r.h.begin(), r.h.end(), 0.78), r.h.end());
  EXPECT_NE(std::find(r.f.begin(), r.f.end(), 1.44), r.f.end());
  EXPECT_NE(std::find(r.w.begin(), r.w.end(), 0.30), r.w.end());
  EXPECT_NE(std::find(r.r.begin(), r.r.end(), 0.50), r.r.end());
}

TEST(Rig, ValidatesSettings) {
  RigSettings s;
  s.ks = 20;
  EXPECT_THROW(test::rf50_rig(s), InvalidArgument);
  s = {};
  s.f_number = 1.0;
  EXPECT_THROW(test::rf50_rig(s), InvalidArgument);
  s = {};
  s.d_min = 30.0;
  EXPECT_THROW(test::rf50_rig(s), InvalidArgument);
}

}  // namespace
}  // namespace dpsim
