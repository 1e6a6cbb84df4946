// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dpsim/error.hpp"
#include "dpsim/renderer.hpp"
#include "support.hpp"

namespace dpsim {
namespace {

Image noise(int w, int h, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img = Image::zeros(w, h, c);
  for (double& v : img.data) v = u(rng);
  return img;
}

// Kernels that depend only on the point, cheap to compute.
class SyntheticSource final : public PsfSource {
 public:
  explicit SyntheticSource(int ks) : ks_(ks) {}
  int ks() const override { return ks_; }
  void kernels(std::span<const FrustumPoint> points, std::span<float> out) const override {
    const std::size_t n = static_cast<std::size_t>(ks_) * ks_;
    for (std::size_t p = 0; p < points.size(); ++p) {
      float* dst = out.data() + p * 2 * n;
      float total = 0.0f;
      for (std::size_t k = 0; k < 2 * n; ++k) {
        const auto cell = static_cast<std::size_t>(k * 7 + static_cast<std::size_t>((points[p].u + 1.0) * 50.0));
        dst[k] = 1.0f + static_cast<float>(cell % 11) * static_cast<float>(points[p].depth_m + points[p].v);
        total += dst[k];
      }
      for (std::size_t k = 0; k < 2 * n; ++k) dst[k] /= total;
    }
  }

 private:
  int ks_;
};

PsfMap uniform_map(int w, int h, const std::vector<float>& left, const std::vector<float>& right, int ks) {
  PsfMap m;
  m.width = w;
  m.height = h;
  m.ks = ks;
  for (int k = 0; k < w * h; ++k) {
    m.kernels.insert(m.kernels.end(), left.begin(), left.end());
    m.kernels.insert(m.kernels.end(), right.begin(), right.end());
  }
  return m;
}

TEST(RenderDp, ImpulseKernelSplitsIntensity) {
  std::vector<float> k(9, 0.0f);
  k[4] = 0.5f;
  const Image aif = noise(6, 5, 3, 1);
  const DpImagePair out = render_dp(aif, uniform_map(6, 5, k, k, 3));
  for (std::size_t i = 0; i < aif.data.size(); ++i) {
    EXPECT_DOUBLE_EQ(out.left.data[i], 0.5 * aif.data[i]);
    EXPECT_DOUBLE_EQ(out.right.data[i], 0.5 * aif.data[i]);
  }
}

TEST(RenderDp, OffCentreImpulseShiftsImage) {
  // Kernel mass at cell (row 1, col 2) moves content one pixel to the right.
  std::vector<float> k(9, 0.0f), z(9, 0.0f);
  k[1 * 3 + 2] = 1.0f;
  const Image aif = noise(6, 4, 1, 2);
  const DpImagePair out = render_dp(aif, uniform_map(6, 4, k, z, 3));
  for (int y = 0; y < 4; ++y)
    for (int x = 1; x < 6; ++x) EXPECT_DOUBLE_EQ(out.left.at(x, y, 0), aif.at(x - 1, y, 0));
}

TEST(RenderDp, MatchesNaiveSpatiallyVaryingSum) {
  const int W = 32, H = 32, ks = 5, half = 2;
  const Image aif = noise(W, H, 3, 3);
  Image depth = Image::zeros(W, H, 1);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  for (double& v : depth.data) v = u(rng);
  const PsfMap map = build_psf_map(SyntheticSource(ks), depth);
  const DpImagePair out = render_dp(aif, map);
  double worst = 0.0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) {
        double l = 0.0, r = 0.0;
        for (int i = 0; i < ks; ++i)
          for (int j = 0; j < ks; ++j) {
            // Kernel cell (i, j) reads the input at (x + half - j, y + half - i).
            const int sx = std::clamp(x + half - j, 0, W - 1), sy = std::clamp(y + half - i, 0, H - 1);
            l += map.left(x, y)[i * ks + j] * aif.at(sx, sy, c);
            r += map.right(x, y)[i * ks + j] * aif.at(sx, sy, c);
          }
        worst = std::max({worst, std::abs(l - out.left.at(x, y, c)), std::abs(r - out.right.at(x, y, c))});
      }
  EXPECT_LT(worst, 1e-12);
}

TEST(RenderDp, ConstantKernelIsImageConvolution) {
  // Full 2-D convolution with zero-free interior: compare away from borders.
  const int W = 20, H = 16, ks = 3;
  const std::vector<float> k = {0.0f, 0.1f, 0.0f, 0.2f, 0.3f, 0.0f, 0.0f, 0.0f, 0.4f};
  const Image aif = noise(W, H, 1, 5);
  const DpImagePair out = render_dp(aif, uniform_map(W, H, k, k, ks));
  for (int y = 1; y < H - 1; ++y)
    for (int x = 1; x < W - 1; ++x) {
      // (f * g)(x, y) = sum_{a, b} g(a, b) f(x - a, y - b), kernel origin at the centre.
      double ref = 0.0;
      for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a) ref += k[(b + 1) * 3 + (a + 1)] * aif.at(x - a, y - b, 0);
      EXPECT_NEAR(out.left.at(x, y, 0), ref, 1e-7);
    }
}

TEST(RenderDp, ConstantImageKeepsEnergy) {
  Image aif = Image::zeros(12, 10, 3);
  for (double& v : aif.data) v = 0.7;
  Image depth = Image::zeros(12, 10, 1);
  for (double& v : depth.data) v = 3.0;
  const DpImagePair out = render_dp(aif, build_psf_map(SyntheticSource(5), depth));
  for (std::size_t i = 0; i < aif.data.size(); ++i)
    EXPECT_NEAR(out.left.data[i] + out.right.data[i], 0.7, 1e-6);
}

TEST(RenderDp, LinearInImage) {
  Image depth = Image::zeros(9, 7, 1);
  for (double& v : depth.data) v = 1.5;
  const PsfMap map = build_psf_map(SyntheticSource(3), depth);
  const Image a = noise(9, 7, 1, 6), b = noise(9, 7, 1, 7);
  Image sum = a;
  for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] = 2.0 * a.data[i] + b.data[i];
  const DpImagePair ra = render_dp(a, map), rb = render_dp(b, map), rs = render_dp(sum, map);
  for (std::size_t i = 0; i < sum.data.size(); ++i)
    EXPECT_NEAR(rs.left.data[i], 2.0 * ra.left.data[i] + rb.left.data[i], 1e-12);
}

TEST(RenderDp, Preconditions) {
  std::vector<float> k(9, 0.0f);
  const Image aif = noise(4, 4, 1, 1);
  EXPECT_THROW(render_dp(aif, uniform_map(5, 4, k, k, 3)), InvalidArgument);
  PsfMap bad = uniform_map(4, 4, k, k, 3);
  bad.kernels.pop_back();
  EXPECT_THROW(render_dp(aif, bad), InvalidArgument);
  EXPECT_THROW(render_dp(aif, uniform_map(4, 4, k, k, 3), 1), InvalidArgument);
}

TEST(PixelPoint, CentresMapToFrustum) {
  const FrustumPoint p = pixel_point(0, 0, 4, 2, 2.0);
  EXPECT_DOUBLE_EQ(p.u, -0.75);
  EXPECT_DOUBLE_EQ(p.v, -0.5);
  EXPECT_DOUBLE_EQ(p.depth_m, 2.0);
  EXPECT_DOUBLE_EQ(pixel_point(3, 1, 4, 2, 1.0).u, 0.75);
}

TEST(PsfMap, BandsMatchFullMap) {
  const int W = 10, H = 13;
  const Image rgb = noise(W, H, 3, 8);
  Image depth = noise(W, H, 1, 9);
  for (double& v : depth.data) v = 0.5 + 19.5 * v;
  const SyntheticSource src(3);
  const PsfMap full = build_psf_map(src, depth);
  EXPECT_EQ(full.kernels.size(), static_cast<std::size_t>(W * H * 18));
  const DpImagePair ref = render_dp(rgb, full);
  const RgbdFrame frame = make_rgbd(rgb, depth, 0.5, 20.0);
  for (int band : {1, 4, 13, 50}) {
    const DpImagePair got = render_dp(frame, src, band);
    EXPECT_EQ(got.left.data, ref.left.data) << band;
    EXPECT_EQ(got.right.data, ref.right.data) << band;
  }
}

TEST(Baselines, FocusedSceneStaysSharp) {
  // A chart at the focus distance renders back to itself through the traced PSF.
  const CameraRig rig = test::rf50_rig(RigSettings{1.0, 4.0, 0.5, 20.0, 1024, 7});
  const int W = 48, H = 32;
  Image rgb = Image::zeros(W, H, 3);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = ((x / 4 + y / 4) % 2) ? 0.9 : 0.1;
  Image depth = Image::zeros(W, H, 1);
  for (double& v : depth.data) v = 1.0;
  const RgbdFrame frame = make_rgbd(rgb, depth, 0.5, 20.0);
  const DpImagePair out = render_dp(frame, TracedPsfSource(rig));
  double worst = 0.0;
  // Central third of the field; corner aberrations spread the focused PSF.
  for (int y = H / 3; y < 2 * H / 3; ++y)
    for (int x = W / 3; x < 2 * W / 3; ++x)
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(out.left.at(x, y, c) + out.right.at(x, y, c) - rgb.at(x, y, c)));
  EXPECT_LT(worst, 1.0 / 255.0);
}

TEST(Baselines, CocSourceIsNormalized) {
  const CameraRig rig = test::rf50_rig(RigSettings{1.0, 4.0, 0.5, 20.0, 256, 9});
  const CocPsfSource src(rig);
  std::vector<FrustumPoint> pts = {{0, 0, 0.5}, {0.5, 0.5, 8.0}};
  std::vector<float> out(pts.size() * 2 * 81);
  src.kernels(pts, out);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    double total = 0.0;
    for (std::size_t k = 0; k < 162; ++k) total += out[p * 162 + k];
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
  std::vector<float> small(10);
  EXPECT_THROW(src.kernels(pts, small), InvalidArgument);
}

}  // namespace
}  // namespace dpsim
