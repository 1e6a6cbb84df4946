// SPDX-License-Identifier: Apache-2.0
#include "dpsim/dp_sensor.hpp"

#include <cmath>
#include <string>

#include "dpsim/error.hpp"

namespace dpsim {

DpPixelGeometry DpPixelGeometry::from_ratios(double ps, double r_over_ps, double f_over_ps, double h_over_ps,
                                             double w_over_ps) {
  DpPixelGeometry g{ps, r_over_ps * ps, f_over_ps * ps, h_over_ps * ps, w_over_ps * ps};
  g.validate();
  return g;
}

DpPixelGeometry DpPixelGeometry::calibrated_default(double ps) { return from_ratios(ps, 0.50, 1.44, 0.78, 0.30); }

void DpPixelGeometry::validate() const {
  if (!(ps > 0.0)) throw InvalidArgument("pixel pitch must be positive");
  if (!(h > 0.0) || !(f > h)) throw InvalidArgument("DP pixel needs f > h > 0");
  // Relative slack so that ratios such as 0.5 * ps survive rounding.
  const double half = 0.5 * ps * (1.0 + 1e-12);
  if (!(w > 0.0) || w > half) throw InvalidArgument("sub-pixel width must lie in (0, ps/2]");
  if (!(r > 0.0) || r > half) throw InvalidArgument("microlens radius must lie in (0, ps/2]");
}

void SensorGeometry::validate() const {
  if (!(width > 0.0) || !(height > 0.0) || cols <= 0 || rows <= 0)
    throw InvalidArgument("sensor dimensions must be positive");
  const double px = width / cols;
  const double py = height / rows;
  if (std::abs(px - py) > 1e-9) throw InvalidArgument("sensor pixels must be square");
}

PixelIndex lattice_index(const SensorGeometry& sensor, Vec2 point) {
  const double ps = sensor.pitch();
  return {static_cast<int>(std::floor((point.x + 0.5 * sensor.width) / ps)),
          static_cast<int>(std::floor((point.y + 0.5 * sensor.height) / ps))};
}

PixelLookup pixel_of(const SensorGeometry& sensor, Vec2 point) {
  const double ps = sensor.pitch();
  const PixelIndex idx = lattice_index(sensor, point);
  PixelLookup out;
  out.center = {(idx.i + 0.5) * ps - 0.5 * sensor.width, (idx.j + 0.5) * ps - 0.5 * sensor.height};
  if (idx.i >= 0 && idx.i < sensor.cols && idx.j >= 0 && idx.j < sensor.rows) out.index = idx;
  return out;
}

// The negated forms below keep x_L(-x_i, -t) == -x_R(x_i, t) bit-exact.
SubPixelBounds refracted_bounds(const DpPixelGeometry& g, double x_i, double tan_theta) {
  const double k = g.h / (g.f - g.h);
  const double ft = g.f * tan_theta;
  return {(x_i + g.w) - (ft - g.w) * k, x_i - ft * k, (x_i - g.w) - (ft + g.w) * k};
}

SubPixelBounds direct_bounds(const DpPixelGeometry& g, double x_i, double tan_theta) {
  const double shift = g.h * tan_theta;
  return {(x_i + g.w) - shift, x_i - shift, (x_i - g.w) - shift};
}

namespace {

SubPixel classify(const SubPixelBounds& b, double x_k) {
  if (b.middle < x_k && x_k <= b.left) return SubPixel::Left;
  if (b.right <= x_k && x_k <= b.middle) return SubPixel::Right;
  return SubPixel::Missed;
}

}  // namespace

SubPixel assign_refracted(const DpPixelGeometry& geom, double x_i, double x_k, double tan_theta) {
  if (!(geom.f > geom.h)) throw InvalidArgument("DP pixel needs f > h");
  return classify(refracted_bounds(geom, x_i, tan_theta), x_k);
}

SubPixel assign_direct(const DpPixelGeometry& geom, double x_i, double x_k, double tan_theta) {
  return classify(direct_bounds(geom, x_i, tan_theta), x_k);
}

SubPixel assign_in_cell(const DpPixelGeometry& geom, Vec2 center, Vec2 landing, Vec3 dir) {
  const double ex = landing.x - center.x;
  const double ey = landing.y - center.y;
  const double tan_theta = dir.x / dir.z;
  if (ex * ex + ey * ey <= geom.r * geom.r) return classify(refracted_bounds(geom, center.x, tan_theta), landing.x);
  return classify(direct_bounds(geom, center.x, tan_theta), landing.x);
}

SubPixelHit assign_subpixel(const DpPixelGeometry& geom, const SensorGeometry& sensor, Vec2 landing, Vec3 dir) {
  const PixelLookup px = pixel_of(sensor, landing);
  if (!px.index) return {};
  return {px.index, assign_in_cell(geom, px.center, landing, dir)};
}

DpPsf accumulate_psf(std::span<const SubPixelHit> hits, PixelIndex anchor, int ks) {
  DpPsf psf = DpPsf::zeros(ks);
  psf.anchor = anchor;
  const int half = ks / 2;
  for (const SubPixelHit& hit : hits) {
    if (!hit.pixel || hit.side == SubPixel::Missed) {
      ++psf.missed_count;
      continue;
    }
    const int dx = hit.pixel->i - anchor.i;
    const int dy = hit.pixel->j - anchor.j;
    if (dx < -half || dx > half || dy < -half || dy > half) {
      ++psf.missed_count;
      ++psf.outside_window;
      continue;
    }
    const auto cell = static_cast<std::size_t>((dy + half) * ks + (dx + half));
    (hit.side == SubPixel::Left ? psf.left : psf.right)[cell] += 1.0;
  }
  return psf;
}

}  // namespace dpsim
