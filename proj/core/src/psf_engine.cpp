// SPDX-License-Identifier: Apache-2.0
#include "dpsim/psf_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dpsim/error.hpp"
#include "dpsim/parallel.hpp"

namespace dpsim {
namespace {

// Round half away from zero, written so that sym_round(-t) == -sym_round(t).
int sym_round(double t) {
  t = std::clamp(t, -1e6, 1e6);
  return t >= 0.0 ? static_cast<int>(std::floor(t + 0.5)) : -static_cast<int>(std::floor(-t + 0.5));
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> ratio_range(int first_centi, int last_centi, int step_centi) {
  std::vector<double> out;
  for (int v = first_centi; v <= last_centi; v += step_centi) out.push_back(v / 100.0);
  return out;
}

}  // namespace

CameraRig::CameraRig(const LensPrescription& design, const SensorGeometry& sensor, const DpPixelGeometry& dp,
                     const RigSettings& settings)
    : sensor_(sensor), dp_(dp), settings_(settings) {
  design.validate();
  sensor_.validate();
  dp_.validate();
  if (std::abs(dp_.ps - sensor_.pitch()) > 1e-9 * sensor_.pitch())
    throw InvalidArgument("DP pixel pitch does not match the sensor pitch");
  if (settings_.ks <= 0 || settings_.ks % 2 == 0) throw InvalidArgument("kernel size must be odd");
  if (settings_.n_rays <= 0) throw InvalidArgument("ray count must be positive");
  if (!(settings_.d_min > 0.0) || !(settings_.d_max > settings_.d_min))
    throw InvalidArgument("depth range needs 0 < d_min < d_max");
  if (!(settings_.focus_m > 0.0)) throw InvalidArgument("focus distance must be positive");
  lens_ = refocus(set_f_number(design, settings_.f_number), settings_.focus_m);
  efl_ = paraxial_efl(lens_);
  pupil_ = locate_entrance_pupil(lens_);
  pupil_samples_ = sample_pupil(pupil_, static_cast<std::size_t>(settings_.n_rays));
  vertex_z_ = lens_.vertex_positions();
}

CameraRig CameraRig::with_dp(const DpPixelGeometry& dp) const {
  dp.validate();
  if (std::abs(dp.ps - sensor_.pitch()) > 1e-9 * sensor_.pitch())
    throw InvalidArgument("DP pixel pitch does not match the sensor pitch");
  CameraRig out = *this;
  out.dp_ = dp;
  return out;
}

CameraRig CameraRig::with_ks(int ks) const {
  if (ks <= 0 || ks % 2 == 0) throw InvalidArgument("kernel size must be odd");
  CameraRig out = *this;
  out.settings_.ks = ks;
  return out;
}

void check_in_frustum(const CameraRig& rig, const FrustumPoint& p) {
  const auto& s = rig.settings();
  if (!std::isfinite(p.u) || !std::isfinite(p.v) || std::abs(p.u) > 1.0 || std::abs(p.v) > 1.0)
    throw InvalidArgument("frustum coordinates must lie in [-1, 1]");
  if (!(p.depth_m >= s.d_min && p.depth_m <= s.d_max))
    throw InvalidArgument("depth " + fmt(p.depth_m) + " m outside [" + fmt(s.d_min) + ", " + fmt(s.d_max) + "]");
}

WorldPoint frustum_to_world(const CameraRig& rig, const FrustumPoint& p) {
  check_in_frustum(rig, p);
  const double scale = p.depth_m * 1000.0 / rig.efl();
  return {p.u * 0.5 * rig.sensor().width * scale, p.v * 0.5 * rig.sensor().height * scale, p.depth_m};
}

FrustumPoint world_to_frustum(const CameraRig& rig, const WorldPoint& p) {
  const double scale = p.depth_m * 1000.0 / rig.efl();
  FrustumPoint out{p.x_mm / (0.5 * rig.sensor().width * scale), p.y_mm / (0.5 * rig.sensor().height * scale),
                   p.depth_m};
  check_in_frustum(rig, out);
  return out;
}

TracedBundle trace_bundle(const CameraRig& rig, const WorldPoint& p) {
  const Vec3 object{p.x_mm, p.y_mm, -p.depth_m * 1000.0};
  const double pupil_z = rig.pupil().z;
  // Start every ray just in front of the first surface to keep the sphere
  // intersection well conditioned for distant objects.
  const double start_z = std::min(object.z, -rig.lens().surfaces.front().semi_diameter);
  const auto launch = [&](Vec2 aim) {
    const Vec3 dir = normalized({aim.x - object.x, aim.y - object.y, pupil_z - object.z});
    const double t = (start_z - object.z) / dir.z;
    return trace_ray(rig.lens(), rig.vertex_z(), Ray{object + t * dir, dir});
  };
  TracedBundle bundle;
  const auto& samples = rig.pupil_samples();
  bundle.rays.reserve(samples.size());
  for (const Vec2& aim : samples) {
    bundle.rays.push_back(launch(aim));
    if (bundle.rays.back().landed()) ++bundle.landed;
  }
  const TraceOutcome chief = launch({0.0, 0.0});
  if (chief.landed()) bundle.chief = chief.landing;
  return bundle;
}

DpPsf classify_bundle(const TracedBundle& bundle, const SensorGeometry& sensor, const DpPixelGeometry& dp, int ks) {
  std::vector<SubPixelHit> hits(bundle.rays.size());
  std::uint64_t vignetted = 0;
  Vec2 center{};
  if (bundle.chief) {
    center = *bundle.chief;
  } else if (bundle.landed > 0) {
    for (const auto& r : bundle.rays)
      if (r.landed()) center = center + r.landing;
    center = (1.0 / static_cast<double>(bundle.landed)) * center;
  }
  const double ps = sensor.pitch();
  for (std::size_t k = 0; k < bundle.rays.size(); ++k) {
    const TraceOutcome& ray = bundle.rays[k];
    if (!ray.landed()) {
      ++vignetted;
      continue;
    }
    const int dx = sym_round((ray.landing.x - center.x) / ps);
    const int dy = sym_round((ray.landing.y - center.y) / ps);
    const Vec2 cell{center.x + dx * ps, center.y + dy * ps};
    // Read-out orientation: the image formed on the sensor is inverted.
    hits[k] = {PixelIndex{-dx, -dy}, assign_in_cell(dp, cell, ray.landing, ray.direction)};
  }
  DpPsf psf = accumulate_psf(hits, PixelIndex{0, 0}, ks);
  psf.anchor = lattice_index(sensor, center);
  psf.vignetted = vignetted;
  return psf;
}

DpPsf trace_dp_psf(const CameraRig& rig, const WorldPoint& p) {
  const TracedBundle bundle = trace_bundle(rig, p);
  DpPsf psf = classify_bundle(bundle, rig.sensor(), rig.dp(), rig.ks());
  if (psf.all_zero()) throw VignettedError("point fully vignetted");
  return psf;
}

DpPsf trace_dp_psf(const CameraRig& rig, const FrustumPoint& p) { return trace_dp_psf(rig, frustum_to_world(rig, p)); }

PixelIndex chief_ray_anchor(const CameraRig& rig, const FrustumPoint& p) {
  const WorldPoint w = frustum_to_world(rig, p);
  const Vec3 object{w.x_mm, w.y_mm, -w.depth_m * 1000.0};
  const Vec3 dir = normalized({-object.x, -object.y, rig.pupil().z - object.z});
  const double start_z = std::min(object.z, -rig.lens().surfaces.front().semi_diameter);
  const double t = (start_z - object.z) / dir.z;
  const TraceOutcome chief = trace_ray(rig.lens(), rig.vertex_z(), Ray{object + t * dir, dir});
  if (chief.landed()) return lattice_index(rig.sensor(), chief.landing);
  return classify_bundle(trace_bundle(rig, w), rig.sensor(), rig.dp(), 1).anchor;
}

double coc_diameter_mm(const CameraRig& rig, double depth_m) {
  const double aperture = rig.pupil().diameter;
  const double d = depth_m * 1000.0;
  const double focus_m = rig.settings().focus_m;
  if (std::isinf(focus_m)) return aperture * rig.efl() / d;
  const double df = focus_m * 1000.0;
  return aperture * std::abs(d - df) / d * rig.efl() / (df - rig.efl());
}

DpPsf coc_dp_psf(const CameraRig& rig, const FrustumPoint& p) {
  check_in_frustum(rig, p);
  const int ks = rig.ks();
  const int half = ks / 2;
  DpPsf psf = DpPsf::zeros(ks);
  psf.anchor = chief_ray_anchor(rig, p);
  const double diameter_px = coc_diameter_mm(rig, p.depth_m) / rig.sensor().pitch();
  const auto cell = [ks, half](int dx, int dy) { return static_cast<std::size_t>((dy + half) * ks + dx + half); };
  if (diameter_px < 1.0) {
    psf.left[cell(0, 0)] = 0.5;
    psf.right[cell(0, 0)] = 0.5;
    psf.normalization = PsfNormalization::Sum;
    return psf;
  }
  const bool near = p.depth_m * 1000.0 < rig.settings().focus_m * 1000.0;
  const double r2 = 0.25 * diameter_px * diameter_px;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      if (dx == 0) {
        psf.left[cell(dx, dy)] += 0.5;
        psf.right[cell(dx, dy)] += 0.5;
      } else if ((dx > 0) == near) {
        psf.left[cell(dx, dy)] += 1.0;
      } else {
        psf.right[cell(dx, dy)] += 1.0;
      }
    }
  }
  return normalize(psf, PsfNormalization::Sum);
}

std::vector<FrustumPoint> grid_points(const CameraRig& rig, const GridSpec& spec) {
  const double inv_far = 1.0 / rig.settings().d_max;
  const double inv_near = 1.0 / rig.settings().d_min;
  const auto depth_at = [&](double s) {
    return std::clamp(1.0 / (inv_far + (inv_near - inv_far) * s), rig.settings().d_min, rig.settings().d_max);
  };
  std::vector<FrustumPoint> pts;
  if (spec.mode == GridSpec::Mode::Lattice) {
    if (spec.n_u <= 0 || spec.n_v <= 0 || spec.n_d <= 0) throw InvalidArgument("empty grid spec");
    const auto axis = [](int n, int i) { return n == 1 ? 0.0 : -1.0 + 2.0 * i / (n - 1); };
    for (int k = 0; k < spec.n_d; ++k) {
      const double depth = depth_at(spec.n_d == 1 ? 0.5 : static_cast<double>(k) / (spec.n_d - 1));
      for (int j = 0; j < spec.n_v; ++j)
        for (int i = 0; i < spec.n_u; ++i) pts.push_back({axis(spec.n_u, i), axis(spec.n_v, j), depth});
    }
  } else {
    if (spec.count == 0) throw InvalidArgument("empty grid spec");
    std::mt19937_64 rng(spec.seed);
    pts.reserve(spec.count);
    for (std::size_t n = 0; n < spec.count; ++n) {
      const double u = 2.0 * uniform01(rng) - 1.0;
      const double v = 2.0 * uniform01(rng) - 1.0;
      pts.push_back({u, v, depth_at(uniform01(rng))});
    }
  }
  return pts;
}

PsfGrid generate_grid(const CameraRig& rig, const GridSpec& spec) {
  const auto pts = grid_points(rig, spec);
  PsfGrid grid;
  grid.ks = rig.ks();
  grid.spec = spec;
  grid.records.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t n) {
    PsfRecord& rec = grid.records[n];
    rec.point = pts[n];
    try {
      rec.psf = trace_dp_psf(rig, pts[n]);
    } catch (const VignettedError&) {
      rec.psf = DpPsf::zeros(rig.ks());
      rec.psf.missed_count = static_cast<std::uint64_t>(rig.n_rays());
      rec.psf.vignetted = rec.psf.missed_count;
      rec.skipped = true;
    }
  });
  return grid;
}

DpSearchRanges DpSearchRanges::defaults() {
  return {ratio_range(50, 120, 2), ratio_range(100, 200, 2), ratio_range(10, 50, 2), {0.40, 0.45, 0.50}};
}

DpSearchResult grid_search_dp_params(const CameraRig& rig_template, const std::vector<ReferencePsf>& reference,
                                     const DpSearchRanges& ranges) {
  if (reference.empty()) throw InvalidArgument("reference set is empty");
  const int ks = reference.front().psf.ks;
  std::vector<TracedBundle> bundles;
  std::vector<DpPsf> targets;
  for (const ReferencePsf& ref : reference) {
    if (ref.psf.ks != ks) throw InvalidArgument("reference PSFs use different kernel sizes");
    bundles.push_back(trace_bundle(rig_template, frustum_to_world(rig_template, ref.point)));
    targets.push_back(normalize(ref.psf, PsfNormalization::Sum));
  }

  struct Candidate {
    double h, f, w, r;
  };
  std::vector<Candidate> cands;
  for (double h : ranges.h)
    for (double f : ranges.f)
      for (double w : ranges.w)
        for (double r : ranges.r) cands.push_back({h, f, w, r});
  if (cands.empty()) throw InvalidArgument("search ranges are empty");

  const double ps = rig_template.sensor().pitch();
  std::vector<DpSearchRow> rows(cands.size());
  parallel_for(cands.size(), [&](std::size_t n) {
    const Candidate& c = cands[n];
    DpSearchRow& row = rows[n];
    row = {c.h, c.f, c.w, c.r, 0.0, std::numeric_limits<double>::infinity(), false};
    DpPixelGeometry geom;
    try {
      geom = DpPixelGeometry::from_ratios(ps, c.r, c.f, c.h, c.w);
    } catch (const InvalidArgument&) {
      return;
    }
    row.valid = true;
    double ncc_sum = 0.0, nsd_sum = 0.0;
    for (std::size_t k = 0; k < bundles.size(); ++k) {
      const DpPsf sim = classify_bundle(bundles[k], rig_template.sensor(), geom, ks);
      if (sim.all_zero()) {
        nsd_sum = std::numeric_limits<double>::infinity();
        continue;
      }
      const DpPsf s = normalize(sim, PsfNormalization::Sum);
      ncc_sum += ncc(s, targets[k]);
      nsd_sum += nsd(s, targets[k]);
    }
    row.ncc = ncc_sum / static_cast<double>(bundles.size());
    row.nsd = nsd_sum / static_cast<double>(bundles.size());
  });

  std::optional<std::size_t> best;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (!rows[n].valid) continue;
    if (!best || rows[n].ncc > rows[*best].ncc || (rows[n].ncc == rows[*best].ncc && rows[n].nsd < rows[*best].nsd))
      best = n;
  }
  if (!best) throw InvalidArgument("no valid DP pixel candidate (every candidate violates the geometry invariants)");
  DpSearchResult result;
  result.best_row = rows[*best];
  result.best = DpPixelGeometry::from_ratios(ps, result.best_row.r, result.best_row.f, result.best_row.h,
                                             result.best_row.w);
  result.table = std::move(rows);
  return result;
}

std::string score_table_csv(const std::vector<DpSearchRow>& table) {
  std::ostringstream out;
  out << "h,f,w,r,ncc,nsd\n";
  for (const DpSearchRow& row : table) {
    if (!row.valid) continue;
    out << fmt(row.h) << ',' << fmt(row.f) << ',' << fmt(row.w) << ',' << fmt(row.r) << ',' << fmt(row.ncc) << ','
        << fmt(row.nsd) << '\n';
  }
  return out.str();
}

}  // namespace dpsim
