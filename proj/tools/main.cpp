// SPDX-License-Identifier: Apache-2.0
// dpsim command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error
// (unreadable or corrupt input, fully vignetted point), 3 numerical failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpsim/dppsf_io.hpp"
#include "dpsim/error.hpp"
#include "dpsim/image.hpp"
#include "dpsim/image_metrics.hpp"
#include "dpsim/psf_predictor.hpp"
#include "dpsim/renderer.hpp"
#include "rig_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dpsim;

namespace {

std::vector<double> parse_list(const std::string& text, std::size_t expect, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    const char* b = item.data();
    const char* e = item.data() + item.size();
    while (b < e && *b == ' ') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw InvalidArgument(std::string("bad number in ") + what + ": '" + item + "'");
    out.push_back(v);
  }
  if (expect != 0 && out.size() != expect)
    throw InvalidArgument(std::string(what) + " needs " + std::to_string(expect) + " comma-separated values");
  return out;
}

// "lo:hi:step" in multiples of the pitch, or a comma list.
std::vector<double> parse_range(const std::string& text, const char* what) {
  if (text.find(':') == std::string::npos) return parse_list(text, 0, what);
  std::string t = text;
  std::replace(t.begin(), t.end(), ':', ',');
  const auto v = parse_list(t, 3, what);
  if (!(v[2] > 0.0) || v[1] < v[0]) throw InvalidArgument(std::string("bad range for ") + what);
  const auto n = static_cast<long>(std::floor((v[1] - v[0]) / v[2] + 1e-9));
  std::vector<double> out;
  for (long k = 0; k <= n; ++k) out.push_back(std::round((v[0] + k * v[2]) * 1e9) / 1e9);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

DpPsf sum_normalized(const DpPsf& p) { return normalize(p, PsfNormalization::Sum); }

// ---------------------------------------------------------------------------

struct TraceArgs {
  std::string rig, point, out;
  bool world = false;
};

int cmd_trace_psf(const TraceArgs& a) {
  const auto cfg = cli::load_rig_config(a.rig);
  const CameraRig rig = cfg.make_rig();
  const auto xyz = parse_list(a.point, 3, "--point");
  FrustumPoint fp{xyz[0], xyz[1], xyz[2]};
  if (a.world) fp = world_to_frustum(rig, WorldPoint{xyz[0], xyz[1], xyz[2]});
  check_in_frustum(rig, fp);
  const DpPsf psf = trace_dp_psf(rig, fp);
  if (!a.out.empty()) {
    PsfGrid grid;
    grid.ks = psf.ks;
    grid.records.push_back({fp, psf, false});
    write_dppsf(a.out, grid);
  }
  const double emitted = psf.total() + static_cast<double>(psf.missed_count);
  json j = {{"point", {{"u", fp.u}, {"v", fp.v}, {"depth_m", fp.depth_m}}},
            {"anchor", {psf.anchor.i, psf.anchor.j}},
            {"left_total", psf.left_total()},
            {"right_total", psf.right_total()},
            {"missed", psf.missed_count},
            {"vignetted", psf.vignetted},
            {"outside_window", psf.outside_window},
            {"missed_fraction", static_cast<double>(psf.missed_count) / emitted},
            {"centroid_disparity_px", centroid_disparity(psf)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct GridArgs {
  std::string rig, out, lattice;
  std::size_t random = 0;
  std::int64_t seed = -1;
};

int cmd_gen_grid(const GridArgs& a) {
  const auto cfg = cli::load_rig_config(a.rig);
  const CameraRig rig = cfg.make_rig();
  GridSpec spec;
  spec.seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : cfg.seed;
  if (!a.lattice.empty() == (a.random > 0)) throw InvalidArgument("give exactly one of --lattice and --random");
  if (!a.lattice.empty()) {
    const auto n = parse_list(a.lattice, 3, "--lattice");
    for (double v : n)
      if (v < 1 || v != std::floor(v)) throw InvalidArgument("--lattice counts must be positive integers");
    spec.mode = GridSpec::Mode::Lattice;
    spec.n_u = static_cast<int>(n[0]);
    spec.n_v = static_cast<int>(n[1]);
    spec.n_d = static_cast<int>(n[2]);
  } else {
    spec.mode = GridSpec::Mode::Random;
    spec.count = a.random;
  }
  const PsfGrid grid = generate_grid(rig, spec);
  std::size_t skipped = 0;
  for (const auto& r : grid.records) skipped += r.skipped ? 1 : 0;
  write_dppsf(a.out, grid);
  std::cout << json{{"records", grid.records.size()}, {"skipped", skipped}, {"ks", grid.ks}}.dump(2) << "\n";
  return 0;
}

struct TrainArgs {
  std::string rig, grid, out, loss;
  bool live = false;
  std::size_t iterations = 100000, batch = 128;
  double lr_max = 1e-4, lr_min = 1e-6;
  std::int64_t seed = -1;
};

int cmd_train(const TrainArgs& a) {
  const auto cfg = cli::load_rig_config(a.rig);
  const CameraRig rig = cfg.make_rig();
  const std::uint64_t seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : cfg.seed;
  TrainConfig tc;
  tc.iterations = a.iterations;
  tc.batch = a.batch;
  tc.lr_max = a.lr_max;
  tc.lr_min = a.lr_min;
  tc.seed = seed + 1;
  tc.validate();
  if (a.grid.empty() == !a.live) throw InvalidArgument("give exactly one of --grid and --live");

  std::unique_ptr<TargetSource> source;
  if (a.live) {
    source = std::make_unique<TraceTargets>(rig);
  } else {
    const PsfGrid grid = read_dppsf(a.grid);
    if (grid.ks != rig.ks()) throw InvalidArgument("grid kernel size does not match the rig");
    source = std::make_unique<GridTargets>(grid, rig.settings());
  }

  // Backpropagation self-check on a tiny network before the real run.
  const auto tiny = init_mlp_dims<double>({3, 8, 8}, seed);
  std::mt19937_64 rng(seed);
  Mlp<double>::Matrix x(3, 16), y(8, 16);
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const double grad_err = gradient_check(tiny, x, y, 1e-5);
  if (!(grad_err <= 1e-4)) throw NumericalError("gradient check failed: relative error " + std::to_string(grad_err));

  const TrainResult result = train(init_mlp(rig.ks(), seed), tc, *source);
  std::string csv = "iteration,loss\n";
  char buf[64];
  for (std::size_t k = 0; k < result.loss.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", k, result.loss[k]);
    csv += buf;
  }
  write_weights(a.out, result.weights);
  if (!a.loss.empty()) write_text(a.loss, csv);
  std::cout << json{{"iterations", result.loss.size()},
                    {"final_loss", result.loss.back()},
                    {"gradient_check_rel_error", grad_err}}
                   .dump(2)
            << "\n";
  return 0;
}

struct RenderArgs {
  std::string rig, aif, depth, weights, out_left, out_right, baseline = "mlp";
  int band_rows = 16;
};

int cmd_render(const RenderArgs& a) {
  const auto cfg = cli::load_rig_config(a.rig);
  const CameraRig rig = cfg.make_rig();
  if (a.baseline != "mlp" && a.baseline != "coc" && a.baseline != "trace")
    throw InvalidArgument("--baseline must be mlp, coc or trace");
  for (const auto& p : {a.out_left, a.out_right}) {
    const std::string ext = fs::path(p).extension().string();
    if (ext != ".pfm" && ext != ".ppm") throw InvalidArgument("output images must be .pfm or .ppm: " + p);
  }
  Image rgb = read_image(a.aif);
  Image depth = read_image(a.depth);
  if (rgb.channels != 3) throw DataError("all-in-focus image must have 3 channels");
  if (depth.channels != 1) throw DataError("depth map must be a single-channel PFM");
  if (rgb.width != depth.width || rgb.height != depth.height) throw DataError("image and depth sizes differ");
  const RgbdFrame frame = make_rgbd(std::move(rgb), std::move(depth), rig.settings().d_min, rig.settings().d_max);

  std::unique_ptr<PsfSource> source;
  MlpWeights weights;
  if (a.baseline == "mlp") {
    if (a.weights.empty()) throw InvalidArgument("--weights is required unless --baseline is coc or trace");
    weights = read_weights(a.weights);
    if (weights.ks != rig.ks()) throw InvalidArgument("weights kernel size does not match the rig");
    source = std::make_unique<MlpPsfSource>(weights, rig.settings());
  } else if (a.baseline == "coc") {
    source = std::make_unique<CocPsfSource>(rig);
  } else {
    source = std::make_unique<TracedPsfSource>(rig);
  }
  const DpImagePair pair = render_dp(frame, *source, a.band_rows);
  write_image(a.out_left, pair.left);
  write_image(a.out_right, pair.right);
  std::cout << json{{"width", frame.rgb.width},
                    {"height", frame.rgb.height},
                    {"clamped_depth", frame.clamped},
                    {"baseline", a.baseline}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_compare_psf(const std::string& pa, const std::string& pb) {
  const PsfGrid a = read_dppsf(pa);
  const PsfGrid b = read_dppsf(pb);
  if (a.ks != b.ks) throw DataError("kernel sizes differ");
  if (a.records.size() != b.records.size()) throw DataError("record counts differ");
  double sum_ncc = 0.0, sum_nsd = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    if (a.records[k].skipped || b.records[k].skipped) continue;
    const DpPsf x = sum_normalized(a.records[k].psf), y = sum_normalized(b.records[k].psf);
    sum_ncc += ncc(x, y);
    sum_nsd += nsd(x, y);
    ++n;
  }
  if (n == 0) throw DataError("no comparable records");
  std::cout << json{{"ncc", sum_ncc / n}, {"nsd", sum_nsd / n}, {"records", n}}.dump(2) << "\n";
  return 0;
}

int cmd_compare_img(const std::string& pa, const std::string& pb) {
  const Image a = read_image(pa);
  const Image b = read_image(pb);
  if (!a.same_shape(b)) throw DataError("image shapes differ");
  std::cout << json{{"psnr_db", psnr(a, b)}, {"ssim", ssim(a, b)}}.dump(2) << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string rig, reference, scores, best;
  std::string h, f, w, r;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto cfg = cli::load_rig_config(a.rig);
  const CameraRig rig = cfg.make_rig();
  DpSearchRanges ranges = DpSearchRanges::defaults();
  if (!a.h.empty()) ranges.h = parse_range(a.h, "--h-range");
  if (!a.f.empty()) ranges.f = parse_range(a.f, "--f-range");
  if (!a.w.empty()) ranges.w = parse_range(a.w, "--w-range");
  if (!a.r.empty()) ranges.r = parse_range(a.r, "--r-range");
  const PsfGrid ref = read_dppsf(a.reference);
  std::vector<ReferencePsf> refs;
  for (const auto& rec : ref.records)
    if (!rec.skipped) refs.push_back({rec.point, rec.psf});
  if (refs.empty()) throw DataError("reference file holds no usable PSF");
  for (const auto& r : refs) check_in_frustum(rig, r.point);

  const DpSearchResult res = grid_search_dp_params(rig, refs, ranges);
  const json best = {{"h_over_ps", res.best_row.h}, {"f_over_ps", res.best_row.f}, {"w_over_ps", res.best_row.w},
                     {"r_over_ps", res.best_row.r}, {"ncc", res.best_row.ncc},    {"nsd", res.best_row.nsd}};
  write_text(a.scores, score_table_csv(res.table));
  write_text(a.best, best.dump(2) + "\n");
  std::cout << best.dump(2) << "\n";
  return 0;
}

struct SynthArgs {
  int width = 96, height = 64;
  std::uint64_t seed = 0;
  double d_min = 0.5, d_max = 20.0;
  std::string out_rgb, out_depth;
};

// Textured far plane with a few fronto-parallel blocks at nearer depths.
int cmd_synth(const SynthArgs& a) {
  if (a.width < 1 || a.height < 1) throw InvalidArgument("image size must be positive");
  if (!(a.d_min > 0.0) || !(a.d_max > a.d_min)) throw InvalidArgument("invalid depth range");
  std::mt19937_64 rng(a.seed);
  auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Image rgb = Image::zeros(a.width, a.height, 3);
  Image depth = Image::zeros(a.width, a.height, 1);
  const int cell = std::max(2, std::min(a.width, a.height) / 12);
  const int gx = (a.width + cell - 1) / cell, gy = (a.height + cell - 1) / cell;
  std::vector<double> tex(static_cast<std::size_t>(gx) * gy * 3);
  for (double& t : tex) t = 0.1 + 0.8 * u01();
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = tex[(static_cast<std::size_t>(y / cell) * gx + x / cell) * 3 + c];
      depth.at(x, y, 0) = a.d_max;
    }
  for (int b = 0; b < 3; ++b) {
    const int w = std::max(1, static_cast<int>(a.width * (0.2 + 0.2 * u01())));
    const int h = std::max(1, static_cast<int>(a.height * (0.2 + 0.2 * u01())));
    const int x0 = static_cast<int>((a.width - w) * u01());
    const int y0 = static_cast<int>((a.height - h) * u01());
    const double inv = 1.0 / a.d_max + u01() * (1.0 / a.d_min - 1.0 / a.d_max);
    const double col[3] = {u01(), u01(), u01()};
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) {
        const double stripe = ((x - x0) / 2 + (y - y0) / 2) % 2 == 0 ? 1.0 : 0.4;
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = col[c] * stripe;
        depth.at(x, y, 0) = 1.0 / inv;
      }
  }
  const std::string ext = fs::path(a.out_depth).extension().string();
  if (ext != ".pfm") throw InvalidArgument("depth output must be .pfm");
  write_image(a.out_rgb, rgb);
  write_image(a.out_depth, depth);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-pixel camera simulator"};
  app.require_subcommand(1);

  TraceArgs trace;
  auto* c_trace = app.add_subcommand("trace-psf", "Ray-trace the DP PSF of one object point");
  c_trace->add_option("--rig", trace.rig, "Rig config JSON")->required();
  c_trace->add_option("--point", trace.point, "u,v,depth_m (frustum) or x_mm,y_mm,depth_m with --world")->required();
  c_trace->add_flag("--world", trace.world, "Interpret --point as lens coordinates");
  c_trace->add_option("--out", trace.out, "Write a one-record .dppsf");

  GridArgs grid;
  auto* c_grid = app.add_subcommand("gen-grid", "Trace PSFs over the frustum");
  c_grid->add_option("--rig", grid.rig, "Rig config JSON")->required();
  c_grid->add_option("--out", grid.out, "Output .dppsf")->required();
  c_grid->add_option("--lattice", grid.lattice, "n_u,n_v,n_d lattice in (u, v, 1/depth)");
  c_grid->add_option("--random", grid.random, "Number of uniformly drawn points");
  c_grid->add_option("--seed", grid.seed, "Overrides the config seed");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train-predictor", "Fit the MLP surrogate");
  c_train->add_option("--rig", tr.rig, "Rig config JSON")->required();
  c_train->add_option("--grid", tr.grid, "Training .dppsf");
  c_train->add_flag("--live", tr.live, "Trace fresh targets every iteration instead of reading a grid");
  c_train->add_option("--iterations", tr.iterations, "Optimizer steps")->capture_default_str();
  c_train->add_option("--batch", tr.batch, "Points per step")->capture_default_str();
  c_train->add_option("--lr-max", tr.lr_max, "Initial step size")->capture_default_str();
  c_train->add_option("--lr-min", tr.lr_min, "Final step size")->capture_default_str();
  c_train->add_option("--seed", tr.seed, "Overrides the config seed");
  c_train->add_option("--out", tr.out, "Output weights")->required();
  c_train->add_option("--loss", tr.loss, "Per-iteration loss CSV");

  RenderArgs rd;
  auto* c_render = app.add_subcommand("render", "Render a DP image pair from RGBD input");
  c_render->add_option("--rig", rd.rig, "Rig config JSON")->required();
  c_render->add_option("--aif", rd.aif, "All-in-focus image (.pfm or .ppm)")->required();
  c_render->add_option("--depth", rd.depth, "Depth map in metres (single-channel .pfm)")->required();
  c_render->add_option("--weights", rd.weights, "Trained weights");
  c_render->add_option("--baseline", rd.baseline, "mlp, coc or trace")->capture_default_str();
  c_render->add_option("--out-left", rd.out_left, "Left image (.pfm or .ppm)")->required();
  c_render->add_option("--out-right", rd.out_right, "Right image (.pfm or .ppm)")->required();
  c_render->add_option("--band-rows", rd.band_rows, "Rows per kernel batch")->capture_default_str();

  std::string psf_a, psf_b;
  auto* c_cpsf = app.add_subcommand("compare-psf", "NCC and NSD between two .dppsf files");
  c_cpsf->add_option("a", psf_a)->required();
  c_cpsf->add_option("b", psf_b)->required();

  std::string img_a, img_b;
  auto* c_cimg = app.add_subcommand("compare-img", "PSNR and SSIM between two images");
  c_cimg->add_option("a", img_a)->required();
  c_cimg->add_option("b", img_b)->required();

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate-dp", "Grid-search the DP pixel structure against reference PSFs");
  c_cal->add_option("--rig", cal.rig, "Rig config JSON")->required();
  c_cal->add_option("--reference", cal.reference, "Reference .dppsf")->required();
  c_cal->add_option("--scores", cal.scores, "Score table CSV")->required();
  c_cal->add_option("--best", cal.best, "Best parameters JSON")->required();
  c_cal->add_option("--h-range", cal.h, "h/ps values, lo:hi:step or a,b,c");
  c_cal->add_option("--f-range", cal.f, "f/ps values");
  c_cal->add_option("--w-range", cal.w, "w/ps values");
  c_cal->add_option("--r-range", cal.r, "r/ps values");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth-rgbd", "Write a synthetic all-in-focus image and depth map");
  c_syn->add_option("--width", syn.width)->capture_default_str();
  c_syn->add_option("--height", syn.height)->capture_default_str();
  c_syn->add_option("--seed", syn.seed)->required();
  c_syn->add_option("--d-min", syn.d_min)->capture_default_str();
  c_syn->add_option("--d-max", syn.d_max)->capture_default_str();
  c_syn->add_option("--out-rgb", syn.out_rgb)->required();
  c_syn->add_option("--out-depth", syn.out_depth)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_trace->parsed()) return cmd_trace_psf(trace);
    if (c_grid->parsed()) return cmd_gen_grid(grid);
    if (c_train->parsed()) return cmd_train(tr);
    if (c_render->parsed()) return cmd_render(rd);
    if (c_cpsf->parsed()) return cmd_compare_psf(psf_a, psf_b);
    if (c_cimg->parsed()) return cmd_compare_img(img_a, img_b);
    if (c_cal->parsed()) return cmd_calibrate(cal);
    if (c_syn->parsed()) return cmd_synth(syn);
  } catch (const dpsim::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
