// SPDX-License-Identifier: Apache-2.0
#include "dpsim/psf_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binary_io.hpp"
#include "dpsim/error.hpp"
#include "dpsim/parallel.hpp"

namespace dpsim {

namespace {

constexpr std::string_view kMagic("DPMLP\x01", 6);

// Fixed column count for every GEMM so results never depend on how a batch
// was assembled.
constexpr Eigen::Index kChunk = 64;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

FrustumPoint random_point(const RigSettings& s, std::mt19937_64& rng) {
  const double u = 2.0 * uniform01(rng) - 1.0;
  const double v = 2.0 * uniform01(rng) - 1.0;
  const double inv = 1.0 / s.d_max + uniform01(rng) * (1.0 / s.d_min - 1.0 / s.d_max);
  return {u, v, std::clamp(1.0 / inv, s.d_min, s.d_max)};
}

void check_ks(const MlpWeights& w, int ks) {
  if (w.ks != ks) throw InvalidArgument("weights kernel size " + std::to_string(w.ks) + " does not match rig " +
                                        std::to_string(ks));
}

}  // namespace

MlpWeights init_mlp(int ks, std::uint64_t seed) {
  if (ks < 1 || ks % 2 == 0) throw InvalidArgument("kernel size must be odd and positive");
  std::vector<int> dims{3};
  for (int l = 0; l < kHiddenLayers; ++l) dims.push_back(kHiddenWidth);
  dims.push_back(2 * ks * ks);
  MlpWeights w = init_mlp_dims<float>(dims, seed);
  w.ks = ks;
  return w;
}

std::array<double, 3> encode_point(const RigSettings& s, const FrustumPoint& p) {
  if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.depth_m) || p.depth_m <= 0.0)
    throw InvalidArgument("point coordinates must be finite with positive depth");
  const double z = (1.0 / p.depth_m - 1.0 / s.d_max) / (1.0 / s.d_min - 1.0 / s.d_max);
  return {p.u, p.v, z};
}

std::vector<float> forward(const MlpWeights& w, const std::array<double, 3>& input) {
  for (double x : input)
    if (!std::isfinite(x)) throw InvalidArgument("network input must be finite");
  MlpWeights::Matrix x = MlpWeights::Matrix::Zero(3, kChunk);
  for (int k = 0; k < 3; ++k) x(k, 0) = static_cast<float>(input[k]);
  const MlpWeights::Matrix y = w.forward(x);
  return {y.col(0).data(), y.col(0).data() + y.rows()};
}

Eigen::VectorXf training_target(const DpPsf& psf) {
  const std::size_t n = psf.cells();
  Eigen::VectorXf t(static_cast<Eigen::Index>(2 * n));
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) peak = std::max({peak, psf.left[k], psf.right[k]});
  if (!(peak > 0.0)) throw DataError("training target is all zero");
  for (std::size_t k = 0; k < n; ++k) {
    t(static_cast<Eigen::Index>(k)) = static_cast<float>(psf.left[k] / peak);
    t(static_cast<Eigen::Index>(n + k)) = static_cast<float>(psf.right[k] / peak);
  }
  return t;
}

GridTargets::GridTargets(const PsfGrid& grid, const RigSettings& settings) : ks_(grid.ks) {
  std::vector<const PsfRecord*> usable;
  for (const PsfRecord& r : grid.records)
    if (!r.skipped && !r.psf.all_zero()) usable.push_back(&r);
  if (usable.empty()) throw DataError("target source is empty");
  const auto n = static_cast<Eigen::Index>(usable.size());
  inputs_.resize(3, n);
  targets_.resize(2 * ks_ * ks_, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto in = encode_point(settings, usable[c]->point);
    for (int k = 0; k < 3; ++k) inputs_(k, c) = static_cast<float>(in[k]);
    targets_.col(c) = training_target(usable[c]->psf);
  }
}

void GridTargets::draw(std::mt19937_64& rng, Eigen::MatrixXf& inputs, Eigen::MatrixXf& targets) {
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
    const auto idx = static_cast<Eigen::Index>(draw_index(rng, size()));
    inputs.col(c) = inputs_.col(idx);
    targets.col(c) = targets_.col(idx);
  }
}

void TraceTargets::draw(std::mt19937_64& rng, Eigen::MatrixXf& inputs, Eigen::MatrixXf& targets) {
  const auto n = static_cast<std::size_t>(inputs.cols());
  std::vector<FrustumPoint> pts(n);
  std::vector<DpPsf> psfs(n);
  std::vector<char> ok(n, 0);
  std::vector<std::size_t> pending(n);
  for (std::size_t k = 0; k < n; ++k) pending[k] = k;
  for (int round = 0; !pending.empty(); ++round) {
    if (round > 64) throw DataError("trace oracle keeps returning vignetted points");
    for (std::size_t k : pending) pts[k] = random_point(rig_.settings(), rng);
    parallel_for(pending.size(), [&](std::size_t m) {
      const std::size_t k = pending[m];
      try {
        psfs[k] = trace_dp_psf(rig_, pts[k]);
        ok[k] = 1;
      } catch (const VignettedError&) {
        ok[k] = 0;
      }
    });
    std::vector<std::size_t> again;
    for (std::size_t k : pending)
      if (!ok[k]) again.push_back(k);
    pending = std::move(again);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto in = encode_point(rig_.settings(), pts[k]);
    for (int d = 0; d < 3; ++d) inputs(d, static_cast<Eigen::Index>(k)) = static_cast<float>(in[d]);
    targets.col(static_cast<Eigen::Index>(k)) = training_target(psfs[k]);
  }
}

void TrainConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
  if (batch < 1) throw InvalidArgument("batch must be at least 1");
  if (!(lr_max > 0.0) || !(lr_min >= 0.0) || lr_min > lr_max) throw InvalidArgument("invalid learning rate schedule");
}

double learning_rate(const TrainConfig& cfg, std::size_t iteration) {
  if (cfg.iterations <= 1) return cfg.lr_max;
  const double t = static_cast<double>(iteration) / static_cast<double>(cfg.iterations - 1);
  return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * t));
}

TrainResult train(MlpWeights weights, const TrainConfig& cfg, TargetSource& source) {
  cfg.validate();
  weights.validate();
  check_ks(weights, source.ks());
  if (weights.input_dim() != 3 || weights.output_dim() != 2 * source.ks() * source.ks())
    throw InvalidArgument("network shape does not match the target source");

  const auto batch = static_cast<Eigen::Index>(cfg.batch);
  const Eigen::Index n_chunks = (batch + kChunk - 1) / kChunk;
  const float scale = 1.0f / static_cast<float>(static_cast<double>(batch) * weights.output_dim());

  std::mt19937_64 rng(cfg.seed);
  AdamState adam = AdamState::for_net(weights);
  std::vector<MlpGradient<float>> grads(static_cast<std::size_t>(n_chunks), MlpGradient<float>::zeros_like(weights));
  std::vector<double> sse(static_cast<std::size_t>(n_chunks));
  Eigen::MatrixXf inputs(3, batch), targets(weights.output_dim(), batch);

  TrainResult result;
  result.loss.reserve(cfg.iterations);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    source.draw(rng, inputs, targets);
    parallel_for(static_cast<std::size_t>(n_chunks), [&](std::size_t c) {
      const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
      const Eigen::Index len = std::min(kChunk, batch - begin);
      grads[c].set_zero();
      sse[c] = accumulate_sse_gradient<float>(weights, inputs.middleCols(begin, len), targets.middleCols(begin, len),
                                              scale, grads[c]);
    });
    double total = 0.0;
    for (std::size_t c = 1; c < grads.size(); ++c) grads[0] += grads[c];
    for (double s : sse) total += s;
    const double loss = total / (static_cast<double>(batch) * weights.output_dim());
    if (!std::isfinite(loss)) throw NumericalError("training diverged at iteration " + std::to_string(it));
    result.loss.push_back(loss);
    adam.step(weights, grads[0], learning_rate(cfg, it));
  }
  result.weights = std::move(weights);
  return result;
}

void predict_kernels(const MlpWeights& w, const RigSettings& settings, std::span<const FrustumPoint> points,
                     std::span<float> out) {
  check_ks(w, settings.ks);
  const auto width = static_cast<std::size_t>(w.output_dim());
  if (out.size() != points.size() * width) throw InvalidArgument("output buffer size mismatch");
  const std::size_t n_chunks = (points.size() + kChunk - 1) / kChunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t len = std::min<std::size_t>(kChunk, points.size() - begin);
    MlpWeights::Matrix x = MlpWeights::Matrix::Zero(3, kChunk);
    for (std::size_t k = 0; k < len; ++k) {
      const auto in = encode_point(settings, points[begin + k]);
      for (int d = 0; d < 3; ++d) x(d, static_cast<Eigen::Index>(k)) = static_cast<float>(in[d]);
    }
    const MlpWeights::Matrix y = w.forward(x);
    for (std::size_t k = 0; k < len; ++k) {
      float* dst = out.data() + (begin + k) * width;
      double sum = 0.0;
      for (std::size_t e = 0; e < width; ++e) {
        const float v = std::max(0.0f, y(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k)));
        dst[e] = v;
        sum += v;
      }
      if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericalError("degenerate prediction");
      for (std::size_t e = 0; e < width; ++e) dst[e] = static_cast<float>(dst[e] / sum);
    }
  });
}

DpPsf predict(const MlpWeights& w, const CameraRig& rig, const FrustumPoint& p) {
  check_in_frustum(rig, p);
  check_ks(w, rig.ks());
  const std::vector<float> raw = forward(w, encode_point(rig.settings(), p));
  DpPsf psf = DpPsf::zeros(rig.ks());
  const std::size_t n = psf.cells();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    psf.left[k] = std::max(0.0f, raw[k]);
    psf.right[k] = std::max(0.0f, raw[n + k]);
    sum += psf.left[k] + psf.right[k];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericalError("degenerate prediction");
  for (std::size_t k = 0; k < n; ++k) {
    psf.left[k] /= sum;
    psf.right[k] /= sum;
  }
  psf.normalization = PsfNormalization::Sum;
  psf.anchor = chief_ray_anchor(rig, p);
  return psf;
}

std::vector<std::uint8_t> save_weights(const MlpWeights& w) {
  w.validate();
  detail::ByteWriter out;
  out.bytes(kMagic);
  out.u8(static_cast<std::uint8_t>(w.activation));
  out.u32(static_cast<std::uint32_t>(w.ks));
  out.u32(static_cast<std::uint32_t>(w.weights.size()));
  for (std::size_t l = 0; l < w.weights.size(); ++l) {
    const auto& m = w.weights[l];
    out.u32(static_cast<std::uint32_t>(m.cols()));
    out.u32(static_cast<std::uint32_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.f32(m(r, c));
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.f32(w.biases[l](r));
  }
  return out.take();
}

MlpWeights load_weights(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "weights");
  in.expect(kMagic);
  MlpWeights w;
  const std::uint8_t act = in.u8();
  if (act != static_cast<std::uint8_t>(Activation::Relu)) throw DataError("weights: unknown activation");
  w.activation = Activation::Relu;
  const std::uint32_t ks = in.u32();
  const std::uint32_t layers = in.u32();
  if (ks == 0 || ks % 2 == 0 || ks > 4095) throw DataError("weights: invalid kernel size");
  if (layers == 0 || layers > 1024) throw DataError("weights: invalid layer count");
  w.ks = static_cast<int>(ks);
  std::uint32_t prev_out = 0;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint32_t n_in = in.u32();
    const std::uint32_t n_out = in.u32();
    if (n_in == 0 || n_out == 0 || n_in > (1u << 20) || n_out > (1u << 20)) throw DataError("weights: invalid dims");
    if (l > 0 && n_in != prev_out) throw DataError("weights: layer dims do not chain");
    in.need((static_cast<std::size_t>(n_in) * n_out + n_out) * 4);
    MlpWeights::Matrix m(n_out, n_in);
    for (std::uint32_t r = 0; r < n_out; ++r)
      for (std::uint32_t c = 0; c < n_in; ++c) m(r, c) = in.f32();
    MlpWeights::Vector b(n_out);
    for (std::uint32_t r = 0; r < n_out; ++r) b(r) = in.f32();
    w.weights.push_back(std::move(m));
    w.biases.push_back(std::move(b));
    prev_out = n_out;
  }
  in.finish();
  if (w.input_dim() != 3) throw DataError("weights: input width must be 3");
  if (w.output_dim() != static_cast<int>(2 * ks * ks)) throw DataError("weights: output width does not match ks");
  return w;
}

void write_weights(const std::filesystem::path& path, const MlpWeights& w) {
  detail::write_file(path.string(), save_weights(w));
}

MlpWeights read_weights(const std::filesystem::path& path) {
  return load_weights(detail::read_file(path.string()));
}

}  // namespace dpsim
