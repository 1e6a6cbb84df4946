// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "dpsim/mlp.hpp"
#include "dpsim/psf_engine.hpp"

namespace dpsim {

using MlpWeights = Mlp<float>;

inline constexpr int kHiddenLayers = 5;
inline constexpr int kHiddenWidth = 512;

/// [3, 512 x 5, 2 ks^2], seeded uniform weights, zero biases.
MlpWeights init_mlp(int ks, std::uint64_t seed);

/// (u, v, z) with z = (1/d - 1/d_max) / (1/d_min - 1/d_max).
std::array<double, 3> encode_point(const RigSettings& settings, const FrustumPoint& p);

/// Raw network output (length 2 ks^2) for an encoded point. Throws
/// InvalidArgument on non-finite input.
std::vector<float> forward(const MlpWeights& w, const std::array<double, 3>& input);

/// Supplies training pairs: encoded inputs (3 x n) and jointly
/// max-normalized concatenated targets (2 ks^2 x n).
class TargetSource {
 public:
  virtual ~TargetSource() = default;
  virtual int ks() const = 0;
  virtual void draw(std::mt19937_64& rng, Eigen::MatrixXf& inputs, Eigen::MatrixXf& targets) = 0;
};

/// Uniform draws from the non-skipped records of a precomputed grid.
class GridTargets final : public TargetSource {
 public:
  GridTargets(const PsfGrid& grid, const RigSettings& settings);
  int ks() const override { return ks_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.cols()); }
  void draw(std::mt19937_64& rng, Eigen::MatrixXf& inputs, Eigen::MatrixXf& targets) override;

 private:
  int ks_ = 0;
  Eigen::MatrixXf inputs_;
  Eigen::MatrixXf targets_;
};

/// Traces fresh uniformly drawn frustum points on every call; vignetted
/// draws are replaced.
class TraceTargets final : public TargetSource {
 public:
  explicit TraceTargets(const CameraRig& rig) : rig_(rig) {}
  int ks() const override { return rig_.ks(); }
  void draw(std::mt19937_64& rng, Eigen::MatrixXf& inputs, Eigen::MatrixXf& targets) override;

 private:
  const CameraRig& rig_;
};

/// Jointly max-normalized concatenation of a raw-count PSF.
Eigen::VectorXf training_target(const DpPsf& psf);

struct TrainConfig {
  std::size_t iterations = 100000;
  std::size_t batch = 128;
  double lr_max = 1e-4;
  double lr_min = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Cosine decay from lr_max at iteration 0 to lr_min at the last one.
double learning_rate(const TrainConfig& cfg, std::size_t iteration);

struct TrainResult {
  MlpWeights weights;
  std::vector<double> loss;  // batch mean squared error before each update
};

/// Adam on the mean squared error. The batch is split into fixed chunks so
/// the loss trace does not depend on the worker count.
TrainResult train(MlpWeights weights, const TrainConfig& cfg, TargetSource& source);

/// Clamped, jointly sum-normalized prediction anchored at the chief ray.
/// Throws NumericalError when the clamped output is all zero.
DpPsf predict(const MlpWeights& w, const CameraRig& rig, const FrustumPoint& p);

/// Batched kernels without anchors: 2 ks^2 floats per point (left, right),
/// clamped and sum-normalized. Results do not depend on batch composition.
void predict_kernels(const MlpWeights& w, const RigSettings& settings, std::span<const FrustumPoint> points,
                     std::span<float> out);

std::vector<std::uint8_t> save_weights(const MlpWeights& w);
MlpWeights load_weights(std::span<const std::uint8_t> bytes);
void write_weights(const std::filesystem::path& path, const MlpWeights& w);
MlpWeights read_weights(const std::filesystem::path& path);

}  // namespace dpsim
