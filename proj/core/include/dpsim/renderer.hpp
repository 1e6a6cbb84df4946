// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dpsim/image.hpp"
#include "dpsim/psf_engine.hpp"
#include "dpsim/psf_predictor.hpp"

namespace dpsim {

/// Anything able to produce sum-normalized kernel pairs for frustum points:
/// 2 ks^2 floats per point, left then right, in read-out orientation.
class PsfSource {
 public:
  virtual ~PsfSource() = default;
  virtual int ks() const = 0;
  virtual void kernels(std::span<const FrustumPoint> points, std::span<float> out) const = 0;
};

class MlpPsfSource final : public PsfSource {
 public:
  MlpPsfSource(const MlpWeights& weights, const RigSettings& settings);
  int ks() const override { return weights_.ks; }
  void kernels(std::span<const FrustumPoint> points, std::span<float> out) const override;

 private:
  const MlpWeights& weights_;
  RigSettings settings_;
};

class TracedPsfSource final : public PsfSource {
 public:
  explicit TracedPsfSource(const CameraRig& rig) : rig_(rig) {}
  int ks() const override { return rig_.ks(); }
  void kernels(std::span<const FrustumPoint> points, std::span<float> out) const override;

 private:
  const CameraRig& rig_;
};

class CocPsfSource final : public PsfSource {
 public:
  explicit CocPsfSource(const CameraRig& rig) : rig_(rig) {}
  int ks() const override { return rig_.ks(); }
  void kernels(std::span<const FrustumPoint> points, std::span<float> out) const override;

 private:
  const CameraRig& rig_;
};

/// Per-pixel kernel pairs, row-major over pixels.
struct PsfMap {
  int width = 0;
  int height = 0;
  int ks = 0;
  std::vector<float> kernels;

  std::size_t kernel_cells() const noexcept { return static_cast<std::size_t>(ks) * static_cast<std::size_t>(ks); }
  std::span<const float> left(int x, int y) const;
  std::span<const float> right(int x, int y) const;
};

/// Pixel (row, col) maps to u = 2(col + 0.5)/W - 1, v = 2(row + 0.5)/H - 1.
FrustumPoint pixel_point(int col, int row, int width, int height, double depth_m);

/// One kernel pair per pixel of the depth map.
PsfMap build_psf_map(const PsfSource& source, const Image& depth);

/// Rows [row_begin, row_end) of the map only.
PsfMap build_psf_map_rows(const PsfSource& source, const Image& depth, int row_begin, int row_end);

/// Per-pixel true convolution with replicate padding. `map` may cover only
/// rows [row_offset, row_offset + map.height) of the image; the returned
/// pair then has the same height as the map.
DpImagePair render_dp(const Image& aif, const PsfMap& map, int row_offset = 0);

/// Builds kernels band by band so that memory stays bounded on large frames.
DpImagePair render_dp(const RgbdFrame& frame, const PsfSource& source, int band_rows = 16);

}  // namespace dpsim
