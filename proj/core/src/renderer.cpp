// SPDX-License-Identifier: Apache-2.0
#include "dpsim/renderer.hpp"

#include <algorithm>

#include "dpsim/error.hpp"
#include "dpsim/parallel.hpp"

namespace dpsim {

namespace {

void check_out(std::span<const FrustumPoint> points, std::span<float> out, int ks) {
  if (out.size() != points.size() * 2 * static_cast<std::size_t>(ks) * static_cast<std::size_t>(ks))
    throw InvalidArgument("kernel buffer size mismatch");
}

void copy_psf(const DpPsf& psf, float* dst) {
  const std::size_t n = psf.cells();
  const double total = psf.total();
  for (std::size_t k = 0; k < n; ++k) {
    dst[k] = static_cast<float>(psf.left[k] / total);
    dst[n + k] = static_cast<float>(psf.right[k] / total);
  }
}

}  // namespace

MlpPsfSource::MlpPsfSource(const MlpWeights& weights, const RigSettings& settings)
    : weights_(weights), settings_(settings) {
  if (weights.ks != settings.ks) throw InvalidArgument("weights kernel size does not match rig");
}

void MlpPsfSource::kernels(std::span<const FrustumPoint> points, std::span<float> out) const {
  predict_kernels(weights_, settings_, points, out);
}

void TracedPsfSource::kernels(std::span<const FrustumPoint> points, std::span<float> out) const {
  check_out(points, out, rig_.ks());
  const std::size_t width = 2 * static_cast<std::size_t>(rig_.ks()) * static_cast<std::size_t>(rig_.ks());
  parallel_for(points.size(), [&](std::size_t k) { copy_psf(trace_dp_psf(rig_, points[k]), out.data() + k * width); });
}

void CocPsfSource::kernels(std::span<const FrustumPoint> points, std::span<float> out) const {
  check_out(points, out, rig_.ks());
  const std::size_t width = 2 * static_cast<std::size_t>(rig_.ks()) * static_cast<std::size_t>(rig_.ks());
  parallel_for(points.size(), [&](std::size_t k) { copy_psf(coc_dp_psf(rig_, points[k]), out.data() + k * width); });
}

std::span<const float> PsfMap::left(int x, int y) const {
  const std::size_t n = kernel_cells();
  return {kernels.data() + (static_cast<std::size_t>(y) * width + x) * 2 * n, n};
}

std::span<const float> PsfMap::right(int x, int y) const {
  const std::size_t n = kernel_cells();
  return {kernels.data() + (static_cast<std::size_t>(y) * width + x) * 2 * n + n, n};
}

FrustumPoint pixel_point(int col, int row, int width, int height, double depth_m) {
  return {2.0 * (col + 0.5) / width - 1.0, 2.0 * (row + 0.5) / height - 1.0, depth_m};
}

PsfMap build_psf_map_rows(const PsfSource& source, const Image& depth, int row_begin, int row_end) {
  if (depth.channels != 1) throw InvalidArgument("depth map must have 1 channel");
  if (row_begin < 0 || row_end > depth.height || row_begin >= row_end) throw InvalidArgument("invalid row range");
  PsfMap map;
  map.width = depth.width;
  map.height = row_end - row_begin;
  map.ks = source.ks();
  std::vector<FrustumPoint> pts;
  pts.reserve(static_cast<std::size_t>(map.width) * map.height);
  for (int y = row_begin; y < row_end; ++y)
    for (int x = 0; x < depth.width; ++x) pts.push_back(pixel_point(x, y, depth.width, depth.height, depth.at(x, y, 0)));
  map.kernels.resize(pts.size() * 2 * map.kernel_cells());
  source.kernels(pts, map.kernels);
  return map;
}

PsfMap build_psf_map(const PsfSource& source, const Image& depth) {
  return build_psf_map_rows(source, depth, 0, depth.height);
}

DpImagePair render_dp(const Image& aif, const PsfMap& map, int row_offset) {
  if (map.width != aif.width || row_offset < 0 || row_offset + map.height > aif.height)
    throw InvalidArgument("PSF map does not match the image");
  if (map.ks < 1 || map.ks % 2 == 0) throw InvalidArgument("kernel size must be odd");
  if (map.kernels.size() != static_cast<std::size_t>(map.width) * map.height * 2 * map.kernel_cells())
    throw InvalidArgument("PSF map storage size mismatch");
  const int ks = map.ks, half = ks / 2, C = aif.channels;
  DpImagePair out{Image::zeros(aif.width, map.height, C), Image::zeros(aif.width, map.height, C)};

  parallel_for(static_cast<std::size_t>(map.height), [&](std::size_t row) {
    const int y = row_offset + static_cast<int>(row);
    std::vector<double> accl(C), accr(C);
    for (int x = 0; x < aif.width; ++x) {
      const float* kl = map.left(x, static_cast<int>(row)).data();
      const float* kr = map.right(x, static_cast<int>(row)).data();
      std::fill(accl.begin(), accl.end(), 0.0);
      std::fill(accr.begin(), accr.end(), 0.0);
      // Input offset (ox, oy) meets kernel cell (half - oy, half - ox).
      for (int oy = -half; oy <= half; ++oy) {
        const int sy = std::clamp(y + oy, 0, aif.height - 1);
        const std::size_t krow = static_cast<std::size_t>(half - oy) * ks;
        for (int ox = -half; ox <= half; ++ox) {
          const int sx = std::clamp(x + ox, 0, aif.width - 1);
          const std::size_t kidx = krow + static_cast<std::size_t>(half - ox);
          const double wl = kl[kidx], wr = kr[kidx];
          const double* src = &aif.data[aif.index(sx, sy, 0)];
          for (int c = 0; c < C; ++c) {
            accl[c] += wl * src[c];
            accr[c] += wr * src[c];
          }
        }
      }
      for (int c = 0; c < C; ++c) {
        out.left.at(x, static_cast<int>(row), c) = accl[c];
        out.right.at(x, static_cast<int>(row), c) = accr[c];
      }
    }
  });
  return out;
}

DpImagePair render_dp(const RgbdFrame& frame, const PsfSource& source, int band_rows) {
  if (!(frame.rgb.width == frame.depth.width && frame.rgb.height == frame.depth.height))
    throw InvalidArgument("colour and depth dimensions differ");
  if (band_rows < 1) throw InvalidArgument("band height must be positive");
  const Image& img = frame.rgb;
  DpImagePair out{Image::zeros(img.width, img.height, img.channels), Image::zeros(img.width, img.height, img.channels)};
  for (int y0 = 0; y0 < img.height; y0 += band_rows) {
    const int y1 = std::min(img.height, y0 + band_rows);
    const PsfMap map = build_psf_map_rows(source, frame.depth, y0, y1);
    const DpImagePair band = render_dp(img, map, y0);
    const std::size_t off = img.index(0, y0, 0);
    std::copy(band.left.data.begin(), band.left.data.end(), out.left.data.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(band.right.data.begin(), band.right.data.end(),
              out.right.data.begin() + static_cast<std::ptrdiff_t>(off));
  }
  return out;
}

}  // namespace dpsim
