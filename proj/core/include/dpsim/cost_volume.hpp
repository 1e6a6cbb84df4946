// SPDX-License-Identifier: Apache-2.0
// Bidirectional dual-pixel cost volume for depth networks.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dpsim {

/// Dense row-major tensor of f32 values.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  static Tensor zeros(std::vector<int> shape);
  std::size_t size() const noexcept { return data.size(); }
  int rank() const noexcept { return static_cast<int>(shape.size()); }
};

/// (B, C, H, W)
using FeatureMap = Tensor;

inline float& at4(Tensor& t, int b, int c, int y, int x) {
  return t.data[((static_cast<std::size_t>(b) * t.shape[1] + c) * t.shape[2] + y) * t.shape[3] + x];
}
inline float at4(const Tensor& t, int b, int c, int y, int x) {
  return t.data[((static_cast<std::size_t>(b) * t.shape[1] + c) * t.shape[2] + y) * t.shape[3] + x];
}

/// Output (B, 2C, d_max, H, W). Slice i uses displacement d = i - d_max/2
/// (floor). Channels [0, C) hold x at column j, channels [C, 2C) hold y at
/// column j - d, for columns where both are defined; everything else is 0.
Tensor dp_cost_volume(const FeatureMap& x, const FeatureMap& y, int d_max);

/// "DPTNSR\x01" u32 rank, u32 dims[rank], f32 data (little-endian).
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace dpsim
