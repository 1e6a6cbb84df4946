// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dpsim {

/// Interleaved image, top row first.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  static Image zeros(int width, int height, int channels);

  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
  double& at(int x, int y, int c) noexcept { return data[index(x, y, c)]; }
  double at(int x, int y, int c) const noexcept { return data[index(x, y, c)]; }
  bool same_shape(const Image& o) const noexcept {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// All-in-focus colour image plus metric depth, clamped into the rig range.
struct RgbdFrame {
  Image rgb;    // 3 channels in [0, 1]
  Image depth;  // 1 channel, metres
  std::size_t clamped = 0;
};

RgbdFrame make_rgbd(Image rgb, Image depth, double d_min, double d_max);

struct DpImagePair {
  Image left;
  Image right;
};

/// "PF" (3 channels) or "Pf" (1 channel). Negative scale means
/// little-endian; rows run bottom to top.
std::vector<std::uint8_t> encode_pfm(const Image& img);
Image decode_pfm(std::span<const std::uint8_t> bytes);

/// Binary "P6" (3 channels) or "P5" (1 channel), maxval 255. Writing
/// quantizes round-half-up after clamping to [0, 1].
std::vector<std::uint8_t> encode_ppm(const Image& img);
Image decode_ppm(std::span<const std::uint8_t> bytes);

/// Dispatches on the magic number.
Image read_image(const std::filesystem::path& path);

/// Format chosen by extension: .pfm, or .ppm/.pgm.
void write_image(const std::filesystem::path& path, const Image& img);

}  // namespace dpsim
