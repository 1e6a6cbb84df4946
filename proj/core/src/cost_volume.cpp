// SPDX-License-Identifier: Apache-2.0
#include "dpsim/cost_volume.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "dpsim/error.hpp"
#include "dpsim/parallel.hpp"

namespace dpsim {

namespace {
constexpr std::string_view kMagic("DPTNSR\x01", 7);
}

Tensor Tensor::zeros(std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 1) throw InvalidArgument("tensor dims must be positive");
    n *= static_cast<std::size_t>(d);
  }
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(n, 0.0f);
  return t;
}

Tensor dp_cost_volume(const FeatureMap& x, const FeatureMap& y, int d_max) {
  if (x.rank() != 4 || y.rank() != 4) throw InvalidArgument("feature maps must be (B, C, H, W)");
  if (x.shape != y.shape) throw InvalidArgument("feature map shapes differ");
  if (d_max < 1) throw InvalidArgument("d_max must be at least 1");
  const int B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  Tensor out = Tensor::zeros({B, 2 * C, d_max, H, W});
  const std::size_t plane = static_cast<std::size_t>(H) * W;

  parallel_for(static_cast<std::size_t>(B) * d_max, [&](std::size_t job) {
    const int b = static_cast<int>(job / d_max);
    const int i = static_cast<int>(job % d_max);
    const int d = i - d_max / 2;
    const int lo = std::max(0, d), hi = std::min(W, W + d);
    if (lo >= hi) return;
    for (int c = 0; c < C; ++c) {
      float* ox = &out.data[((static_cast<std::size_t>(b) * 2 * C + c) * d_max + i) * plane];
      float* oy = &out.data[((static_cast<std::size_t>(b) * 2 * C + C + c) * d_max + i) * plane];
      for (int r = 0; r < H; ++r)
        for (int j = lo; j < hi; ++j) {
          ox[static_cast<std::size_t>(r) * W + j] = at4(x, b, c, r, j);
          oy[static_cast<std::size_t>(r) * W + j] = at4(y, b, c, r, j - d);
        }
    }
  });
  return out;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(static_cast<std::uint32_t>(t.shape.size()));
  for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
  for (float v : t.data) w.f32(v);
  return w.take();
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "tensor");
  r.expect(kMagic);
  const std::uint32_t rank = r.u32();
  if (rank == 0 || rank > 8) throw DataError("tensor: invalid rank");
  std::vector<int> shape;
  std::size_t n = 1;
  for (std::uint32_t k = 0; k < rank; ++k) {
    const std::uint32_t d = r.u32();
    if (d == 0 || d > (1u << 24)) throw DataError("tensor: invalid dim");
    shape.push_back(static_cast<int>(d));
    n *= d;
    if (n > (std::size_t{1} << 32)) throw DataError("tensor: too large");
  }
  r.need(n * 4);
  Tensor t = Tensor::zeros(std::move(shape));
  for (float& v : t.data) v = r.f32();
  r.finish();
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  detail::write_file(path.string(), encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(detail::read_file(path.string())); }

}  // namespace dpsim
