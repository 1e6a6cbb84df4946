// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "dpsim/cost_volume.hpp"
#include "dpsim/error.hpp"

namespace dpsim {
namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (float& v : t.data) v = u(rng);
  return t;
}

float at5(const Tensor& t, int b, int c, int i, int r, int j) {
  const auto& s = t.shape;
  return t.data[(((static_cast<std::size_t>(b) * s[1] + c) * s[2] + i) * s[3] + r) * s[4] + j];
}

TEST(CostVolume, HandWorkedRow) {
  Tensor x = Tensor::zeros({1, 1, 1, 3}), y = Tensor::zeros({1, 1, 1, 3});
  x.data = {1, 2, 3};
  y.data = {4, 5, 6};
  const Tensor v = dp_cost_volume(x, y, 3);
  ASSERT_EQ(v.shape, (std::vector<int>{1, 2, 3, 1, 3}));
  // d = -1: columns 0..1, y read at j + 1.
  EXPECT_EQ(std::vector<float>(v.data.begin(), v.data.begin() + 3), (std::vector<float>{1, 2, 0}));
  // d = 0: straight copy.
  EXPECT_EQ(std::vector<float>(v.data.begin() + 3, v.data.begin() + 6), (std::vector<float>{1, 2, 3}));
  // d = +1: columns 1..2.
  EXPECT_EQ(std::vector<float>(v.data.begin() + 6, v.data.begin() + 9), (std::vector<float>{0, 2, 3}));
  EXPECT_EQ(std::vector<float>(v.data.begin() + 9, v.data.begin() + 12), (std::vector<float>{5, 6, 0}));
  EXPECT_EQ(std::vector<float>(v.data.begin() + 12, v.data.begin() + 15), (std::vector<float>{4, 5, 6}));
  EXPECT_EQ(std::vector<float>(v.data.begin() + 15, v.data.begin() + 18), (std::vector<float>{0, 4, 5}));
}

TEST(CostVolume, MatchesLoopOracle) {
  const int B = 2, C = 3, H = 4, W = 7, D = 6;
  const Tensor x = random_tensor({B, C, H, W}, 1), y = random_tensor({B, C, H, W}, 2);
  const Tensor v = dp_cost_volume(x, y, D);
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < D; ++i)
      for (int c = 0; c < C; ++c)
        for (int r = 0; r < H; ++r)
          for (int j = 0; j < W; ++j) {
            const int d = i - D / 2;
            const bool ok = j - d >= 0 && j - d < W;
            EXPECT_EQ(at5(v, b, c, i, r, j), ok ? at4(x, b, c, r, j) : 0.0f);
            EXPECT_EQ(at5(v, b, C + c, i, r, j), ok ? at4(y, b, c, r, j - d) : 0.0f);
          }
}

TEST(CostVolume, DisplacementBeyondWidthIsEmpty) {
  const Tensor x = random_tensor({1, 1, 2, 2}, 3);
  const Tensor v = dp_cost_volume(x, x, 8);
  for (int i : {0, 1, 6, 7})
    for (int c = 0; c < 2; ++c)
      for (int r = 0; r < 2; ++r)
        for (int j = 0; j < 2; ++j) EXPECT_EQ(at5(v, 0, c, i, r, j), 0.0f);
}

TEST(CostVolume, SwappingInputsMirrorsDisplacement) {
  // Slice i of (x, y) holds the same pairs as slice D - i of (y, x), halves exchanged.
  const int C = 2, H = 3, W = 6, D = 4;
  const Tensor x = random_tensor({1, C, H, W}, 4), y = random_tensor({1, C, H, W}, 5);
  const Tensor a = dp_cost_volume(x, y, D), b = dp_cost_volume(y, x, D);
  for (int i = 1; i < D; ++i) {
    const int d = i - D / 2, i2 = D - i;
    for (int c = 0; c < C; ++c)
      for (int r = 0; r < H; ++r)
        for (int j = 0; j < W; ++j) {
          if (j - d < 0 || j - d >= W) continue;
          EXPECT_EQ(at5(a, 0, c, i, r, j), at5(b, 0, C + c, i2, r, j - d));
          EXPECT_EQ(at5(a, 0, C + c, i, r, j), at5(b, 0, c, i2, r, j - d));
        }
  }
}

TEST(CostVolume, Preconditions) {
  const Tensor x = random_tensor({1, 1, 2, 3}, 1);
  EXPECT_THROW(dp_cost_volume(x, random_tensor({1, 1, 2, 4}, 1), 2), InvalidArgument);
  EXPECT_THROW(dp_cost_volume(x, x, 0), InvalidArgument);
  EXPECT_THROW(dp_cost_volume(random_tensor({2, 3}, 1), random_tensor({2, 3}, 1), 2), InvalidArgument);
}

TEST(TensorBlob, RoundTripAndErrors) {
  const Tensor t = random_tensor({2, 3, 4}, 7);
  const auto bytes = encode_tensor(t);
  EXPECT_EQ(bytes.size(), 7u + 4u + 12u + 24u * 4u);
  const Tensor back = decode_tensor(bytes);
  EXPECT_EQ(back.shape, t.shape);
  EXPECT_EQ(back.data, t.data);
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_tensor(cut), DataError);
  auto extra = bytes;
  extra.push_back(1);
  EXPECT_THROW(decode_tensor(extra), DataError);
  auto magic = bytes;
  magic[2] = 'x';
  EXPECT_THROW(decode_tensor(magic), DataError);
}

}  // namespace
}  // namespace dpsim
