// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "dpsim/error.hpp"
#include "dpsim/lens.hpp"
#include "support.hpp"

namespace dpsim {
namespace {

constexpr const char* kDoublet = R"(# cemented doublet
FNUMBER 4
1 S 60.0 5.0 1.5168/64.2 25.0
2 S -45.0 2.0 1.6727/32.2 25.0
3 S -150.0 10.0 - 25.0
4 STOP - 85.0 - 20.0
5 SENSOR - - - 40.0
)";

TEST(LensParse, ReadsSurfacesAndMaterials) {
  const LensPrescription lens = parse_lens_prescription(kDoublet);
  ASSERT_EQ(lens.surfaces.size(), 5u);
  EXPECT_EQ(lens.stop_index, 3u);
  EXPECT_DOUBLE_EQ(lens.native_f_number, 4.0);
  EXPECT_EQ(lens.surfaces[0].kind, SurfaceKind::Sphere);
  EXPECT_DOUBLE_EQ(lens.surfaces[0].radius, 60.0);
  ASSERT_TRUE(lens.surfaces[0].material.has_value());
  EXPECT_DOUBLE_EQ(lens.surfaces[0].material->n, 1.5168);
  EXPECT_DOUBLE_EQ(lens.surfaces[0].material->abbe, 64.2);
  EXPECT_FALSE(lens.surfaces[2].material.has_value());
  EXPECT_DOUBLE_EQ(lens.surfaces[0].semi_diameter, 12.5);
  EXPECT_TRUE(lens.surfaces[3].planar());
  EXPECT_EQ(lens.surfaces.back().kind, SurfaceKind::Sensor);
  EXPECT_EQ(lens.last_optical_index(), 3u);
}

TEST(LensParse, VertexPositionsAccumulateThickness) {
  const auto z = parse_lens_prescription(kDoublet).vertex_positions();
  ASSERT_EQ(z.size(), 5u);
  EXPECT_DOUBLE_EQ(z[0], 0.0);
  EXPECT_DOUBLE_EQ(z[1], 5.0);
  EXPECT_DOUBLE_EQ(z[3], 17.0);
  EXPECT_DOUBLE_EQ(z[4], 102.0);
}

TEST(LensParse, SerializeRoundTrip) {
  for (const LensPrescription& lens : {parse_lens_prescription(kDoublet), test::rf50(), test::rf35()}) {
    const std::string text = serialize_lens_prescription(lens);
    const LensPrescription back = parse_lens_prescription(text);
    EXPECT_EQ(back, lens);
    EXPECT_EQ(serialize_lens_prescription(back), text);
  }
}

TEST(LensParse, AsphereCoefficients) {
  const LensPrescription lens = test::rf50();
  const SurfaceSpec& s9 = lens.surfaces[8];
  EXPECT_EQ(s9.kind, SurfaceKind::EvenAsphere);
  EXPECT_DOUBLE_EQ(s9.asphere[0], -4.12032e-05);
  EXPECT_DOUBLE_EQ(s9.asphere[4], -9.28470e-13);
}

TEST(LensParse, TablesHaveExpectedShape) {
  EXPECT_EQ(test::rf50().surfaces.size(), 13u);
  EXPECT_EQ(test::rf35().surfaces.size(), 22u);
  EXPECT_EQ(test::rf50().stop_index, 5u);
}

std::size_t error_line(const std::string& text) {
  try {
    parse_lens_prescription(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(LensParse, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("1 S 10 x 1.5/60 10\n2 STOP - 1 - 5\n3 SENSOR - - - 10\n"), 1u);
  EXPECT_EQ(error_line("# c\n1 S 10 1 1.5/60 10\n2 STOP - -1 - 5\n3 SENSOR - - - 10\n"), 3u);
  EXPECT_EQ(error_line("1 S 10 1 1.5/60\n"), 1u);
  EXPECT_EQ(error_line("1 Q 10 1 1.5/60 10\n"), 1u);
}

TEST(LensParse, StructuralErrors) {
  EXPECT_THROW(parse_lens_prescription(""), ParseError);
  EXPECT_THROW(parse_lens_prescription("# only a comment\n"), ParseError);
  EXPECT_THROW(parse_lens_prescription("1 S 10 1 1.5/60 10\n2 SENSOR - - - 10\n"), ParseError);
  EXPECT_THROW(parse_lens_prescription("1 S 10 1 1.5/60 10\n2 STOP - 1 - 5\n"), ParseError);
}

TEST(LensParse, MissingFile) { EXPECT_THROW(load_lens_file("/nonexistent/lens.txt"), DataError); }

}  // namespace
}  // namespace dpsim
