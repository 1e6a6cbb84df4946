// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dpsim {

enum class SurfaceKind { Sphere, EvenAsphere, Stop, Sensor };

/// Glass following a surface. `n` is used directly as the working index.
struct Material {
  double n = 1.0;
  double abbe = 0.0;
  friend bool operator==(const Material&, const Material&) = default;
};

/// One row of a lens table. Lengths are millimetres; light travels along +z
/// and a positive radius puts the centre of curvature to the right of the
/// vertex. A zero radius is planar.
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::Sphere;
  double radius = 0.0;
  double thickness = 0.0;
  std::optional<Material> material;  // empty = air
  double semi_diameter = 0.0;
  double conic = 0.0;
  std::array<double, 5> asphere{};  // a4, a6, a8, a10, a12

  bool planar() const noexcept { return radius == 0.0; }
  double curvature() const noexcept { return planar() ? 0.0 : 1.0 / radius; }
  double index_after() const noexcept { return material ? material->n : 1.0; }

  friend bool operator==(const SurfaceSpec&, const SurfaceSpec&) = default;
};

struct LensPrescription {
  std::vector<SurfaceSpec> surfaces;  // last entry is the sensor
  std::size_t stop_index = 0;
  double native_f_number = 0.0;

  /// Throws InvalidArgument when a structural invariant is broken.
  void validate() const;

  /// Axial position of each surface vertex, surface 0 at z = 0.
  std::vector<double> vertex_positions() const;

  /// Index of the last refracting surface (the one whose thickness is the
  /// lens-to-sensor gap).
  std::size_t last_optical_index() const;

  friend bool operator==(const LensPrescription&, const LensPrescription&) = default;
};

/// Parses the whitespace-separated lens table format:
///
///   index kind radius_mm thickness_mm n/V diameter_mm [conic a4 a6 a8 a10 a12]
///
/// `kind` is one of S, A, STOP, SENSOR; `-` stands for an empty cell (planar
/// radius, air, zero thickness). `#` starts a comment. An optional
/// `FNUMBER <N>` line records the design aperture; without it the native
/// F-number is derived from the paraxial pupil.
LensPrescription parse_lens_prescription(std::string_view text);

std::string serialize_lens_prescription(const LensPrescription& lens);

LensPrescription load_lens_file(const std::filesystem::path& path);

}  // namespace dpsim
