// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "dpsim/psf_engine.hpp"

namespace dpsim::cli {

/// Rig description loaded from JSON. Example:
///
///   {
///     "lens_file": "rf50.lens",
///     "sensor": {"width_mm": 36, "height_mm": 24, "cols": 768, "rows": 512},
///     "dp_pixel": {"r_over_ps": 0.5, "f_over_ps": 1.44, "h_over_ps": 0.78, "w_over_ps": 0.3},
///     "focus_m": 1.0,
///     "f_number": 4.0,
///     "depth_range_m": [0.5, 20.0],
///     "n_rays": 4096,
///     "ks": 21,
///     "seed": 1
///   }
///
/// lens_file is resolved relative to the config file. focus_m accepts "inf".
/// dp_pixel is optional and defaults to the calibrated structure; the pitch
/// is always sensor width / cols. Unknown keys are rejected.
struct RigConfig {
  std::filesystem::path lens_file;
  LensPrescription lens;
  SensorGeometry sensor;
  DpPixelGeometry dp;
  RigSettings settings;
  std::uint64_t seed = 0;

  CameraRig make_rig() const { return CameraRig(lens, sensor, dp, settings); }
};

/// Throws InvalidArgument (malformed JSON, schema or values) or ParseError
/// (lens file). Every value is checked by building the rig once.
RigConfig parse_rig_config(std::string_view json_text, const std::filesystem::path& base_dir);
RigConfig load_rig_config(const std::filesystem::path& path);

}  // namespace dpsim::cli
