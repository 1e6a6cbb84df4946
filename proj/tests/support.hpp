// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the test suites.
#pragma once

#include <filesystem>
#include <string>

#include "dpsim/lens.hpp"
#include "dpsim/psf_engine.hpp"

namespace dpsim::test {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(DPSIM_DATA_DIR) / name; }

inline LensPrescription rf50() { return load_lens_file(data_path("rf50.lens")); }
inline LensPrescription rf35() { return load_lens_file(data_path("rf35.lens")); }

inline SensorGeometry full_frame() { return {36.0, 24.0, 768, 512}; }

/// RF50 at F/4 focused at 1 m, 4096 rays, ks = 21.
inline CameraRig rf50_rig(RigSettings s = {}) {
  const SensorGeometry sensor = full_frame();
  return CameraRig(rf50(), sensor, DpPixelGeometry::calibrated_default(sensor.pitch()), s);
}

}  // namespace dpsim::test
