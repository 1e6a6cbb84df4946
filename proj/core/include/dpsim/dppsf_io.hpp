// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dpsim/psf_engine.hpp"

namespace dpsim {

/// `.dppsf` layout, little-endian:
///
///   "DPPSF\x01" u32 ks u32 count
///   per record: f32 u, f32 v, f32 depth_m, i32 anchor_i, i32 anchor_j,
///               u32 missed, 2*ks^2 f32 (left row-major, then right)
///
/// Skipped (fully vignetted) records carry all-zero kernels.
std::vector<std::uint8_t> encode_dppsf(const PsfGrid& grid);
PsfGrid decode_dppsf(std::span<const std::uint8_t> bytes);

void write_dppsf(const std::filesystem::path& path, const PsfGrid& grid);
PsfGrid read_dppsf(const std::filesystem::path& path);

}  // namespace dpsim
