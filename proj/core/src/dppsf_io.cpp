// SPDX-License-Identifier: Apache-2.0
#include "dpsim/dppsf_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "binary_io.hpp"

namespace dpsim {

namespace detail {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace detail

namespace {
constexpr std::string_view kMagic("DPPSF\x01", 6);
}

std::vector<std::uint8_t> encode_dppsf(const PsfGrid& grid) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(static_cast<std::uint32_t>(grid.ks));
  w.u32(static_cast<std::uint32_t>(grid.records.size()));
  for (const PsfRecord& rec : grid.records) {
    if (rec.psf.ks != grid.ks) throw InvalidArgument("record kernel size differs from grid");
    w.f32(static_cast<float>(rec.point.u));
    w.f32(static_cast<float>(rec.point.v));
    w.f32(static_cast<float>(rec.point.depth_m));
    w.i32(rec.psf.anchor.i);
    w.i32(rec.psf.anchor.j);
    w.u32(static_cast<std::uint32_t>(rec.psf.missed_count));
    for (double v : rec.psf.left) w.f32(static_cast<float>(v));
    for (double v : rec.psf.right) w.f32(static_cast<float>(v));
  }
  return w.take();
}

PsfGrid decode_dppsf(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "dppsf");
  r.expect(kMagic);
  PsfGrid grid;
  const std::uint32_t ks = r.u32();
  const std::uint32_t count = r.u32();
  if (ks == 0 || ks % 2 == 0 || ks > 4095) throw DataError("dppsf: invalid kernel size");
  const std::size_t cells = static_cast<std::size_t>(ks) * ks;
  const std::size_t record_bytes = 24 + 8 * cells;
  if (r.remaining() / record_bytes < count) throw DataError("dppsf: truncated");
  grid.ks = static_cast<int>(ks);
  grid.records.resize(count);
  for (PsfRecord& rec : grid.records) {
    rec.point.u = r.f32();
    rec.point.v = r.f32();
    rec.point.depth_m = r.f32();
    rec.psf = DpPsf::zeros(grid.ks);
    rec.psf.anchor.i = r.i32();
    rec.psf.anchor.j = r.i32();
    rec.psf.missed_count = r.u32();
    for (double& v : rec.psf.left) v = r.f32();
    for (double& v : rec.psf.right) v = r.f32();
    rec.skipped = rec.psf.all_zero();
  }
  r.finish();
  return grid;
}

void write_dppsf(const std::filesystem::path& path, const PsfGrid& grid) {
  detail::write_file(path.string(), encode_dppsf(grid));
}

PsfGrid read_dppsf(const std::filesystem::path& path) { return decode_dppsf(detail::read_file(path.string())); }

}  // namespace dpsim
