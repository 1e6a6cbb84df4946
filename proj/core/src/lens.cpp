// SPDX-License-Identifier: Apache-2.0
#include "dpsim/lens.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dpsim/error.hpp"
#include "dpsim/optics.hpp"

namespace dpsim {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view tok, std::size_t line, const char* field) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, std::string("non-numeric ") + field + " '" + std::string(tok) + "'");
  }
  return v;
}

double parse_optional_number(std::string_view tok, std::size_t line, const char* field) {
  return tok == "-" ? 0.0 : parse_number(tok, line, field);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const char* kind_token(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::Sphere: return "S";
    case SurfaceKind::EvenAsphere: return "A";
    case SurfaceKind::Stop: return "STOP";
    case SurfaceKind::Sensor: return "SENSOR";
  }
  return "?";
}

}  // namespace

void LensPrescription::validate() const {
  if (surfaces.empty()) throw InvalidArgument("lens has no surfaces");
  std::size_t stops = 0;
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    const SurfaceSpec& s = surfaces[k];
    const std::string where = "surface " + std::to_string(k);
    if (!(s.thickness >= 0.0)) throw InvalidArgument(where + ": negative thickness");
    if (s.kind == SurfaceKind::Sensor && k + 1 != surfaces.size())
      throw InvalidArgument(where + ": sensor must be the last surface");
    if (s.kind != SurfaceKind::Sensor && !(s.semi_diameter > 0.0))
      throw InvalidArgument(where + ": semi-diameter must be positive");
    if (s.kind != SurfaceKind::EvenAsphere) {
      for (double a : s.asphere)
        if (a != 0.0) throw InvalidArgument(where + ": asphere coefficients on a non-asphere");
    }
    if (s.kind == SurfaceKind::Stop) {
      ++stops;
      if (k != stop_index) throw InvalidArgument(where + ": stop index mismatch");
      if (!s.planar()) throw InvalidArgument(where + ": stop must be planar");
    }
    if (s.material && !(s.material->n > 1.0 && s.material->abbe > 0.0))
      throw InvalidArgument(where + ": material needs n > 1 and V > 0");
  }
  if (stops != 1) throw InvalidArgument("lens needs exactly one stop");
  if (surfaces.back().kind != SurfaceKind::Sensor) throw InvalidArgument("lens has no sensor surface");
  if (surfaces.size() < 3) throw InvalidArgument("lens has no refracting surface");
}

std::vector<double> LensPrescription::vertex_positions() const {
  std::vector<double> z(surfaces.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    z[k] = acc;
    acc += surfaces[k].thickness;
  }
  return z;
}

std::size_t LensPrescription::last_optical_index() const { return surfaces.size() - 2; }

LensPrescription parse_lens_prescription(std::string_view text) {
  LensPrescription lens;
  bool have_stop = false;
  bool have_sensor = false;
  bool have_fnumber = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (tok[0] == "FNUMBER") {
      if (tok.size() != 2) throw ParseError(line_no, "FNUMBER takes one value");
      lens.native_f_number = parse_number(tok[1], line_no, "f-number");
      if (!(lens.native_f_number > 0.0)) throw ParseError(line_no, "f-number must be positive");
      have_fnumber = true;
      continue;
    }
    if (have_sensor) throw ParseError(line_no, "surface after the sensor");
    if (tok.size() < 6 || tok.size() > 12)
      throw ParseError(line_no, "expected 6 to 12 columns, got " + std::to_string(tok.size()));

    SurfaceSpec s;
    if (tok[0] != "-") {
      const double idx = parse_number(tok[0], line_no, "index");
      if (idx != static_cast<double>(static_cast<long long>(idx)))
        throw ParseError(line_no, "non-integer index");
    }
    if (tok[1] == "S") {
      s.kind = SurfaceKind::Sphere;
    } else if (tok[1] == "A") {
      s.kind = SurfaceKind::EvenAsphere;
    } else if (tok[1] == "STOP") {
      s.kind = SurfaceKind::Stop;
    } else if (tok[1] == "SENSOR") {
      s.kind = SurfaceKind::Sensor;
    } else {
      throw ParseError(line_no, "unknown surface kind '" + std::string(tok[1]) + "'");
    }
    s.radius = parse_optional_number(tok[2], line_no, "radius");
    s.thickness = parse_optional_number(tok[3], line_no, "thickness");
    if (s.thickness < 0.0) throw ParseError(line_no, "negative thickness");
    if (tok[4] != "-") {
      const auto slash = tok[4].find('/');
      if (slash == std::string_view::npos) throw ParseError(line_no, "material must be n/V");
      Material m;
      m.n = parse_number(tok[4].substr(0, slash), line_no, "refractive index");
      m.abbe = parse_number(tok[4].substr(slash + 1), line_no, "Abbe number");
      if (!(m.n > 1.0) || !(m.abbe > 0.0)) throw ParseError(line_no, "material needs n > 1 and V > 0");
      s.material = m;
    }
    s.semi_diameter = 0.5 * parse_optional_number(tok[5], line_no, "diameter");
    if (tok.size() > 6) s.conic = parse_number(tok[6], line_no, "conic");
    for (std::size_t c = 7; c < tok.size(); ++c) s.asphere[c - 7] = parse_number(tok[c], line_no, "asphere coefficient");

    if (s.kind != SurfaceKind::EvenAsphere) {
      for (double a : s.asphere)
        if (a != 0.0) throw ParseError(line_no, "asphere coefficients on a non-asphere surface");
    }
    if (s.kind != SurfaceKind::Sensor && !(s.semi_diameter > 0.0))
      throw ParseError(line_no, "diameter must be positive");
    if (s.kind == SurfaceKind::Stop) {
      if (have_stop) throw ParseError(line_no, "second stop surface");
      if (!s.planar()) throw ParseError(line_no, "stop must be planar");
      have_stop = true;
      lens.stop_index = lens.surfaces.size();
    }
    if (s.kind == SurfaceKind::Sensor) have_sensor = true;
    lens.surfaces.push_back(s);
  }
  if (lens.surfaces.empty()) throw ParseError(line_no, "no surfaces");
  if (!have_stop) throw ParseError(line_no, "missing stop surface");
  if (!have_sensor) throw ParseError(line_no, "missing sensor surface");
  try {
    lens.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(line_no, e.what());
  }
  if (!have_fnumber) {
    // Stop diameter as designed defines the native aperture.
    lens.native_f_number = paraxial_efl(lens) / locate_entrance_pupil(lens).diameter;
  }
  return lens;
}

std::string serialize_lens_prescription(const LensPrescription& lens) {
  std::ostringstream out;
  out << "# index kind radius_mm thickness_mm n/V diameter_mm conic a4 a6 a8 a10 a12\n";
  out << "FNUMBER " << format_number(lens.native_f_number) << '\n';
  for (std::size_t k = 0; k < lens.surfaces.size(); ++k) {
    const SurfaceSpec& s = lens.surfaces[k];
    out << (k + 1) << ' ' << kind_token(s.kind) << ' ' << (s.planar() ? "-" : format_number(s.radius)) << ' '
        << format_number(s.thickness) << ' ';
    if (s.material)
      out << format_number(s.material->n) << '/' << format_number(s.material->abbe);
    else
      out << '-';
    out << ' ' << (s.semi_diameter > 0.0 ? format_number(2.0 * s.semi_diameter) : "-");
    out << ' ' << format_number(s.conic);
    for (double a : s.asphere) out << ' ' << format_number(a);
    out << '\n';
  }
  return out.str();
}

LensPrescription load_lens_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lens file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lens_prescription(buf.str());
}

}  // namespace dpsim
