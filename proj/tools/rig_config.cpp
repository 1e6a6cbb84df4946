// SPDX-License-Identifier: Apache-2.0
#include "rig_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dpsim/error.hpp"

namespace dpsim::cli {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InvalidArgument("missing '" + std::string(key) + "' in " + where);
  return j.at(key);
}

double number(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) throw InvalidArgument("'" + std::string(key) + "' must be a number");
  return v.get<double>();
}

long long integer(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer()) throw InvalidArgument("'" + std::string(key) + "' must be an integer");
  return v.get<long long>();
}

int positive_int(const json& j, const char* key, const std::string& where) {
  const long long v = integer(j, key, where);
  if (v < 1 || v > std::numeric_limits<int>::max()) throw InvalidArgument("'" + std::string(key) + "' out of range");
  return static_cast<int>(v);
}

}  // namespace

RigConfig parse_rig_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw InvalidArgument("rig config must be a JSON object");
  only_keys(root,
            {"lens_file", "sensor", "dp_pixel", "focus_m", "f_number", "depth_range_m", "n_rays", "ks", "seed"},
            "rig config");

  RigConfig cfg;
  const json& lens = field(root, "lens_file", "rig config");
  if (!lens.is_string()) throw InvalidArgument("'lens_file' must be a string");
  cfg.lens_file = std::filesystem::path(lens.get<std::string>());
  if (cfg.lens_file.is_relative()) cfg.lens_file = base_dir / cfg.lens_file;

  const json& sensor = field(root, "sensor", "rig config");
  if (!sensor.is_object()) throw InvalidArgument("'sensor' must be an object");
  only_keys(sensor, {"width_mm", "height_mm", "cols", "rows"}, "sensor");
  cfg.sensor.width = number(sensor, "width_mm", "sensor");
  cfg.sensor.height = number(sensor, "height_mm", "sensor");
  cfg.sensor.cols = positive_int(sensor, "cols", "sensor");
  cfg.sensor.rows = positive_int(sensor, "rows", "sensor");
  cfg.sensor.validate();

  const double ps = cfg.sensor.pitch();
  cfg.dp = DpPixelGeometry::calibrated_default(ps);
  if (root.contains("dp_pixel")) {
    const json& dp = root.at("dp_pixel");
    if (!dp.is_object()) throw InvalidArgument("'dp_pixel' must be an object");
    only_keys(dp, {"r_over_ps", "f_over_ps", "h_over_ps", "w_over_ps"}, "dp_pixel");
    cfg.dp = DpPixelGeometry::from_ratios(ps, number(dp, "r_over_ps", "dp_pixel"), number(dp, "f_over_ps", "dp_pixel"),
                                          number(dp, "h_over_ps", "dp_pixel"), number(dp, "w_over_ps", "dp_pixel"));
  }

  const json& focus = field(root, "focus_m", "rig config");
  if (focus.is_string() && (focus.get<std::string>() == "inf" || focus.get<std::string>() == "infinity")) {
    cfg.settings.focus_m = std::numeric_limits<double>::infinity();
  } else if (focus.is_number()) {
    cfg.settings.focus_m = focus.get<double>();
  } else {
    throw InvalidArgument("'focus_m' must be a number or \"inf\"");
  }
  cfg.settings.f_number = number(root, "f_number", "rig config");

  const json& range = field(root, "depth_range_m", "rig config");
  if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
    throw InvalidArgument("'depth_range_m' must be [d_min, d_max]");
  cfg.settings.d_min = range[0].get<double>();
  cfg.settings.d_max = range[1].get<double>();
  cfg.settings.n_rays = positive_int(root, "n_rays", "rig config");
  cfg.settings.ks = positive_int(root, "ks", "rig config");

  const json& seed = field(root, "seed", "rig config");
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<long long>() < 0))
    throw InvalidArgument("'seed' must be a non-negative integer");
  cfg.seed = seed.get<std::uint64_t>();

  try {
    cfg.lens = load_lens_file(cfg.lens_file);
  } catch (const ParseError& e) {
    throw InvalidArgument(cfg.lens_file.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw InvalidArgument(e.what());
  }
  try {
    (void)cfg.make_rig();
  } catch (const DomainError& e) {
    throw InvalidArgument(std::string("rig setup failed: ") + e.what());
  }
  return cfg;
}

RigConfig load_rig_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open rig config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rig_config(ss.str(), path.parent_path());
}

}  // namespace dpsim::cli
