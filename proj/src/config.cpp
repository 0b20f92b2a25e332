#include "qpmshg/config.hpp"

#include <fstream>
#include <set>
#include <thread>

namespace qpm {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + path + "." + key + "' in configuration");
}

double get_num(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("'" + path + "." + key + "' must be a number");
  return j[key].get<double>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError("'" + path + "." + key + "' must be a boolean");
  return j[key].get<bool>();
}

Polarization parse_pol(const std::string& s, const std::string& path) {
  if (s == "TE") return Polarization::TE;
  if (s == "TM") return Polarization::TM;
  throw ConfigError("'" + path + "': polarization must be TE or TM");
}

ShgType parse_type(const std::string& s, const std::string& path) {
  if (s == "0") return ShgType::Type0;
  if (s == "I") return ShgType::TypeI;
  if (s == "II") return ShgType::TypeII;
  throw ConfigError("'" + path + "': SHG type must be one of 0, I, II");
}

ScanParameter parse_param(const std::string& s, const std::string& path) {
  if (s == "width_um") return ScanParameter::Width;
  if (s == "depth_um") return ScanParameter::Depth;
  if (s == "period_um") return ScanParameter::Period;
  throw ConfigError("'" + path + "': scan parameter must be width_um, depth_um or period_um");
}

Axis parse_axis(const std::string& s, const std::string& path) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw ConfigError("'" + path + "': axis must be x, y or z");
}

void parse_geometry(const json& j, WaveguideGeometry& g) {
  require_keys(j, "geometry", {"width_um", "depth_um", "length_mm", "window"});
  g.width_um = get_num(j, "geometry", "width_um", g.width_um);
  g.depth_um = get_num(j, "geometry", "depth_um", g.depth_um);
  g.length_mm = get_num(j, "geometry", "length_mm", g.length_mm);
  if (j.contains("window")) {
    const json& w = j["window"];
    require_keys(w, "geometry.window", {"x_min", "x_max", "y_min", "y_max"});
    g.window.x_min = get_num(w, "geometry.window", "x_min", g.window.x_min);
    g.window.x_max = get_num(w, "geometry.window", "x_max", g.window.x_max);
    g.window.y_min = get_num(w, "geometry.window", "y_min", g.window.y_min);
    g.window.y_max = get_num(w, "geometry.window", "y_max", g.window.y_max);
  }
}

void parse_dispersion(const json& j, DeviceModel& device) {
  require_keys(j, "dispersion",
               {"erfc_profile", "delta_n", "sellmeier_override", "keep_pins"});
  if (j.contains("erfc_profile")) {
    const std::string s = j["erfc_profile"].get<std::string>();
    if (s == "decay")
      device.profile = DepthProfile::Decay;
    else if (s == "as_printed")
      device.profile = DepthProfile::AsPrinted;
    else
      throw ConfigError("'dispersion.erfc_profile' must be 'decay' or 'as_printed'");
  }
  const bool keep_pins = get_bool(j, "dispersion", "keep_pins", true);
  if (j.contains("sellmeier_override")) {
    for (const auto& [axis_name_str, coeffs] : j["sellmeier_override"].items()) {
      const Axis ax = parse_axis(axis_name_str, "dispersion.sellmeier_override");
      if (!coeffs.is_array() || coeffs.size() != 4)
        throw ConfigError("'dispersion.sellmeier_override." + axis_name_str +
                          "' must be [a, b, c, d]");
      device.dispersion.set_sellmeier(
          ax, SellmeierCoeffs{coeffs[0], coeffs[1], coeffs[2], coeffs[3]}, keep_pins);
    }
  }
  if (j.contains("delta_n")) {
    for (const auto& [axis_name_str, dn] : j["delta_n"].items()) {
      const Axis ax = parse_axis(axis_name_str, "dispersion.delta_n");
      require_keys(dn, "dispersion.delta_n." + axis_name_str, {"at_400", "at_800"});
      device.dispersion.set_increments(ax, dn.at("at_400").get<double>(),
                                       dn.at("at_800").get<double>());
    }
  }
}

void parse_poling(const json& j, PolingSpec& p) {
  require_keys(j, "poling", {"period_um", "duty_ratio", "harmonics"});
  p.period_um = get_num(j, "poling", "period_um", p.period_um);
  p.duty_ratio = get_num(j, "poling", "duty_ratio", p.duty_ratio);
  if (j.contains("harmonics")) {
    p.harmonic_orders.clear();
    for (const auto& h : j["harmonics"]) p.harmonic_orders.push_back(h.get<int>());
  }
  p.validate();
}

void parse_mesh(const json& j, ModeSolveOptions& s) {
  require_keys(j, "mesh", {"resolution_um", "grading"});
  s.resolution_um = get_num(j, "mesh", "resolution_um", s.resolution_um);
  s.grading = get_num(j, "mesh", "grading", s.grading);
}

void parse_solver(const json& j, ModeSolveOptions& s) {
  require_keys(j, "solver",
               {"tol", "seed", "max_modes", "max_subspace", "confinement_depth_um"});
  s.tol = get_num(j, "solver", "tol", s.tol);
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_modes")) s.max_modes = j["max_modes"].get<int>();
  if (j.contains("max_subspace")) s.max_subspace = j["max_subspace"].get<int>();
  s.confinement_depth_um = get_num(j, "solver", "confinement_depth_um", s.confinement_depth_um);
}

void parse_pump(const json& j, RunConfig& cfg) {
  require_keys(j, "pump", {"center_nm", "fwhm_nm", "shape", "filter_nm", "excitation"});
  cfg.pump.center_nm = get_num(j, "pump", "center_nm", cfg.pump.center_nm);
  cfg.pump.fwhm_nm = get_num(j, "pump", "fwhm_nm", cfg.pump.fwhm_nm);
  if (cfg.pump.fwhm_nm <= 0) throw ConfigError("'pump.fwhm_nm' must be positive");
  if (j.contains("shape") && j["shape"].get<std::string>() != "gaussian")
    throw ConfigError("'pump.shape': only 'gaussian' is implemented");
  if (j.contains("filter_nm")) {
    const auto& f = j["filter_nm"];
    if (!f.is_array() || f.size() != 2)
      throw ConfigError("'pump.filter_nm' must be [lo_nm, hi_nm]");
    cfg.pump.filter_nm = std::make_pair(f[0].get<double>(), f[1].get<double>());
  }
  if (j.contains("excitation")) {
    const auto& e = j["excitation"];
    if (e.is_string() && e.get<std::string>() == "uniform") {
      cfg.pump_uniform = true;
    } else if (e.is_array()) {
      cfg.pump_uniform = false;
      for (const auto& rec : e) {
        require_keys(rec, "pump.excitation[]", {"pol", "m", "n", "amplitude"});
        const ModeKey key{parse_pol(rec.at("pol").get<std::string>(), "pump.excitation"),
                          rec.at("m").get<int>(), rec.at("n").get<int>()};
        const auto& a = rec.at("amplitude");
        if (!a.is_array() || a.size() != 2)
          throw ConfigError("'pump.excitation[].amplitude' must be [re, im]");
        cfg.pump.amplitudes[key] = Complex(a[0].get<double>(), a[1].get<double>());
      }
    } else {
      throw ConfigError("'pump.excitation' must be 'uniform' or a mode list");
    }
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  require_keys(j, "", {"schema_version", "geometry", "dispersion", "poling", "mesh", "solver",
                       "pump", "modes", "census", "match", "spectrum", "scan", "table",
                       "response", "output", "cache", "threads", "verbose"});
  if (j.contains("geometry")) parse_geometry(j["geometry"], cfg.device.geometry);
  if (j.contains("dispersion")) parse_dispersion(j["dispersion"], cfg.device);
  if (j.contains("poling")) parse_poling(j["poling"], cfg.device.poling);
  if (j.contains("mesh")) parse_mesh(j["mesh"], cfg.device.solver);
  if (j.contains("solver")) parse_solver(j["solver"], cfg.device.solver);
  if (j.contains("pump")) parse_pump(j["pump"], cfg);
  cfg.device.geometry.validate();

  if (j.contains("modes")) {
    const json& m = j["modes"];
    require_keys(m, "modes", {"lambdas_nm", "polarizations", "render", "raster"});
    if (m.contains("lambdas_nm"))
      cfg.modes.lambdas_nm = m["lambdas_nm"].get<std::vector<double>>();
    if (m.contains("polarizations")) {
      cfg.modes.polarizations.clear();
      for (const auto& p : m["polarizations"])
        cfg.modes.polarizations.push_back(parse_pol(p.get<std::string>(), "modes.polarizations"));
    }
    cfg.modes.render = get_bool(m, "modes", "render", cfg.modes.render);
    if (m.contains("raster")) {
      cfg.modes.raster_nx = m["raster"][0].get<int>();
      cfg.modes.raster_ny = m["raster"][1].get<int>();
    }
  }
  if (j.contains("census")) {
    require_keys(j["census"], "census", {"lambdas_nm"});
    if (j["census"].contains("lambdas_nm"))
      cfg.census.lambdas_nm = j["census"]["lambdas_nm"].get<std::vector<double>>();
  }
  if (j.contains("match")) {
    const json& m = j["match"];
    require_keys(m, "match", {"types", "lambda1_nm", "bracket_nm"});
    if (m.contains("types")) {
      cfg.match.types.clear();
      for (const auto& t : m["types"])
        cfg.match.types.push_back(parse_type(t.get<std::string>(), "match.types"));
    }
    cfg.match.lambda1_nm = get_num(m, "match", "lambda1_nm", cfg.match.lambda1_nm);
    if (m.contains("bracket_nm")) {
      cfg.match.bracket_lo_nm = m["bracket_nm"][0].get<double>();
      cfg.match.bracket_hi_nm = m["bracket_nm"][1].get<double>();
    }
  }
  if (j.contains("spectrum")) {
    const json& s = j["spectrum"];
    require_keys(s, "spectrum",
                 {"lambda2_min_nm", "lambda2_max_nm", "points", "broaden_fwhm_nm", "band_points",
                  "d_threshold_rel", "max_sh_modes", "quadrature_points", "span_fwhm",
                  "flat_gamma", "d_drift_check"});
    cfg.spectrum.l2_min_nm = get_num(s, "spectrum", "lambda2_min_nm", cfg.spectrum.l2_min_nm);
    cfg.spectrum.l2_max_nm = get_num(s, "spectrum", "lambda2_max_nm", cfg.spectrum.l2_max_nm);
    if (s.contains("points")) cfg.spectrum.points = s["points"].get<int>();
    cfg.spectrum.broaden_fwhm_nm =
        get_num(s, "spectrum", "broaden_fwhm_nm", cfg.spectrum.broaden_fwhm_nm);
    if (s.contains("band_points")) cfg.spectrum.band_points = s["band_points"].get<int>();
    cfg.spectrum.d_threshold_rel =
        get_num(s, "spectrum", "d_threshold_rel", cfg.spectrum.d_threshold_rel);
    if (s.contains("max_sh_modes")) cfg.spectrum.max_sh_modes = s["max_sh_modes"].get<int>();
    if (s.contains("quadrature_points"))
      cfg.spectrum.engine.quadrature_points = s["quadrature_points"].get<int>();
    cfg.spectrum.engine.span_fwhm =
        get_num(s, "spectrum", "span_fwhm", cfg.spectrum.engine.span_fwhm);
    cfg.spectrum.engine.flat_gamma = get_bool(s, "spectrum", "flat_gamma", false);
    cfg.spectrum_d_drift_check = get_bool(s, "spectrum", "d_drift_check", false);
  }
  if (j.contains("scan")) {
    const json& s = j["scan"];
    require_keys(s, "scan", {"param", "half_range", "samples", "band_points"});
    if (s.contains("param")) cfg.scan.param = parse_param(s["param"].get<std::string>(), "scan");
    cfg.scan.half_range = get_num(s, "scan", "half_range", cfg.scan.half_range);
    if (s.contains("samples")) cfg.scan.samples = s["samples"].get<int>();
    if (s.contains("band_points")) cfg.scan.band_points = s["band_points"].get<int>();
  }
  if (j.contains("table")) {
    const json& t = j["table"];
    require_keys(t, "table",
                 {"bracket_nm", "d_threshold_rel", "max_sh_modes", "band_points", "pump_fwhm_nm",
                  "pump_centering", "local_span_nm", "local_points", "quadrature_points"});
    if (t.contains("bracket_nm")) {
      cfg.table.bracket_lo_nm = t["bracket_nm"][0].get<double>();
      cfg.table.bracket_hi_nm = t["bracket_nm"][1].get<double>();
    }
    cfg.table.d_threshold_rel = get_num(t, "table", "d_threshold_rel", cfg.table.d_threshold_rel);
    if (t.contains("max_sh_modes")) cfg.table.max_sh_modes = t["max_sh_modes"].get<int>();
    if (t.contains("band_points")) cfg.table.band_points = t["band_points"].get<int>();
    cfg.table.pump_fwhm_nm = get_num(t, "table", "pump_fwhm_nm", cfg.table.pump_fwhm_nm);
    if (t.contains("pump_centering")) {
      const std::string c = t["pump_centering"].get<std::string>();
      if (c == "per_process")
        cfg.table.per_process_centering = true;
      else if (c == "fixed")
        cfg.table.per_process_centering = false;
      else
        throw ConfigError("'table.pump_centering' must be 'per_process' or 'fixed'");
    }
    cfg.table.local_span_nm = get_num(t, "table", "local_span_nm", cfg.table.local_span_nm);
    if (t.contains("local_points")) cfg.table.local_points = t["local_points"].get<int>();
    if (t.contains("quadrature_points"))
      cfg.table.quadrature_points = t["quadrature_points"].get<int>();
  }
  if (j.contains("response")) {
    const json& r = j["response"];
    require_keys(r, "response", {"w_type0", "w_type1", "w_type2", "samples"});
    cfg.response.w_type0 = get_num(r, "response", "w_type0", 1.0);
    cfg.response.w_type1 = get_num(r, "response", "w_type1", 1.0);
    cfg.response.w_type2 = get_num(r, "response", "w_type2", 1.0);
    if (r.contains("samples")) cfg.response.samples = r["samples"].get<int>();
  }
  if (j.contains("output")) {
    require_keys(j["output"], "output", {"dir"});
    if (j["output"].contains("dir")) cfg.output_dir = j["output"]["dir"].get<std::string>();
  }
  cfg.cache_enabled = get_bool(j, "", "cache", cfg.cache_enabled);
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  cfg.verbose = get_bool(j, "", "verbose", cfg.verbose);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

int effective_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<unsigned>(hw == 0 ? 2 : hw, 8));
}

}  // namespace qpm
