#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpmshg/scan.hpp"

namespace qpm {

// Parsed run configuration.  The structured text format is JSON with one
// section per module type; unknown keys are rejected so scan sweeps fail
// loudly on typos.  Defaults embody the studied device.
struct RunConfig {
  DeviceModel device;
  PumpSpec pump;
  bool pump_uniform = true;

  struct Modes {
    std::vector<double> lambdas_nm = {800.0, 400.0};
    std::vector<Polarization> polarizations = {Polarization::TE, Polarization::TM};
    bool render = true;
    int raster_nx = 181, raster_ny = 151;
  } modes;

  struct Census {
    std::vector<double> lambdas_nm = {800.0, 400.0};
  } census;

  struct Match {
    std::vector<ShgType> types = {ShgType::TypeII, ShgType::Type0, ShgType::TypeI};
    double lambda1_nm = 800.0;
    double bracket_lo_nm = 390.0, bracket_hi_nm = 410.0;
  } match;

  SpectrumRunOptions spectrum;
  bool spectrum_d_drift_check = false;

  struct Scan {
    ScanParameter param = ScanParameter::Period;
    double half_range = 0.1;
    int samples = 3;
    int band_points = 5;
  } scan;

  TableOptions table;

  struct Response {
    double w_type0 = 1.0, w_type1 = 1.0, w_type2 = 1.0;
    int samples = 181;
  } response;

  std::string output_dir = "out";
  bool cache_enabled = true;
  int threads = 0;  // 0: hardware default (capped)
  bool verbose = false;
};

// Throws ConfigError with a field path on unknown keys or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

int effective_threads(const RunConfig& cfg);

}  // namespace qpm
