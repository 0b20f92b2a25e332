#include "qpmshg/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qpmshg/cache.hpp"
#include "qpmshg/oracles.hpp"

namespace qpm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void log_op(const RunConfig& cfg, const char* op, double ms, const std::string& detail) {
  if (!cfg.verbose) return;
  std::fprintf(stderr, "[qpmshg] op=%s ms=%.1f %s\n", op, ms, detail.c_str());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Per-job temporary file renamed into place.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const ordered_json& j) { write_atomic(path, j.dump(1) + "\n"); }

std::string census_key(Polarization pol, double lambda_nm) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%g", polarization_name(pol), lambda_nm);
  return buf;
}

SolveCache make_cache(const RunConfig& cfg) {
  return SolveCache((fs::path(cfg.output_dir) / "cache").string(), cfg.cache_enabled);
}

ordered_json mode_record(const GuidedMode& m) {
  return ordered_json{{"polarization", polarization_name(m.pol)},
                      {"lambda_nm", m.lambda_nm},
                      {"m", m.label.m},
                      {"n", m.label.n},
                      {"label_flagged", m.label.flagged},
                      {"parity", m.parity > 0 ? "even" : (m.parity < 0 ? "odd" : "unknown")},
                      {"n_eff", m.n_eff},
                      {"beta_per_um", m.beta},
                      {"residual", m.residual}};
}

std::string raster_csv(const Raster& r) {
  std::string s = "x_um,y_um,intensity\n";
  for (int iy = 0; iy < r.ny; ++iy)
    for (int ix = 0; ix < r.nx; ++ix)
      s += fmt(r.x0 + ix * r.dx) + "," + fmt(r.y0 + iy * r.dy) + "," + fmt(r.at(ix, iy)) + "\n";
  return s;
}

int cmd_modes(const RunConfig& cfg) {
  Stopwatch sw;
  SolveCache cache = make_cache(cfg);
  ModeBank bank(cfg.device, &cache);
  const int threads = effective_threads(cfg);

  std::vector<std::pair<Polarization, double>> jobs;
  for (double l : cfg.modes.lambdas_nm)
    for (Polarization p : cfg.modes.polarizations) jobs.emplace_back(p, l);
  bank.prefetch(jobs, threads);

  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  const Mesh& mesh = bank.mesh();
  {
    AssembledProblem probe = assemble_waveguide(mesh, Polarization::TE, cfg.modes.lambdas_nm[0],
                                                cfg.device.dispersion, cfg.device.geometry,
                                                cfg.device.profile);
    out["diagnostics"] = ordered_json{
        {"mesh_nodes", mesh.node_count()},
        {"mesh_triangles", mesh.tri_count()},
        {"matrix_dimension", probe.A.rows()},
        {"matrix_nnz", probe.A.nonZeros()},
        {"assembly_asymmetry", probe.asymmetry},
        {"n_z_note", "n_z taken from the Sellmeier fit alone (no tabulated calibration)"}};
  }
  out["modes"] = ordered_json::array();
  for (const auto& [pol, lambda] : jobs)
    for (const GuidedMode& m : bank.modes(pol, lambda)) out["modes"].push_back(mode_record(m));
  write_json(fs::path(cfg.output_dir) / "modes.json", out);

  if (cfg.modes.render) {
    for (const auto& [pol, lambda] : jobs) {
      const auto& modes = bank.modes(pol, lambda);
      std::vector<const GuidedMode*> ptrs;
      for (const GuidedMode& m : modes) {
        const Raster r =
            render_intensity(m, mesh, cfg.modes.raster_nx, cfg.modes.raster_ny);
        char name[96];
        std::snprintf(name, sizeof(name), "profile_%s_%g_%d%d.csv", polarization_name(pol),
                      lambda, m.label.m, m.label.n);
        write_atomic(fs::path(cfg.output_dir) / name, raster_csv(r));
        ptrs.push_back(&m);
      }
      if (!ptrs.empty()) {
        const Raster white = render_intensity(ptrs, std::vector<double>(ptrs.size(), 1.0), mesh,
                                              cfg.modes.raster_nx, cfg.modes.raster_ny);
        char name[96];
        std::snprintf(name, sizeof(name), "profile_white_%s_%g.csv", polarization_name(pol),
                      lambda);
        write_atomic(fs::path(cfg.output_dir) / name, raster_csv(white));
      }
    }
  }
  log_op(cfg, "modes", sw.ms(), "jobs=" + std::to_string(jobs.size()));
  return 0;
}

int cmd_census(const RunConfig& cfg) {
  Stopwatch sw;
  ModeBank bank(cfg.device, nullptr);
  const Mesh& mesh = bank.mesh();
  ordered_json counts;
  for (double lambda : cfg.census.lambdas_nm)
    for (Polarization pol : {Polarization::TE, Polarization::TM}) {
      Stopwatch one;
      const int n = mode_census(mesh, pol, lambda, cfg.device.dispersion, cfg.device.geometry,
                                cfg.device.profile, cfg.device.solver);
      counts[census_key(pol, lambda)] = n;
      log_op(cfg, "census", one.ms(), census_key(pol, lambda));
    }
  ordered_json out{{"schema_version", kSchemaVersion}, {"counts", counts}};
  write_json(fs::path(cfg.output_dir) / "census.json", out);
  log_op(cfg, "census", sw.ms(), "");
  return 0;
}

int cmd_match(const RunConfig& cfg) {
  Stopwatch sw;
  SolveCache cache = make_cache(cfg);
  ModeBank bank(cfg.device, &cache);
  ordered_json records = ordered_json::array();
  for (ShgType type : cfg.match.types) {
    const PeriodResult pr = optimal_poling_period(type, cfg.match.lambda1_nm, bank);
    ordered_json rec{{"type", shg_type_name(type)},
                     {"device_harmonic", pr.device_harmonic},
                     {"qpm_possible", pr.qpm_possible},
                     {"optimal_period_um", pr.qpm_possible ? ordered_json(pr.period_um)
                                                           : ordered_json(nullptr)}};
    // Phase-matched SH wavelength in the configured device, via the harmonic
    // this type rides on; reported null when the root leaves the bracket.
    Polarization p1 =
        (type == ShgType::Type0) ? Polarization::TM : Polarization::TE;
    Polarization p2 = (type == ShgType::TypeII) ? Polarization::TM : p1;
    Polarization psh = (type == ShgType::TypeII) ? Polarization::TE : Polarization::TM;
    ProcessTriple tr = make_triple(type, ModeKey{psh, 0, 0}, ModeKey{p1, 0, 0},
                                   ModeKey{p2, 0, 0}, pr.device_harmonic);
    BetaTable table = build_tables_for_range(bank, {tr}, cfg.match.bracket_lo_nm,
                                             cfg.match.bracket_hi_nm,
                                             2.0 * cfg.match.bracket_lo_nm,
                                             2.0 * cfg.match.bracket_hi_nm, 5,
                                             effective_threads(cfg));
    const PhaseMatchResult pm = find_phase_matched_wavelength(
        tr, table, cfg.device.poling, cfg.match.bracket_lo_nm, cfg.match.bracket_hi_nm);
    rec["lambda2_star_nm"] =
        pm.found && !pm.degenerate ? ordered_json(pm.lambda2_nm) : ordered_json(nullptr);
    records.push_back(rec);
  }
  ordered_json out{{"schema_version", kSchemaVersion},
                   {"lambda1_nm", cfg.match.lambda1_nm},
                   {"poling_period_um", cfg.device.poling.period_um},
                   {"matches", records}};
  write_json(fs::path(cfg.output_dir) / "match.json", out);
  log_op(cfg, "match", sw.ms(), "");
  return 0;
}

std::string spectrum_csv(const Spectrum& spec) {
  std::string s = "lambda2_nm,intensity";
  for (const auto& t : spec.triples) s += "," + t.name();
  s += "\n";
  for (size_t g = 0; g < spec.lambda2_nm.size(); ++g) {
    s += fmt(spec.lambda2_nm[g]) + "," + fmt(spec.intensity[g]);
    for (size_t t = 0; t < spec.triples.size(); ++t) s += "," + fmt(spec.triple_intensity[t][g]);
    s += "\n";
  }
  return s;
}

int cmd_spectrum(const RunConfig& cfg) {
  Stopwatch sw;
  SolveCache cache = make_cache(cfg);
  ModeBank bank(cfg.device, &cache);
  SpectrumRunOptions opts = cfg.spectrum;
  opts.threads = effective_threads(cfg);
  PumpSpec pump = cfg.pump;
  if (cfg.pump_uniform) pump.amplitudes.clear();  // filled from the guided set
  std::vector<ProcessTriple> triples;
  const Spectrum ideal = device_spectrum(bank, pump, opts, &triples);
  const Spectrum smeared = broaden(ideal, opts.broaden_fwhm_nm);
  write_atomic(fs::path(cfg.output_dir) / "spectrum.csv", spectrum_csv(ideal));
  write_atomic(fs::path(cfg.output_dir) / "spectrum_broadened.csv", spectrum_csv(smeared));

  const PolarizationResponse resp = polarization_response(
      cfg.response.w_type0, cfg.response.w_type1, cfg.response.w_type2, cfg.response.samples);
  std::string rs = "alpha_deg,p_te_sh,p_tm_sh\n";
  for (size_t i = 0; i < resp.alpha_deg.size(); ++i)
    rs += fmt(resp.alpha_deg[i]) + "," + fmt(resp.p_te_sh[i]) + "," + fmt(resp.p_tm_sh[i]) + "\n";
  write_atomic(fs::path(cfg.output_dir) / "response.csv", rs);

  ordered_json meta{{"schema_version", kSchemaVersion},
                    {"pump",
                     {{"center_nm", pump.center_nm},
                      {"fwhm_nm", pump.fwhm_nm},
                      {"uniform_excitation", cfg.pump_uniform}}},
                    {"broaden_fwhm_nm", opts.broaden_fwhm_nm},
                    {"pump_truncation_warning", ideal.pump_truncation_warning}};
  meta["triples"] = ordered_json::array();
  for (const auto& t : triples) meta["triples"].push_back(t.name());
  write_json(fs::path(cfg.output_dir) / "spectrum.json", meta);
  log_op(cfg, "spectrum", sw.ms(), "triples=" + std::to_string(triples.size()));
  return 0;
}

int cmd_scan(const RunConfig& cfg) {
  Stopwatch sw;
  SolveCache cache = make_cache(cfg);
  ScanOptions opts;
  opts.samples = cfg.scan.samples;
  opts.band_points = cfg.scan.band_points;
  opts.threads = effective_threads(cfg);
  const std::vector<ProcessTriple> triples = fig3_triples(cfg.device.poling);
  const ScanResult res =
      sensitivity_scan(cfg.scan.param, cfg.scan.half_range, cfg.device, triples, opts, &cache);

  std::string s = "param,value,triple,dlambda2_nm\n";
  for (size_t t = 0; t < res.triples.size(); ++t)
    for (size_t k = 0; k < res.values.size(); ++k)
      s += std::string(scan_parameter_name(res.param)) + "," + fmt(res.values[k]) + "," +
           res.triples[t].name() + "," + fmt(res.shift_nm[t][k]) + "\n";
  write_atomic(fs::path(cfg.output_dir) / "scan.csv", s);

  ordered_json out{{"schema_version", kSchemaVersion},
                   {"param", scan_parameter_name(res.param)},
                   {"half_range", cfg.scan.half_range},
                   {"truncated", res.truncated}};
  out["triples"] = ordered_json::array();
  for (size_t t = 0; t < res.triples.size(); ++t) {
    double spread = 0;
    bool valid = true;
    for (double v : res.shift_nm[t])
      if (!std::isfinite(v)) valid = false;
    if (valid) spread = *std::max_element(res.shift_nm[t].begin(), res.shift_nm[t].end()) -
                        *std::min_element(res.shift_nm[t].begin(), res.shift_nm[t].end());
    out["triples"].push_back(ordered_json{{"triple", res.triples[t].name()},
                                          {"slope_nm_per_unit", res.slope_nm_per_unit[t]},
                                          {"spread_nm", valid ? ordered_json(spread)
                                                              : ordered_json(nullptr)}});
  }
  write_json(fs::path(cfg.output_dir) / "scan.json", out);
  log_op(cfg, "scan", sw.ms(), scan_parameter_name(res.param));
  return 0;
}

int cmd_table(const RunConfig& cfg) {
  Stopwatch sw;
  SolveCache cache = make_cache(cfg);
  ModeBank bank(cfg.device, &cache);
  TableOptions opts = cfg.table;
  opts.threads = effective_threads(cfg);
  const std::vector<ProcessRow> rows = process_table(bank, opts);

  std::string s = "triple,lambda2_nm,rel_power\n";
  for (const auto& r : rows)
    s += r.triple.name() + "," + fmt(r.lambda2_nm) + "," + fmt(r.rel_power) + "\n";
  write_atomic(fs::path(cfg.output_dir) / "table.csv", s);

  ordered_json out{{"schema_version", kSchemaVersion},
                   {"lambda1_nm", opts.bracket_lo_nm + opts.bracket_hi_nm},
                   {"pump_fwhm_nm", opts.pump_fwhm_nm},
                   {"pump_centering", opts.per_process_centering ? "per_process" : "fixed"}};
  out["rows"] = ordered_json::array();
  for (const auto& r : rows)
    out["rows"].push_back(ordered_json{{"triple", r.triple.name()},
                                       {"lambda2_nm", r.lambda2_nm},
                                       {"rel_power", r.rel_power},
                                       {"overlap_mag", r.overlap_mag}});
  write_json(fs::path(cfg.output_dir) / "table.json", out);
  log_op(cfg, "table", sw.ms(), "rows=" + std::to_string(rows.size()));
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  Stopwatch sw;
  const DeviceModel& dev = cfg.device;
  ordered_json out{{"schema_version", kSchemaVersion}};

  // Slab collapse of the depth profile for both polarizations at 800 nm.
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    const double lambda = 800.0;
    const Axis ax = transverse_axis(pol);
    const double n0 = dev.dispersion.substrate_index(ax, lambda);
    const double dn = dev.dispersion.surface_increment(ax, lambda);
    const double nz0 = dev.dispersion.substrate_index(Axis::Z, lambda);
    const auto n_of_y = [&](double y) {
      const double g = dev.profile == DepthProfile::Decay ? std::erfc(y / dev.geometry.depth_um)
                                                          : std::erfc(-y / dev.geometry.depth_um);
      return n0 + dn * g;
    };
    const auto q_of_y = [&](double y) {
      if (pol == Polarization::TE) return 1.0;
      const double ny = n_of_y(y);
      return (ny * ny) / (nz0 * nz0);
    };
    const double q_sub =
        pol == Polarization::TE ? 1.0 : (n0 * n0) / (nz0 * nz0);
    const auto stack = oracle::discretize_profile(n_of_y, q_of_y, 4.0 * dev.geometry.depth_um,
                                                  400, 1.0, 1.0, n0, q_sub);
    ordered_json neffs = ordered_json::array();
    for (int order = 0; order < 2; ++order) {
      const auto v = oracle::slab_effective_index(stack, lambda, order);
      neffs.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
    }
    out[std::string("slab_neff_") + polarization_name(pol)] = neffs;
  }

  // Poling Fourier coefficients, analytic vs direct DFT.
  ordered_json poling = ordered_json::array();
  for (int m : dev.poling.harmonic_orders)
    poling.push_back(ordered_json{
        {"harmonic", m},
        {"analytic", poling_harmonic_amplitude(dev.poling, m)},
        {"dft", oracle::dichotomic_fourier_magnitude(dev.poling.duty_ratio, m)}});
  out["poling_harmonics"] = poling;

  // Autoconvolution bandwidth relation for the configured pump.
  {
    const double w0 = omega_from_lambda_nm(cfg.pump.center_nm);
    const double fw = cfg.pump.fwhm_omega();
    const int n = 2001;
    std::vector<double> omega(n);
    std::vector<std::complex<double>> amp(n);
    for (int i = 0; i < n; ++i) {
      omega[i] = w0 - 3.0 * fw + 6.0 * fw * i / (n - 1);
      amp[i] = cfg.pump.envelope(omega[i]);
    }
    const auto ac = oracle::autoconvolution_spectrum(omega, amp);
    std::vector<double> lambda2(ac.omega2.size());
    for (size_t i = 0; i < ac.omega2.size(); ++i) lambda2[i] = lambda_nm_from_omega(ac.omega2[i]);
    std::reverse(lambda2.begin(), lambda2.end());
    std::vector<double> inten(ac.intensity.rbegin(), ac.intensity.rend());
    out["autoconvolution"] =
        ordered_json{{"pump_fwhm_nm", cfg.pump.fwhm_nm},
                     {"sh_fwhm_nm", oracle::fwhm_of_samples(lambda2, inten)},
                     {"expected_ratio", 2.0 * std::sqrt(2.0)}};
  }
  write_json(fs::path(cfg.output_dir) / "oracle.json", out);
  log_op(cfg, "oracle", sw.ms(), "");
  return 0;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "modes") return Command::Modes;
  if (name == "census") return Command::Census;
  if (name == "match") return Command::Match;
  if (name == "spectrum") return Command::Spectrum;
  if (name == "scan") return Command::Scan;
  if (name == "table") return Command::Table;
  if (name == "oracle") return Command::Oracle;
  throw ConfigError("unknown command: " + name);
}

int run_command(Command cmd, const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  switch (cmd) {
    case Command::Modes: return cmd_modes(cfg);
    case Command::Census: return cmd_census(cfg);
    case Command::Match: return cmd_match(cfg);
    case Command::Spectrum: return cmd_spectrum(cfg);
    case Command::Scan: return cmd_scan(cfg);
    case Command::Table: return cmd_table(cfg);
    case Command::Oracle: return cmd_oracle(cfg);
  }
  throw ConfigError("unhandled command");
}

}  // namespace qpm
