#include "qpmshg/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "qpmshg/cache.hpp"

namespace qpm {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

std::string DeviceModel::fingerprint() const {
  char buf[512];
  std::string s;
  std::snprintf(buf, sizeof(buf), "geom:%.9g,%.9g,%.9g;win:%.9g,%.9g,%.9g,%.9g;", geometry.width_um,
                geometry.depth_um, geometry.length_mm, geometry.window.x_min,
                geometry.window.x_max, geometry.window.y_min, geometry.window.y_max);
  s += buf;
  // Dispersion enters through samples; overrides change them.
  for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
    for (double lnm : {400.0, 600.0, 800.0, 1000.0}) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g;", dispersion.substrate_index(ax, lnm),
                    dispersion.surface_increment(ax, lnm));
      s += buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "prof:%d;mesh:%.9g,%.9g;solver:%.3g,%llu,%.9g;",
                static_cast<int>(profile), solver.resolution_um, solver.grading, solver.tol,
                static_cast<unsigned long long>(solver.seed), solver.confinement_depth_um);
  s += buf;
  return s;
}

ModeBank::ModeBank(const DeviceModel& device, SolveCache* cache)
    : device_(device), cache_(cache) {
  device_.geometry.validate();
}

const Mesh& ModeBank::mesh() {
  std::lock_guard<std::mutex> lock(mu_);
  if (!mesh_)
    mesh_ = std::make_unique<Mesh>(
        build_mesh(device_.geometry, device_.solver.resolution_um, device_.solver.grading));
  return *mesh_;
}

const std::vector<GuidedMode>& ModeBank::modes(Polarization pol, double lambda_nm) {
  const auto key = std::make_pair(static_cast<int>(pol), lambda_key(lambda_nm));
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const Mesh& m = mesh();
  std::vector<GuidedMode> solved = solve_guided_modes(m, pol, lambda_nm, device_.dispersion,
                                                      device_.geometry, device_.profile,
                                                      device_.solver);
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = memo_.emplace(key, std::move(solved));
  if (inserted && cache_ && cache_->enabled()) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& md : it->second)
      records.push_back({{"m", md.label.m},
                         {"n", md.label.n},
                         {"flagged", md.label.flagged},
                         {"parity", md.parity},
                         {"beta", md.beta},
                         {"n_eff", md.n_eff},
                         {"residual", md.residual}});
    nlohmann::json entry = {{"schema_version", 1},
                            {"lambda_nm", lambda_nm},
                            {"polarization", polarization_name(pol)},
                            {"modes", records}};
    cache_->put(beta_cache_key(pol, lambda_nm), entry);
  }
  return it->second;
}

std::string ModeBank::beta_cache_key(Polarization pol, double lambda_nm) const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "betas:%s:%lld;", polarization_name(pol),
                lambda_key(lambda_nm));
  return SolveCache::key_of(device_.fingerprint() + buf);
}

const GuidedMode& ModeBank::mode(const ModeKey& key, double lambda_nm) {
  for (const GuidedMode& m : modes(key.pol, lambda_nm))
    if (m.label.m == key.m && m.label.n == key.n) return m;
  throw NumericalError("mode " + key.str() + " not guided at " + std::to_string(lambda_nm) +
                       " nm");
}

std::vector<ModeKey> ModeBank::guided_keys(Polarization pol, double lambda_nm) {
  std::vector<ModeKey> keys;
  for (const GuidedMode& m : modes(pol, lambda_nm))
    keys.push_back(ModeKey{pol, m.label.m, m.label.n});
  return keys;
}

std::vector<ModeBank::BetaRecord> ModeBank::betas(Polarization pol, double lambda_nm) {
  {
    // Serve from the persistent cache when the full solve is not in memory.
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = memo_.find(std::make_pair(static_cast<int>(pol), lambda_key(lambda_nm)));
    if (it == memo_.end() && cache_ && cache_->enabled()) {
      if (auto entry = cache_->get(beta_cache_key(pol, lambda_nm))) {
        std::vector<BetaRecord> out;
        for (const auto& r : (*entry)["modes"])
          out.push_back({ModeKey{pol, r["m"], r["n"]}, r["beta"].get<double>() * r["beta"].get<double>(),
                         r["n_eff"], r["residual"], r["parity"], r["flagged"]});
        return out;
      }
    }
  }
  std::vector<BetaRecord> out;
  for (const GuidedMode& m : modes(pol, lambda_nm))
    out.push_back({ModeKey{pol, m.label.m, m.label.n}, m.beta * m.beta, m.n_eff, m.residual,
                   m.parity, m.label.flagged});
  return out;
}

void ModeBank::prefetch(const std::vector<std::pair<Polarization, double>>& jobs, int threads) {
  mesh();  // built once up front; shared by the workers
  run_parallel(threads, static_cast<int>(jobs.size()),
               [&](int i) { modes(jobs[i].first, jobs[i].second); });
}

BetaTable build_beta_table(ModeBank& bank, const std::vector<ModeKey>& keys, double lambda_min_nm,
                           double lambda_max_nm, int points, int threads) {
  return build_beta_table_band(bank, keys, lambda_min_nm, lambda_max_nm, points, 0, threads);
}

BetaTable build_beta_table_band(ModeBank& bank, const std::vector<ModeKey>& keys,
                                double lambda_min_nm, double lambda_max_nm, int points, int band,
                                int threads) {
  BetaTable table;
  append_beta_band(table, bank, keys, lambda_min_nm, lambda_max_nm, points, band, threads);
  table.fit();
  return table;
}

void append_beta_band(BetaTable& table, ModeBank& bank, const std::vector<ModeKey>& keys,
                      double lambda_min_nm, double lambda_max_nm, int points, int band,
                      int threads) {
  if (keys.empty()) return;
  const std::vector<double> lambdas = linspace(lambda_min_nm, lambda_max_nm, points);
  std::set<Polarization> pols;
  for (const ModeKey& k : keys) pols.insert(k.pol);
  std::vector<std::pair<Polarization, double>> jobs;
  for (Polarization p : pols)
    for (double l : lambdas) jobs.emplace_back(p, l);
  bank.prefetch(jobs, threads);
  for (double l : lambdas) {
    const double omega = omega_from_lambda_nm(l);
    for (const ModeKey& k : keys) {
      const GuidedMode& m = bank.mode(k, l);  // throws if the mode is lost
      table.add_sample(k, omega, m.beta, band);
    }
  }
}

std::pair<double, double> pump_support_nm(const PumpSpec& pump) {
  // Amplitude cutoff at 1e-14: exp(-x^2 / 4 sigma^2) with sigma from the
  // intensity FWHM reaches it ~4.83 FWHM from the center.
  const double w0 = omega_from_lambda_nm(pump.center_nm);
  const double half = 4.9 * pump.fwhm_omega();
  double lo = lambda_nm_from_omega(w0 + half);
  double hi = lambda_nm_from_omega(w0 - half);
  if (pump.filter_nm) {
    lo = std::max(lo, pump.filter_nm->first);
    hi = std::min(hi, pump.filter_nm->second);
  }
  return {lo, hi};
}

BetaTable build_tables_for_range(ModeBank& bank, const std::vector<ProcessTriple>& triples,
                                 double l2_min_nm, double l2_max_nm, double pump_min_nm,
                                 double pump_max_nm, int points, int threads) {
  std::set<ModeKey> sh_keys, pump_keys;
  for (const auto& t : triples) {
    sh_keys.insert(t.sh);
    pump_keys.insert(t.pump1);
    pump_keys.insert(t.pump2);
  }
  BetaTable table;
  append_beta_band(table, bank, {sh_keys.begin(), sh_keys.end()}, l2_min_nm, l2_max_nm, points, 1,
                   threads);
  append_beta_band(table, bank, {pump_keys.begin(), pump_keys.end()}, pump_min_nm, pump_max_nm,
                   points, 2, threads);
  table.fit();
  return table;
}

double degenerate_mismatch(const ProcessTriple& triple, const BetaTable& betas,
                           const PolingSpec& poling, double lambda2_nm) {
  const double w2 = omega_from_lambda_nm(lambda2_nm);
  return betas.beta(triple.sh, w2) - betas.beta(triple.pump1, 0.5 * w2) -
         betas.beta(triple.pump2, 0.5 * w2) - 2.0 * kPi * triple.harmonic / poling.period_um;
}

PhaseMatchResult find_phase_matched_wavelength(const ProcessTriple& triple,
                                               const BetaTable& betas, const PolingSpec& poling,
                                               double bracket_lo_nm, double bracket_hi_nm) {
  PhaseMatchResult res;
  const int ngrid = 65;
  const std::vector<double> grid = linspace(bracket_lo_nm, bracket_hi_nm, ngrid);
  std::vector<double> f(ngrid);
  double fmax = 0;
  for (int i = 0; i < ngrid; ++i) {
    f[i] = degenerate_mismatch(triple, betas, poling, grid[i]);
    fmax = std::max(fmax, std::fabs(f[i]));
  }
  if (fmax < 1e-9) {  // dispersionless: every wavelength matches
    res.degenerate = true;
    res.found = true;
    res.lambda2_nm = 0.5 * (bracket_lo_nm + bracket_hi_nm);
    res.mismatch = fmax;
    return res;
  }
  for (int i = 0; i + 1 < ngrid; ++i) {
    if (f[i] == 0.0) {
      res.found = true;
      res.lambda2_nm = grid[i];
      res.mismatch = 0;
      return res;
    }
    if (f[i] * f[i + 1] < 0) {
      double a = grid[i], b = grid[i + 1], fa = f[i];
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = degenerate_mismatch(triple, betas, poling, mid);
        if (std::fabs(fm) < 1e-6 || b - a < 1e-9) {
          res.found = true;
          res.lambda2_nm = mid;
          res.mismatch = std::fabs(fm);
          return res;
        }
        if (fa * fm < 0)
          b = mid;
        else {
          a = mid;
          fa = fm;
        }
      }
    }
  }
  return res;  // found = false: no sign change in bracket
}

int designated_harmonic(ShgType type) {
  switch (type) {
    case ShgType::TypeII: return 1;
    case ShgType::Type0: return 2;
    case ShgType::TypeI: return 3;
  }
  return 1;
}

PeriodResult optimal_poling_period(ShgType type, double lambda1_nm, ModeBank& bank) {
  PeriodResult res;
  res.type = type;
  res.device_harmonic = designated_harmonic(type);
  Polarization p1, p2, psh;
  switch (type) {
    case ShgType::Type0: p1 = p2 = Polarization::TM; psh = Polarization::TM; break;
    case ShgType::TypeI: p1 = p2 = Polarization::TE; psh = Polarization::TM; break;
    case ShgType::TypeII: p1 = Polarization::TE; p2 = Polarization::TM; psh = Polarization::TE; break;
  }
  const GuidedMode& sh = bank.mode(ModeKey{psh, 0, 0}, 0.5 * lambda1_nm);
  const GuidedMode& m1 = bank.mode(ModeKey{p1, 0, 0}, lambda1_nm);
  const GuidedMode& m2 = bank.mode(ModeKey{p2, 0, 0}, lambda1_nm);
  const double dbeta0 = sh.beta - m1.beta - m2.beta;
  if (dbeta0 <= 0) {
    res.qpm_possible = false;  // no momentum deficit for the grating to supply
    return res;
  }
  res.qpm_possible = true;
  res.period_um = 2.0 * kPi / dbeta0;
  return res;
}

const char* scan_parameter_name(ScanParameter p) {
  switch (p) {
    case ScanParameter::Width: return "width_um";
    case ScanParameter::Depth: return "depth_um";
    case ScanParameter::Period: return "period_um";
  }
  return "?";
}

std::vector<ProcessTriple> fig3_triples(const PolingSpec& poling) {
  (void)poling;
  const auto te = [](int m, int n) { return ModeKey{Polarization::TE, m, n}; };
  const auto tm = [](int m, int n) { return ModeKey{Polarization::TM, m, n}; };
  return {
      make_triple(ShgType::TypeII, te(0, 0), te(0, 0), tm(0, 0), 1),
      make_triple(ShgType::TypeII, te(0, 1), te(0, 0), tm(0, 0), 1),
      make_triple(ShgType::TypeII, te(0, 0), te(0, 1), tm(0, 1), 1),
      make_triple(ShgType::TypeII, te(0, 1), te(0, 1), tm(0, 1), 1),
      make_triple(ShgType::TypeII, te(1, 0), te(1, 0), tm(0, 0), 1),
  };
}

ScanResult sensitivity_scan(ScanParameter param, double half_range, const DeviceModel& nominal,
                            const std::vector<ProcessTriple>& triples, const ScanOptions& opts,
                            SolveCache* cache) {
  ScanResult result;
  result.param = param;
  result.triples = triples;
  double center = 0;
  switch (param) {
    case ScanParameter::Width: center = nominal.geometry.width_um; break;
    case ScanParameter::Depth: center = nominal.geometry.depth_um; break;
    case ScanParameter::Period: center = nominal.poling.period_um; break;
  }
  const int ns = opts.samples | 1;  // odd: keep the nominal point on the grid
  result.values = linspace(center - half_range, center + half_range, ns);
  result.lambda2_nm.assign(triples.size(), std::vector<double>(ns, 0.0));
  result.shift_nm.assign(triples.size(), std::vector<double>(ns, 0.0));
  result.slope_nm_per_unit.assign(triples.size(), 0.0);

  const auto solve_sample = [&](const PolingSpec& poling, ModeBank& bank, int s) {
    BetaTable table = build_tables_for_range(bank, triples, opts.bracket_lo_nm,
                                             opts.bracket_hi_nm, 2.0 * opts.bracket_lo_nm,
                                             2.0 * opts.bracket_hi_nm, opts.band_points,
                                             opts.threads);
    for (size_t t = 0; t < triples.size(); ++t) {
      const PhaseMatchResult pm = find_phase_matched_wavelength(
          triples[t], table, poling, opts.bracket_lo_nm, opts.bracket_hi_nm);
      if (pm.found && !pm.degenerate) {
        result.lambda2_nm[t][s] = pm.lambda2_nm;
      } else {
        result.lambda2_nm[t][s] = std::nan("");
        result.truncated = true;
      }
    }
  };

  if (param == ScanParameter::Period) {
    ModeBank bank(nominal, cache);
    BetaTable table = build_tables_for_range(bank, triples, opts.bracket_lo_nm,
                                             opts.bracket_hi_nm, 2.0 * opts.bracket_lo_nm,
                                             2.0 * opts.bracket_hi_nm, opts.band_points,
                                             opts.threads);
    for (int s = 0; s < ns; ++s) {
      PolingSpec poling = nominal.poling;
      poling.period_um = result.values[s];
      for (size_t t = 0; t < triples.size(); ++t) {
        const PhaseMatchResult pm = find_phase_matched_wavelength(
            triples[t], table, poling, opts.bracket_lo_nm, opts.bracket_hi_nm);
        if (pm.found && !pm.degenerate)
          result.lambda2_nm[t][s] = pm.lambda2_nm;
        else {
          result.lambda2_nm[t][s] = std::nan("");
          result.truncated = true;
        }
      }
    }
  } else {
    for (int s = 0; s < ns; ++s) {
      DeviceModel device = nominal;
      if (param == ScanParameter::Width)
        device.geometry.width_um = result.values[s];
      else
        device.geometry.depth_um = result.values[s];
      ModeBank bank(device, cache);
      solve_sample(device.poling, bank, s);
    }
  }

  const int mid = ns / 2;
  for (size_t t = 0; t < triples.size(); ++t) {
    const double nominal_l2 = result.lambda2_nm[t][mid];
    for (int s = 0; s < ns; ++s) result.shift_nm[t][s] = result.lambda2_nm[t][s] - nominal_l2;
    if (ns >= 3 && std::isfinite(result.lambda2_nm[t][mid - 1]) &&
        std::isfinite(result.lambda2_nm[t][mid + 1]))
      result.slope_nm_per_unit[t] = (result.lambda2_nm[t][mid + 1] - result.lambda2_nm[t][mid - 1]) /
                                    (result.values[mid + 1] - result.values[mid - 1]);
  }
  return result;
}

namespace {

// All type II triples with |D| above the relative threshold.
struct EnumeratedTriples {
  std::vector<ProcessTriple> triples;
  std::vector<Complex> overlaps;
};

EnumeratedTriples enumerate_type2(ModeBank& bank, double lambda1_nm, double d_threshold_rel,
                                  int max_sh_modes) {
  EnumeratedTriples out;
  const double lambda2_nm = 0.5 * lambda1_nm;
  const DeviceModel& dev = bank.device();
  const double d_m1 = poling_harmonic_amplitude(dev.poling, 1);
  const auto te_keys = bank.guided_keys(Polarization::TE, lambda1_nm);
  const auto tm_keys = bank.guided_keys(Polarization::TM, lambda1_nm);
  auto sh_keys = bank.guided_keys(Polarization::TE, lambda2_nm);
  if (static_cast<int>(sh_keys.size()) > max_sh_modes) sh_keys.resize(max_sh_modes);

  std::vector<ProcessTriple> all;
  std::vector<Complex> d_all;
  double d_max = 0;
  for (const ModeKey& sh : sh_keys)
    for (const ModeKey& p1 : te_keys)
      for (const ModeKey& p2 : tm_keys) {
        ProcessTriple tr = make_triple(ShgType::TypeII, sh, p1, p2, 1);
        const Complex d = overlap_coefficient(bank.mode(sh, lambda2_nm),
                                              bank.mode(p1, lambda1_nm),
                                              bank.mode(p2, lambda1_nm), ShgType::TypeII,
                                              dev.tensor, d_m1, bank.mesh());
        all.push_back(tr);
        d_all.push_back(d);
        d_max = std::max(d_max, std::abs(d));
      }
  for (size_t i = 0; i < all.size(); ++i)
    if (std::abs(d_all[i]) >= d_threshold_rel * d_max) {
      out.triples.push_back(all[i]);
      out.overlaps.push_back(d_all[i]);
    }
  return out;
}

}  // namespace

std::vector<ProcessRow> process_table(ModeBank& bank, const TableOptions& opts) {
  const double lambda1_nm = opts.bracket_lo_nm + opts.bracket_hi_nm;  // 2 x bracket center
  EnumeratedTriples en =
      enumerate_type2(bank, lambda1_nm, opts.d_threshold_rel, opts.max_sh_modes);

  // One beta table covers the search bracket and every per-process pump
  // placement (centers over twice the bracket, each with its envelope span).
  const double pump_lo = 2.0 * opts.bracket_lo_nm - 6.0 * opts.pump_fwhm_nm;
  const double pump_hi = 2.0 * opts.bracket_hi_nm + 6.0 * opts.pump_fwhm_nm;
  BetaTable table = build_tables_for_range(bank, en.triples, opts.bracket_lo_nm,
                                           opts.bracket_hi_nm, pump_lo, pump_hi,
                                           opts.band_points, opts.threads);

  // Uniform equal-power excitation over every guided pump mode.
  std::vector<ModeKey> guided = bank.guided_keys(Polarization::TE, lambda1_nm);
  const auto tm = bank.guided_keys(Polarization::TM, lambda1_nm);
  guided.insert(guided.end(), tm.begin(), tm.end());

  std::vector<ProcessRow> rows;
  for (size_t i = 0; i < en.triples.size(); ++i) {
    const PhaseMatchResult pm = find_phase_matched_wavelength(
        en.triples[i], table, bank.device().poling, opts.bracket_lo_nm, opts.bracket_hi_nm);
    if (!pm.found || pm.degenerate) continue;
    ProcessRow row;
    row.triple = en.triples[i];
    row.lambda2_nm = pm.lambda2_nm;
    row.overlap_mag = std::abs(en.overlaps[i]);

    PumpSpec pump;
    pump.fwhm_nm = opts.pump_fwhm_nm;
    pump.center_nm = opts.per_process_centering ? 2.0 * pm.lambda2_nm : lambda1_nm;
    pump.set_uniform_excitation(guided);

    std::vector<double> grid(opts.local_points);
    for (int g = 0; g < opts.local_points; ++g)
      grid[g] = pm.lambda2_nm - opts.local_span_nm +
                2.0 * opts.local_span_nm * g / (opts.local_points - 1);
    SpectrumOptions engine;
    engine.quadrature_points = opts.quadrature_points;
    const Spectrum spec = sh_spectrum(pump, {en.triples[i]}, {en.overlaps[i]}, table,
                                      bank.device().poling, bank.device().geometry.length_um(),
                                      grid, engine);
    row.abs_peak = *std::max_element(spec.intensity.begin(), spec.intensity.end());
    rows.push_back(row);
  }
  double peak = 0;
  for (const auto& r : rows) peak = std::max(peak, r.abs_peak);
  for (auto& r : rows) r.rel_power = peak > 0 ? r.abs_peak / peak : 0.0;
  std::sort(rows.begin(), rows.end(),
            [](const ProcessRow& a, const ProcessRow& b) { return a.rel_power > b.rel_power; });
  return rows;
}

Spectrum device_spectrum(ModeBank& bank, const PumpSpec& pump_in, const SpectrumRunOptions& opts,
                         std::vector<ProcessTriple>* triples_out) {
  const double lambda1_nm = pump_in.center_nm;
  EnumeratedTriples en =
      enumerate_type2(bank, lambda1_nm, opts.d_threshold_rel, opts.max_sh_modes);
  const auto support = pump_support_nm(pump_in);
  BetaTable table = build_tables_for_range(bank, en.triples, opts.l2_min_nm, opts.l2_max_nm,
                                           support.first, support.second, opts.band_points,
                                           opts.threads);
  PumpSpec pump = pump_in;
  if (pump.amplitudes.empty()) {
    std::vector<ModeKey> guided = bank.guided_keys(Polarization::TE, lambda1_nm);
    const auto tm = bank.guided_keys(Polarization::TM, lambda1_nm);
    guided.insert(guided.end(), tm.begin(), tm.end());
    pump.set_uniform_excitation(guided);
  }
  std::vector<double> grid = linspace(opts.l2_min_nm, opts.l2_max_nm, opts.points);
  if (triples_out) *triples_out = en.triples;
  return sh_spectrum(pump, en.triples, en.overlaps, table, bank.device().poling,
                     bank.device().geometry.length_um(), grid, opts.engine);
}

GeometrySpectra spectrum_vs_geometry(ScanParameter param, const std::vector<double>& values,
                                     const DeviceModel& nominal, const PumpSpec& pump,
                                     const SpectrumRunOptions& opts, SolveCache* cache) {
  if (param == ScanParameter::Period)
    throw ConfigError("spectrum_vs_geometry varies geometry; use the period scan for poling");
  GeometrySpectra out;
  out.values = values;
  for (double v : values) {
    DeviceModel device = nominal;
    if (param == ScanParameter::Width)
      device.geometry.width_um = v;
    else
      device.geometry.depth_um = v;
    ModeBank bank(device, cache);
    Spectrum ideal = device_spectrum(bank, pump, opts);
    out.broadened.push_back(broaden(ideal, opts.broaden_fwhm_nm));
    out.ideal.push_back(std::move(ideal));
  }
  return out;
}

double tuning_curve_fwhm(const ProcessTriple& triple, const BetaTable& betas,
                         const PolingSpec& poling, double lambda2_star_nm, double length_um) {
  const int n = 1201;
  std::vector<double> x(n), y(n);
  const double span = 0.35;  // nm, several sinc lobes at 10.5 mm
  for (int i = 0; i < n; ++i) {
    x[i] = lambda2_star_nm - span + 2 * span * i / (n - 1);
    const double db = degenerate_mismatch(triple, betas, poling, x[i]);
    y[i] = std::norm(coupling_gamma(db, length_um));
  }
  // local half-maximum measurement
  size_t ip = 0;
  for (size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[ip]) ip = i;
  const double half = 0.5 * y[ip];
  double left = x.front(), right = x.back();
  for (size_t i = ip; i > 0; --i)
    if (y[i - 1] < half && y[i] >= half) {
      left = x[i - 1] + (x[i] - x[i - 1]) * (half - y[i - 1]) / (y[i] - y[i - 1]);
      break;
    }
  for (size_t i = ip; i + 1 < y.size(); ++i)
    if (y[i] >= half && y[i + 1] < half) {
      right = x[i] + (x[i + 1] - x[i]) * (half - y[i]) / (y[i] - y[i + 1]);
      break;
    }
  return right - left;
}

}  // namespace qpm
