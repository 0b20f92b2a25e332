#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>

#include "qpmshg/shg.hpp"

namespace qpm {

class SolveCache;

// Everything needed to model one device: geometry, materials, poling, solver
// settings.  Value type; scans copy and perturb it.
struct DeviceModel {
  WaveguideGeometry geometry;
  DispersionModel dispersion = DispersionModel::ktp_default();
  PolingSpec poling;
  NonlinearTensor tensor;
  DepthProfile profile = DepthProfile::Decay;
  ModeSolveOptions solver;

  // Canonical string of every physics-relevant parameter (cache keying).
  std::string fingerprint() const;
};

// Memoizing mode solver for one device.  Full solves are kept in memory;
// beta-only queries may be served from the persistent cache.
class ModeBank {
 public:
  explicit ModeBank(const DeviceModel& device, SolveCache* cache = nullptr);

  const DeviceModel& device() const { return device_; }
  const Mesh& mesh();

  const std::vector<GuidedMode>& modes(Polarization pol, double lambda_nm);
  const GuidedMode& mode(const ModeKey& key, double lambda_nm);  // throws if absent
  std::vector<ModeKey> guided_keys(Polarization pol, double lambda_nm);

  struct BetaRecord {
    ModeKey key;
    double beta_sq = 0, n_eff = 0, residual = 0;
    int parity = 0;
    bool flagged = false;
  };
  std::vector<BetaRecord> betas(Polarization pol, double lambda_nm);

  // Solve several wavelengths concurrently (deterministic results).
  void prefetch(const std::vector<std::pair<Polarization, double>>& jobs, int threads);

 private:
  DeviceModel device_;
  SolveCache* cache_;
  std::unique_ptr<Mesh> mesh_;
  std::map<std::pair<int, long long>, std::vector<GuidedMode>> memo_;
  std::mutex mu_;
  static long long lambda_key(double lambda_nm) {
    return static_cast<long long>(std::llround(lambda_nm * 1e6));
  }
  std::string beta_cache_key(Polarization pol, double lambda_nm) const;
};

// Beta tables for the given modes, sampled at `points` wavelengths spanning
// [lambda_min, lambda_max] per band and fitted per mode.
BetaTable build_beta_table(ModeBank& bank, const std::vector<ModeKey>& keys,
                           double lambda_min_nm, double lambda_max_nm, int points,
                           int threads = 1);
BetaTable build_beta_table_band(ModeBank& bank, const std::vector<ModeKey>& keys,
                                double lambda_min_nm, double lambda_max_nm, int points, int band,
                                int threads = 1);
void append_beta_band(BetaTable& table, ModeBank& bank, const std::vector<ModeKey>& keys,
                      double lambda_min_nm, double lambda_max_nm, int points, int band,
                      int threads = 1);

// Pump + SH tables for a spectrum/search: SH band over [l2_min, l2_max],
// pump band over [pump_min, pump_max] (the pump envelope support).
BetaTable build_tables_for_range(ModeBank& bank, const std::vector<ProcessTriple>& triples,
                                 double l2_min_nm, double l2_max_nm, double pump_min_nm,
                                 double pump_max_nm, int points, int threads = 1);

// Wavelength support of the pump envelope (amplitude above the hard cutoff).
std::pair<double, double> pump_support_nm(const PumpSpec& pump);

// Degenerate-pump phase matching: the root of
// dbeta(l2) = beta_sh(w2) - beta_p1(w2/2) - beta_p2(w2/2) - 2 pi M / Lambda.
struct PhaseMatchResult {
  double lambda2_nm = 0;
  double mismatch = 0;       // residual |dbeta| at the root
  bool degenerate = false;   // dbeta ~ 0 over the whole bracket
  bool found = false;
};
PhaseMatchResult find_phase_matched_wavelength(const ProcessTriple& triple,
                                               const BetaTable& betas, const PolingSpec& poling,
                                               double bracket_lo_nm, double bracket_hi_nm);

double degenerate_mismatch(const ProcessTriple& triple, const BetaTable& betas,
                           const PolingSpec& poling, double lambda2_nm);

struct PeriodResult {
  ShgType type = ShgType::TypeII;
  double period_um = 0;     // first-order (M = 1) optimal period 2 pi / dbeta0
  int device_harmonic = 1;  // harmonic this type rides on in the poled device
  bool qpm_possible = false;
};

// Fundamental-mode triple at the given pump wavelength, degenerate pumping.
PeriodResult optimal_poling_period(ShgType type, double lambda1_nm, ModeBank& bank);

// Default harmonic per type in the type-II-optimized device.
int designated_harmonic(ShgType type);

enum class ScanParameter { Width, Depth, Period };
const char* scan_parameter_name(ScanParameter p);

struct ScanResult {
  ScanParameter param = ScanParameter::Period;
  std::vector<double> values;               // sample grid (absolute units)
  std::vector<ProcessTriple> triples;
  // lambda2[t][s]; NaN where the root was lost (flagged)
  std::vector<std::vector<double>> lambda2_nm;
  std::vector<std::vector<double>> shift_nm;  // relative to each triple's nominal
  std::vector<double> slope_nm_per_unit;      // at the nominal point
  bool truncated = false;
};

struct ScanOptions {
  int samples = 3;
  double bracket_lo_nm = 390.0, bracket_hi_nm = 410.0;
  int band_points = 5;
  int threads = 1;
};

ScanResult sensitivity_scan(ScanParameter param, double half_range, const DeviceModel& nominal,
                            const std::vector<ProcessTriple>& triples, const ScanOptions& opts,
                            SolveCache* cache = nullptr);

// The five processes of the sensitivity figure.
std::vector<ProcessTriple> fig3_triples(const PolingSpec& poling);

struct ProcessRow {
  ProcessTriple triple;
  double lambda2_nm = 0;
  double rel_power = 0;
  double abs_peak = 0;
  double overlap_mag = 0;
};

struct TableOptions {
  double bracket_lo_nm = 390.0, bracket_hi_nm = 410.0;
  double d_threshold_rel = 1e-3;
  int max_sh_modes = 8;
  int band_points = 7;
  double pump_fwhm_nm = 3.0;
  bool per_process_centering = true;  // pump centered at each process's 2*l2
  double local_span_nm = 0.9;         // half-span of each line's local grid
  int local_points = 181;
  int quadrature_points = 512;
  int threads = 1;
};

// Every type II process with |D| above threshold: phase-matched wavelength
// and peak spectral intensity under uniform modal excitation, normalized to
// the strongest process.
std::vector<ProcessRow> process_table(ModeBank& bank, const TableOptions& opts);

struct GeometrySpectra {
  std::vector<double> values;  // geometry samples
  std::vector<Spectrum> ideal;
  std::vector<Spectrum> broadened;
};

struct SpectrumRunOptions {
  double l2_min_nm = 392, l2_max_nm = 407;
  int points = 1501;
  double broaden_fwhm_nm = 1.0;
  int band_points = 7;
  double d_threshold_rel = 1e-3;
  int max_sh_modes = 8;
  SpectrumOptions engine;
  int threads = 1;
};

// Full uniform-excitation spectrum of one device.
Spectrum device_spectrum(ModeBank& bank, const PumpSpec& pump, const SpectrumRunOptions& opts,
                         std::vector<ProcessTriple>* triples_out = nullptr);

GeometrySpectra spectrum_vs_geometry(ScanParameter param, const std::vector<double>& values,
                                     const DeviceModel& nominal, const PumpSpec& pump,
                                     const SpectrumRunOptions& opts, SolveCache* cache = nullptr);

// FWHM of the phase-matching-limited line |Gamma(dbeta(l2))|^2 (diagnostic).
double tuning_curve_fwhm(const ProcessTriple& triple, const BetaTable& betas,
                         const PolingSpec& poling, double lambda2_star_nm, double length_um);

}  // namespace qpm
