#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpmshg/modes.hpp"

namespace qpm {

using Complex = std::complex<double>;

inline double omega_from_lambda_nm(double lambda_nm) {
  return 2.0 * 3.14159265358979323846 / (lambda_nm * 1.0e-3);  // c = 1, [1/um]
}
inline double lambda_nm_from_omega(double omega) {
  return 2.0 * 3.14159265358979323846 / omega * 1.0e3;
}

struct ModeKey {
  Polarization pol = Polarization::TE;
  int m = 0, n = 0;
  auto operator<=>(const ModeKey&) const = default;
  std::string str() const;
};

// One individual SHG process: SH mode fed by two pump modes through the M-th
// poling harmonic.  For type II pump1 is the TE mode and pump2 the TM mode.
// multiplicity carries the (b,l) <-> (c,m) double counting of the modal sum.
struct ProcessTriple {
  ShgType type = ShgType::TypeII;
  ModeKey sh, pump1, pump2;
  int harmonic = 1;
  int multiplicity = 2;
  std::string name() const;  // e.g. "00+00->00"
};

ModeKey sh_mode_key(ShgType type, int m, int n);
ProcessTriple make_triple(ShgType type, ModeKey sh, ModeKey p1, ModeKey p2, int harmonic);

// Effective nonlinear overlap D = d_M * integral of the tensor-contracted
// mode triple, element-exact for P1 fields, restricted to the crystal
// half-plane.  Magnitude in pm/V times the modes' normalization units.
Complex overlap_coefficient(const GuidedMode& sh, const GuidedMode& pump1,
                            const GuidedMode& pump2, ShgType type,
                            const NonlinearTensor& tensor, double d_m, const Mesh& mesh);

// Per-(polarization, label) beta(omega) tables, least-squares cubic per mode
// and band.  The same labeled mode may be tabulated in disjoint bands (pump
// and SH); evaluation routes by omega coverage.
class BetaTable {
 public:
  void add_sample(const ModeKey& key, double omega, double beta, int band = 0);
  void fit();
  bool covers(const ModeKey& key, double omega) const;
  double beta(const ModeKey& key, double omega) const;      // throws std::domain_error
  double dbeta_domega(const ModeKey& key, double omega) const;
  std::vector<ModeKey> keys() const;

 private:
  struct Series {
    std::vector<double> omega, beta;
    double center = 0, scale = 1, lo = 0, hi = 0;
    double coeff[4] = {0, 0, 0, 0};
    bool fitted = false;
  };
  std::map<std::pair<ModeKey, int>, Series> series_;
  const Series* find_series(const ModeKey& key, double omega) const;
};

// Delta beta = beta_sh(w2) - beta_p1(w1) - beta_p2(w2 - w1) - 2 pi M / Lambda.
double phase_mismatch(const ProcessTriple& triple, double omega2, double omega1,
                      const BetaTable& betas, const PolingSpec& poling);

// Gamma = i (exp(-i db L) - 1) / db, continuously extended to L at db = 0.
Complex coupling_gamma(double delta_beta, double length_um);

struct PumpSpec {
  double center_nm = 800.0;
  double fwhm_nm = 3.0;  // spectral intensity FWHM
  enum class Shape { Gaussian } shape = Shape::Gaussian;
  std::optional<std::pair<double, double>> filter_nm;  // passband [lo, hi]
  std::map<ModeKey, Complex> amplitudes;               // per guided mode

  double envelope(double omega) const;  // spectral amplitude, peak 1
  Complex amplitude(const ModeKey& key, double omega) const;
  void set_uniform_excitation(const std::vector<ModeKey>& guided);  // equal power
  double fwhm_omega() const;
};

struct SpectrumOptions {
  int quadrature_points = 512;  // pump integral, spanning +-3 FWHM
  double span_fwhm = 3.0;
  bool flat_gamma = false;      // replace Gamma by L (flat phase matching)
};

struct Spectrum {
  std::vector<double> lambda2_nm;
  std::vector<ProcessTriple> triples;
  // amplitude[t][k]: per-triple complex contribution to its SH mode envelope
  std::vector<std::vector<Complex>> amplitude;
  // triple_intensity[t][k] = |amplitude|^2; intensity = sum over SH modes of
  // |coherent sum of that mode's contributions|^2
  std::vector<std::vector<double>> triple_intensity;
  std::vector<double> intensity;
  double broadened_fwhm_nm = 0;
  bool pump_truncation_warning = false;
};

// Eq.-(3)-style synthesis: E_sh(L, w2) = i w2^2 / beta^2 * sum over triples of
// D Gamma E(w1) E(w2 - w1) integrated over the pump band by trapezoid.
Spectrum sh_spectrum(const PumpSpec& pump, const std::vector<ProcessTriple>& triples,
                     const std::vector<Complex>& overlaps, const BetaTable& betas,
                     const PolingSpec& poling, double length_um,
                     const std::vector<double>& lambda2_nm, const SpectrumOptions& opts = {});

// Gaussian broadening of the intensity columns; conserves integrated
// intensity for lines away from the grid edges.
Spectrum broaden(const Spectrum& spec, double fwhm_nm);

struct PolarizationResponse {
  std::vector<double> alpha_deg;
  std::vector<double> p_te_sh;  // type II, coherent in the pump pair
  std::vector<double> p_tm_sh;  // types 0 and I, incoherent (distinct SH lines)
};

// Pump TE amplitude ~ cos(alpha), TM ~ sin(alpha); curves peak-normalized.
PolarizationResponse polarization_response(double w_type0, double w_type1, double w_type2,
                                           int samples = 181);

}  // namespace qpm
