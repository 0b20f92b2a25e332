#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qpmshg/oracles.hpp"
#include "qpmshg/scan.hpp"

using namespace qpm;

namespace {

constexpr double kPi = 3.14159265358979323846;

ModeKey te(int m, int n) { return ModeKey{Polarization::TE, m, n}; }
ModeKey tm(int m, int n) { return ModeKey{Polarization::TM, m, n}; }

// Linear (dispersionless) tables: beta = n_idx * omega for every mode, with
// separate pump and SH bands around the given centers.
BetaTable linear_table(const std::vector<ModeKey>& keys, double n_idx, double pump_center_nm,
                       double sh_center_nm, double halfwidth_nm = 60.0) {
  BetaTable t;
  for (const ModeKey& k : keys) {
    for (int band = 0; band < 2; ++band) {
      const double center = band == 0 ? pump_center_nm : sh_center_nm;
      for (int i = 0; i < 7; ++i) {
        const double lambda = center - halfwidth_nm + 2.0 * halfwidth_nm * i / 6.0;
        const double omega = omega_from_lambda_nm(lambda);
        t.add_sample(k, omega, n_idx * omega, band);
      }
    }
  }
  t.fit();
  return t;
}

ModeBank& paper_bank() {
  static DeviceModel device;
  static ModeBank bank(device, nullptr);
  return bank;
}

double measure_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
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

}  // namespace

TEST_CASE("coupling function limits") {
  const double L = 10500.0;
  CHECK(std::abs(coupling_gamma(0.0, L)) == L);
  CHECK(std::abs(coupling_gamma(2.0 * kPi / L, L)) < 1e-9 * L);
  const double half_point = 2.78311474;  // root of sinc^2(x/2) = 1/2
  const double g = std::norm(coupling_gamma(half_point / L, L)) / (L * L);
  CHECK(g == doctest::Approx(0.5).epsilon(1e-6));
  // series branch continuous against the direct formula
  const auto a = coupling_gamma(9.9e-7 / L, L);
  const auto b = coupling_gamma(1.1e-6 / L, L);
  CHECK(std::abs(a - b) / L < 1e-9);
  CHECK_THROWS_AS(coupling_gamma(0.1, -1.0), ConfigError);
}

TEST_CASE("phase mismatch: harmonic steps and the dispersionless degenerate case") {
  const auto keys = std::vector<ModeKey>{te(0, 0), tm(0, 0)};
  const BetaTable table = linear_table(keys, 1.8, 800.0, 400.0);
  PolingSpec poling;
  ProcessTriple tr = make_triple(ShgType::TypeII, te(0, 0), te(0, 0), tm(0, 0), 1);
  const double w1 = omega_from_lambda_nm(800.0);

  tr.harmonic = 0;  // bare mismatch: beta linear in omega cancels exactly
  CHECK(phase_mismatch(tr, 2 * w1, w1, table, poling) == doctest::Approx(0.0).epsilon(1e-12));
  tr.harmonic = 1;
  const double d1 = phase_mismatch(tr, 2 * w1, w1, table, poling);
  tr.harmonic = 2;
  const double d2 = phase_mismatch(tr, 2 * w1, w1, table, poling);
  CHECK(d1 - d2 == doctest::Approx(2.0 * kPi / poling.period_um).epsilon(1e-12));
  // outside the tabulated band
  CHECK_THROWS_AS(phase_mismatch(tr, 2 * w1, omega_from_lambda_nm(950.0), table, poling),
                  std::domain_error);
}

TEST_CASE("x-parity selection rule and overlap ordering for type II") {
  ModeBank& bank = paper_bank();
  const NonlinearTensor tensor;
  const double d_m = poling_harmonic_amplitude(bank.device().poling, 1);
  const auto& mesh = bank.mesh();

  const GuidedMode& p_te = bank.mode(te(0, 0), 800.0);
  const GuidedMode& p_tm = bank.mode(tm(0, 0), 800.0);
  const Complex d_fund = overlap_coefficient(bank.mode(te(0, 0), 400.0), p_te, p_tm,
                                             ShgType::TypeII, tensor, d_m, mesh);
  const Complex d_forbidden = overlap_coefficient(bank.mode(te(1, 0), 400.0), p_te, p_tm,
                                                  ShgType::TypeII, tensor, d_m, mesh);
  CHECK(std::abs(d_forbidden) < 1e-3 * std::abs(d_fund));

  // the fundamental triple dominates every type II process with these pumps
  for (const ModeKey& sh : bank.guided_keys(Polarization::TE, 400.0)) {
    if (sh == te(0, 0)) continue;
    const Complex d = overlap_coefficient(bank.mode(sh, 400.0), p_te, p_tm, ShgType::TypeII,
                                          tensor, d_m, mesh);
    CHECK(std::abs(d) < std::abs(d_fund));
  }

  // linearity in the poling amplitude
  const Complex d_half = overlap_coefficient(bank.mode(te(0, 0), 400.0), p_te, p_tm,
                                             ShgType::TypeII, tensor, 0.5 * d_m, mesh);
  CHECK(std::abs(d_half) == doctest::Approx(0.5 * std::abs(d_fund)).epsilon(1e-12));
}

TEST_CASE("flat phase matching reproduces the autoconvolution bandwidth relation") {
  const auto keys = std::vector<ModeKey>{te(0, 0), tm(0, 0)};
  const BetaTable table = linear_table(keys, 1.8, 800.0, 400.0);
  const ProcessTriple tr = make_triple(ShgType::TypeII, te(0, 0), te(0, 0), tm(0, 0), 1);
  PolingSpec poling;

  PumpSpec pump;
  pump.center_nm = 800.0;
  pump.fwhm_nm = 10.0;
  pump.amplitudes[te(0, 0)] = 1.0 / std::sqrt(2.0);
  pump.amplitudes[tm(0, 0)] = 1.0 / std::sqrt(2.0);

  std::vector<double> grid(1601);
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = 394.0 + 12.0 * i / (grid.size() - 1);
  SpectrumOptions opts;
  opts.flat_gamma = true;
  opts.quadrature_points = 1024;
  const Spectrum spec = sh_spectrum(pump, {tr}, {Complex(1.0, 0.0)}, table, poling, 10500.0,
                                    grid, opts);
  const double fwhm = measure_fwhm(spec.lambda2_nm, spec.intensity);
  CHECK(fwhm == doctest::Approx(10.0 / (2.0 * std::sqrt(2.0))).epsilon(0.02));

  // cross-check against the independent autoconvolution oracle
  const double w0 = omega_from_lambda_nm(800.0);
  const double fw = pump.fwhm_omega();
  const int n = 2001;
  std::vector<double> omega(n);
  std::vector<Complex> amp(n);
  for (int i = 0; i < n; ++i) {
    omega[i] = w0 - 3 * fw + 6 * fw * i / (n - 1);
    amp[i] = pump.envelope(omega[i]);
  }
  const auto ac = oracle::autoconvolution_spectrum(omega, amp);
  std::vector<double> lam(ac.omega2.size());
  for (size_t i = 0; i < lam.size(); ++i)
    lam[i] = lambda_nm_from_omega(ac.omega2[ac.omega2.size() - 1 - i]);
  std::vector<double> inten(ac.intensity.rbegin(), ac.intensity.rend());
  const double oracle_fwhm = measure_fwhm(lam, inten);
  CHECK(fwhm == doctest::Approx(oracle_fwhm).epsilon(0.02));
}

TEST_CASE("pump amplitude bilinearity: zero modes kill triples, |s|^4 power scaling") {
  const auto keys = std::vector<ModeKey>{te(0, 0), tm(0, 0), tm(0, 1)};
  const BetaTable table = linear_table(keys, 1.8, 800.0, 400.0);
  PolingSpec poling;
  const ProcessTriple tr1 = make_triple(ShgType::TypeII, te(0, 0), te(0, 0), tm(0, 0), 1);
  const ProcessTriple tr2 = make_triple(ShgType::TypeII, te(0, 0), te(0, 0), tm(0, 1), 1);
  std::vector<double> grid(101);
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = 398.0 + 4.0 * i / (grid.size() - 1);

  PumpSpec pump;
  pump.fwhm_nm = 10.0;
  pump.amplitudes[te(0, 0)] = 0.8;
  pump.amplitudes[tm(0, 0)] = 0.6;  // tm(0,1) left unexcited
  const Spectrum a = sh_spectrum(pump, {tr1, tr2}, {Complex(1.0), Complex(1.0)}, table, poling,
                                 10500.0, grid);
  for (double v : a.triple_intensity[1]) CHECK(v == 0.0);

  PumpSpec scaled = pump;
  const double s = 1.7;
  for (auto& [k, v] : scaled.amplitudes) v *= s;
  const Spectrum b = sh_spectrum(scaled, {tr1, tr2}, {Complex(1.0), Complex(1.0)}, table, poling,
                                 10500.0, grid);
  const double s4 = std::pow(s, 4);
  for (size_t i = 0; i < a.intensity.size(); ++i)
    if (a.intensity[i] > 0)
      CHECK(b.intensity[i] / a.intensity[i] == doctest::Approx(s4).epsilon(1e-10));
}

TEST_CASE("exchange symmetry of same-polarization pump pairs") {
  const auto keys = std::vector<ModeKey>{te(0, 0), te(0, 1), tm(0, 0)};
  // mildly dispersive synthetic tables keep the integrand nontrivial
  BetaTable table;
  for (const ModeKey& k : keys) {
    const double n_idx = 1.8 + 0.01 * k.n;
    for (int band = 0; band < 2; ++band) {
      const double center = band == 0 ? 800.0 : 400.0;
      for (int i = 0; i < 7; ++i) {
        const double lambda = center - 40 + 80.0 * i / 6.0;
        const double w = omega_from_lambda_nm(lambda);
        const double w0 = omega_from_lambda_nm(center);
        table.add_sample(k, w, n_idx * w + 0.3 * (w - w0) * (w - w0), band);
      }
    }
  }
  table.fit();
  PolingSpec poling;
  const ProcessTriple fwd = make_triple(ShgType::TypeI, tm(0, 0), te(0, 0), te(0, 1), 3);
  const ProcessTriple rev = make_triple(ShgType::TypeI, tm(0, 0), te(0, 1), te(0, 0), 3);
  CHECK(fwd.multiplicity == 2);
  PumpSpec pump;
  pump.fwhm_nm = 6.0;
  pump.amplitudes[te(0, 0)] = Complex(0.7, 0.1);
  pump.amplitudes[te(0, 1)] = Complex(0.5, -0.3);
  std::vector<double> grid(201);
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = 396.0 + 8.0 * i / (grid.size() - 1);
  SpectrumOptions opts;
  opts.quadrature_points = 1024;
  const Spectrum a = sh_spectrum(pump, {fwd}, {Complex(0.9, 0.2)}, table, poling, 10500.0, grid, opts);
  const Spectrum b = sh_spectrum(pump, {rev}, {Complex(0.9, 0.2)}, table, poling, 10500.0, grid, opts);
  double peak = 0;
  for (double v : a.intensity) peak = std::max(peak, v);
  for (size_t i = 0; i < a.intensity.size(); ++i)
    CHECK(std::fabs(a.intensity[i] - b.intensity[i]) <= 1e-3 * peak);
}

TEST_CASE("narrow-pump spectrum reproduces the tuning curve after envelope division") {
  // Same-key pumps: the pump-pair group mismatch vanishes, so the spectrum is
  // exactly Gamma(dbeta_deg) times the autoconvolution envelope.
  const ModeKey pk = te(0, 0);
  const ModeKey sk = tm(0, 0);
  BetaTable table;
  const double n_idx = 1.8;
  const double w20 = omega_from_lambda_nm(400.0);
  for (int band = 0; band < 2; ++band) {
    const double center = band == 0 ? 800.0 : 400.0;
    for (int i = 0; i < 9; ++i) {
      const double lambda = center - 3 + 6.0 * i / 8.0;
      const double w = omega_from_lambda_nm(lambda);
      // SH band carries a linear detuning: dbeta = c (w - w20), c sized for a
      // ~0.02 nm tuning-curve FWHM at L = 10.5 mm
      const double beta = band == 0 ? n_idx * w : n_idx * w + 0.7 * (w - w20);
      table.add_sample(sk.pol == pk.pol ? pk : (band == 0 ? pk : sk), w, beta, band);
    }
  }
  table.fit();
  PolingSpec poling;
  ProcessTriple tr = make_triple(ShgType::TypeI, sk, pk, pk, 0);
  PumpSpec pump;
  pump.center_nm = 800.0;
  pump.fwhm_nm = 0.2;
  pump.amplitudes[pk] = 1.0;
  const double L = 10500.0;
  std::vector<double> grid(401);
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = 399.97 + 0.06 * i / (grid.size() - 1);
  SpectrumOptions opts;
  opts.quadrature_points = 2048;
  const Spectrum spec = sh_spectrum(pump, {tr}, {Complex(1.0)}, table, poling, L, grid, opts);

  // envelope = |autoconvolution|^2 of the pump with flat Gamma
  const Spectrum flat = [&] {
    SpectrumOptions fo = opts;
    fo.flat_gamma = true;
    return sh_spectrum(pump, {tr}, {Complex(1.0)}, table, poling, L, grid, fo);
  }();
  double peak_ratio = 0;
  std::vector<double> ratio(grid.size(), 0.0);
  for (size_t i = 0; i < grid.size(); ++i) {
    if (flat.intensity[i] <= 0) continue;
    ratio[i] = spec.intensity[i] / flat.intensity[i] * (L * L);
    peak_ratio = std::max(peak_ratio, ratio[i]);
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (flat.intensity[i] < 0.2 * flat.intensity[grid.size() / 2]) continue;
    const double w2 = omega_from_lambda_nm(grid[i]);
    const double db = table.beta(sk, w2) - 2.0 * table.beta(pk, 0.5 * w2);
    const double expected = std::norm(coupling_gamma(db, L));
    CHECK(ratio[i] / peak_ratio ==
          doctest::Approx(expected / (L * L)).epsilon(0.01).scale(1.0));
  }
}

TEST_CASE("broadening: identity, width composition, merging, conservation") {
  // synthetic narrow line on a fine grid
  const int n = 4001;
  Spectrum spec;
  spec.lambda2_nm.resize(n);
  spec.intensity.resize(n);
  spec.triples = {};
  const double sigma = 0.13 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  for (int i = 0; i < n; ++i) {
    const double l = 396.0 + 8.0 * i / (n - 1);
    spec.lambda2_nm[i] = l;
    spec.intensity[i] = std::exp(-0.5 * (l - 400.0) * (l - 400.0) / (sigma * sigma));
  }

  const Spectrum same = broaden(spec, 0.0);
  for (int i = 0; i < n; ++i) CHECK(same.intensity[i] == spec.intensity[i]);

  const Spectrum wide = broaden(spec, 1.0);
  const double fwhm = measure_fwhm(wide.lambda2_nm, wide.intensity);
  CHECK(fwhm == doctest::Approx(std::sqrt(0.13 * 0.13 + 1.0)).epsilon(0.03));

  double sum_in = 0, sum_out = 0;
  for (int i = 0; i < n; ++i) {
    sum_in += spec.intensity[i];
    sum_out += wide.intensity[i];
  }
  CHECK(sum_out == doctest::Approx(sum_in).epsilon(1e-6));

  // two lines closer than one FWHM merge into a single maximum
  Spectrum two = spec;
  for (int i = 0; i < n; ++i) {
    const double l = two.lambda2_nm[i];
    two.intensity[i] = std::exp(-0.5 * std::pow((l - 399.7) / sigma, 2)) +
                       std::exp(-0.5 * std::pow((l - 400.3) / sigma, 2));
  }
  const Spectrum merged = broaden(two, 1.0);
  int maxima = 0;
  for (int i = 1; i + 1 < n; ++i)
    if (merged.intensity[i] > merged.intensity[i - 1] &&
        merged.intensity[i] > merged.intensity[i + 1] &&
        merged.intensity[i] > 0.2 * *std::max_element(merged.intensity.begin(),
                                                      merged.intensity.end()))
      ++maxima;
  CHECK(maxima == 1);
}

TEST_CASE("polarization response against the closed forms") {
  const auto r = polarization_response(1.0, 1.0, 1.0, 181);
  CHECK(r.p_te_sh.front() == 0.0);                       // alpha = 0: no TM pump
  CHECK(r.p_te_sh[90] == doctest::Approx(1.0));          // peak at 45 deg
  CHECK(r.p_tm_sh.front() == doctest::Approx(1.0));      // type I at alpha = 0
  const auto r2 = polarization_response(0.7, 0.0, 1.0, 181);
  CHECK(r2.p_tm_sh.back() == doctest::Approx(1.0));      // type 0 only at 90 deg
  CHECK(r2.p_tm_sh.front() == doctest::Approx(0.0));
  CHECK_THROWS_AS(polarization_response(-1.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("uniform excitation normalizes the total pump power") {
  PumpSpec pump;
  pump.set_uniform_excitation({te(0, 0), te(0, 1), tm(0, 0), tm(0, 1), tm(1, 0)});
  double power = 0;
  for (const auto& [k, a] : pump.amplitudes) power += std::norm(a);
  CHECK(power == doctest::Approx(1.0).epsilon(1e-12));
}
