#include "qpmshg/shg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace qpm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string ModeKey::str() const {
  return std::string(polarization_name(pol)) + std::to_string(m) + std::to_string(n);
}

std::string ProcessTriple::name() const {
  const auto lbl = [](const ModeKey& k) { return std::to_string(k.m) + std::to_string(k.n); };
  return lbl(pump1) + "+" + lbl(pump2) + "->" + lbl(sh);
}

ModeKey sh_mode_key(ShgType type, int m, int n) {
  return ModeKey{type == ShgType::TypeII ? Polarization::TE : Polarization::TM, m, n};
}

ProcessTriple make_triple(ShgType type, ModeKey sh, ModeKey p1, ModeKey p2, int harmonic) {
  ProcessTriple t;
  t.type = type;
  t.sh = sh;
  t.pump1 = p1;
  t.pump2 = p2;
  t.harmonic = harmonic;
  switch (type) {
    case ShgType::Type0:
      if (p1.pol != Polarization::TM || p2.pol != Polarization::TM || sh.pol != Polarization::TM)
        throw ConfigError("type 0 triple needs TM+TM->TM");
      break;
    case ShgType::TypeI:
      if (p1.pol != Polarization::TE || p2.pol != Polarization::TE || sh.pol != Polarization::TM)
        throw ConfigError("type I triple needs TE+TE->TM");
      break;
    case ShgType::TypeII:
      if (p1.pol != Polarization::TE || p2.pol != Polarization::TM || sh.pol != Polarization::TE)
        throw ConfigError("type II triple needs TE+TM->TE");
      break;
  }
  // (b,l) <-> (c,m) appears twice in the modal double sum unless identical.
  t.multiplicity = (p1 == p2) ? 1 : 2;
  return t;
}

namespace {

// Exact integral of a product of three P1 nodal fields over crystal elements.
Complex triple_product_integral(const Mesh& mesh, const Cvec& f, const Cvec& g, const Cvec& h) {
  Complex total = 0;
  for (int t = 0; t < mesh.tri_count(); ++t) {
    double cx, cy;
    mesh.tri_centroid(t, cx, cy);
    if (cy < 0) continue;  // no nonlinearity in air
    const auto& tr = mesh.tris[t];
    const double area = mesh.tri_area(t);
    Complex acc = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          // int l_i^a l_j^b l_k^c dA = 2A a! b! c! / (a+b+c+2)!
          double w;
          if (i == j && j == k)
            w = 1.0 / 10.0;
          else if (i == j || j == k || i == k)
            w = 1.0 / 30.0;
          else
            w = 1.0 / 60.0;
          acc += w * f[tr[i]] * g[tr[j]] * h[tr[k]];
        }
    total += area * acc;
  }
  return total;
}

Cvec conjugated(const Cvec& v) {
  Cvec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
  return out;
}

}  // namespace

Complex overlap_coefficient(const GuidedMode& sh, const GuidedMode& pump1,
                            const GuidedMode& pump2, ShgType type, const NonlinearTensor& tensor,
                            double d_m, const Mesh& mesh) {
  const size_t nn = static_cast<size_t>(mesh.node_count());
  if (sh.ex.size() != nn || pump1.ex.size() != nn || pump2.ex.size() != nn)
    throw NumericalError("overlap: modes live on a different mesh (resample first)");
  const double d_el = tensor.element(type);
  Complex integral = 0;
  switch (type) {
    case ShgType::Type0:
      integral = triple_product_integral(mesh, conjugated(sh.ey), pump1.ey, pump2.ey);
      break;
    case ShgType::TypeI:
      integral = triple_product_integral(mesh, conjugated(sh.ey), pump1.ex, pump2.ex);
      break;
    case ShgType::TypeII:
      // d24 = d32 contraction: e_sh,x * (e_p1,x e_p2,y + e_p1,y e_p2,x)
      integral = triple_product_integral(mesh, conjugated(sh.ex), pump1.ex, pump2.ey) +
                 triple_product_integral(mesh, conjugated(sh.ex), pump1.ey, pump2.ex);
      break;
  }
  return d_m * d_el * integral;
}

void BetaTable::add_sample(const ModeKey& key, double omega, double beta, int band) {
  Series& s = series_[{key, band}];
  s.omega.push_back(omega);
  s.beta.push_back(beta);
  s.fitted = false;
}

void BetaTable::fit() {
  for (auto& [key, s] : series_) {
    const int n = static_cast<int>(s.omega.size());
    if (n < 2)
      throw NumericalError("beta table: mode " + key.first.str() + " has too few samples");
    s.lo = *std::min_element(s.omega.begin(), s.omega.end());
    s.hi = *std::max_element(s.omega.begin(), s.omega.end());
    s.center = 0.5 * (s.lo + s.hi);
    s.scale = std::max(0.5 * (s.hi - s.lo), 1e-12);
    const int degree = std::min(3, n - 1);
    Eigen::MatrixXd v(n, degree + 1);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      const double t = (s.omega[i] - s.center) / s.scale;
      double p = 1;
      for (int d = 0; d <= degree; ++d) {
        v(i, d) = p;
        p *= t;
      }
      rhs[i] = s.beta[i];
    }
    const Eigen::VectorXd c = v.colPivHouseholderQr().solve(rhs);
    for (int d = 0; d < 4; ++d) s.coeff[d] = d <= degree ? c[d] : 0.0;
    s.fitted = true;
  }
}

const BetaTable::Series* BetaTable::find_series(const ModeKey& key, double omega) const {
  const Series* best = nullptr;
  double best_dist = 0;
  for (const auto& [sk, s] : series_) {
    if (sk.first != key || !s.fitted) continue;
    const double slack = 1e-3 * (s.hi - s.lo);
    if (omega < s.lo - slack || omega > s.hi + slack) continue;
    const double dist = std::fabs(omega - s.center);
    if (!best || dist < best_dist) {
      best = &s;
      best_dist = dist;
    }
  }
  return best;
}

bool BetaTable::covers(const ModeKey& key, double omega) const {
  return find_series(key, omega) != nullptr;
}

double BetaTable::beta(const ModeKey& key, double omega) const {
  const Series* s = find_series(key, omega);
  if (!s)
    throw std::domain_error("beta table: omega " + std::to_string(omega) +
                            " outside tabulated range for " + key.str());
  const double t = (omega - s->center) / s->scale;
  return ((s->coeff[3] * t + s->coeff[2]) * t + s->coeff[1]) * t + s->coeff[0];
}

double BetaTable::dbeta_domega(const ModeKey& key, double omega) const {
  const Series* s = find_series(key, omega);
  if (!s)
    throw std::domain_error("beta table: omega outside tabulated range for " + key.str());
  const double t = (omega - s->center) / s->scale;
  return ((3 * s->coeff[3] * t + 2 * s->coeff[2]) * t + s->coeff[1]) / s->scale;
}

std::vector<ModeKey> BetaTable::keys() const {
  std::vector<ModeKey> out;
  for (const auto& [key, s] : series_)
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  return out;
}

double phase_mismatch(const ProcessTriple& triple, double omega2, double omega1,
                      const BetaTable& betas, const PolingSpec& poling) {
  return betas.beta(triple.sh, omega2) - betas.beta(triple.pump1, omega1) -
         betas.beta(triple.pump2, omega2 - omega1) -
         2.0 * kPi * triple.harmonic / poling.period_um;
}

Complex coupling_gamma(double delta_beta, double length_um) {
  if (length_um <= 0) throw ConfigError("coupling gamma: length must be positive");
  const double x = delta_beta * length_um;
  if (std::fabs(x) < 1e-6) {
    // i (e^{-ix} - 1) / db = L (1 - i x/2 - x^2/6 + i x^3/24)
    return length_um * Complex(1.0 - x * x / 6.0, -x / 2.0 + x * x * x / 24.0);
  }
  const Complex num = Complex(0, 1) * (std::exp(Complex(0, -x)) - 1.0);
  return num / delta_beta;
}

double PumpSpec::fwhm_omega() const {
  const double lambda_um = center_nm * 1e-3;
  return 2.0 * kPi * (fwhm_nm * 1e-3) / (lambda_um * lambda_um);
}

double PumpSpec::envelope(double omega) const {
  const double w0 = omega_from_lambda_nm(center_nm);
  const double sigma = fwhm_omega() / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  double amp = std::exp(-(omega - w0) * (omega - w0) / (4.0 * sigma * sigma));
  if (amp < 1e-14) amp = 0.0;  // hard support: beta tables need not reach further
  if (filter_nm) {
    const double lambda = lambda_nm_from_omega(omega);
    if (lambda < filter_nm->first || lambda > filter_nm->second) amp = 0.0;
  }
  return amp;
}

Complex PumpSpec::amplitude(const ModeKey& key, double omega) const {
  const auto it = amplitudes.find(key);
  if (it == amplitudes.end()) return 0.0;
  return it->second * envelope(omega);
}

void PumpSpec::set_uniform_excitation(const std::vector<ModeKey>& guided) {
  amplitudes.clear();
  if (guided.empty()) return;
  const double a = 1.0 / std::sqrt(static_cast<double>(guided.size()));
  for (const ModeKey& k : guided) amplitudes[k] = a;
}

Spectrum sh_spectrum(const PumpSpec& pump, const std::vector<ProcessTriple>& triples,
                     const std::vector<Complex>& overlaps, const BetaTable& betas,
                     const PolingSpec& poling, double length_um,
                     const std::vector<double>& lambda2_nm, const SpectrumOptions& opts) {
  if (triples.size() != overlaps.size())
    throw ConfigError("sh_spectrum: one overlap coefficient per triple required");
  if (opts.quadrature_points < 2) throw ConfigError("sh_spectrum: need >= 2 quadrature points");

  Spectrum spec;
  spec.lambda2_nm = lambda2_nm;
  spec.triples = triples;
  const size_t ng = lambda2_nm.size();
  const size_t nt = triples.size();
  spec.amplitude.assign(nt, std::vector<Complex>(ng, 0.0));
  spec.triple_intensity.assign(nt, std::vector<double>(ng, 0.0));
  spec.intensity.assign(ng, 0.0);

  // Pump quadrature grid over +- span_fwhm FWHM.
  const double w0 = omega_from_lambda_nm(pump.center_nm);
  const double half_span = opts.span_fwhm * pump.fwhm_omega();
  const int nq = opts.quadrature_points;
  std::vector<double> wq(nq), weight(nq);
  const double dw = 2.0 * half_span / (nq - 1);
  for (int i = 0; i < nq; ++i) {
    wq[i] = w0 - half_span + i * dw;
    weight[i] = (i == 0 || i == nq - 1) ? 0.5 * dw : dw;
  }
  // Truncation check: fraction of pump power outside the grid (Gaussian tail).
  {
    const double sigma_i = pump.fwhm_omega() / (2.0 * std::sqrt(2.0 * std::log(2.0))) *
                           std::sqrt(2.0);  // intensity sigma
    const double lost = std::erfc(half_span / (sigma_i * std::sqrt(2.0)));
    if (lost > 1e-3) spec.pump_truncation_warning = true;
  }

  // Cache the pump-side mode amplitudes on the quadrature grid.
  std::map<ModeKey, std::vector<Complex>> pump_amp;
  for (const auto& t : triples)
    for (const ModeKey& k : {t.pump1, t.pump2})
      if (!pump_amp.count(k)) {
        auto& v = pump_amp[k];
        v.resize(nq);
        for (int i = 0; i < nq; ++i) v[i] = pump.amplitude(k, wq[i]);
      }

  for (size_t g = 0; g < ng; ++g) {
    const double omega2 = omega_from_lambda_nm(lambda2_nm[g]);
    for (size_t t = 0; t < nt; ++t) {
      const ProcessTriple& tr = triples[t];
      const double beta_sh = betas.beta(tr.sh, omega2);
      const auto& a1 = pump_amp[tr.pump1];
      Complex acc = 0;
      for (int i = 0; i < nq; ++i) {
        const double w1 = wq[i];
        const double w_partner = omega2 - w1;
        if (std::norm(a1[i]) < 1e-300) continue;
        const Complex amp2 = pump.amplitude(tr.pump2, w_partner);
        if (std::norm(amp2) < 1e-300) continue;
        const Complex gamma =
            opts.flat_gamma
                ? Complex(length_um, 0)
                : coupling_gamma(phase_mismatch(tr, omega2, w1, betas, poling), length_um);
        acc += weight[i] * gamma * a1[i] * amp2;
      }
      const Complex prefactor = Complex(0, 1) * omega2 * omega2 / (beta_sh * beta_sh);
      spec.amplitude[t][g] =
          prefactor * static_cast<double>(tr.multiplicity) * overlaps[t] * acc;
      spec.triple_intensity[t][g] = std::norm(spec.amplitude[t][g]);
    }
    // Coherent within each SH mode, incoherent across SH modes.
    std::map<ModeKey, Complex> per_mode;
    for (size_t t = 0; t < nt; ++t) per_mode[triples[t].sh] += spec.amplitude[t][g];
    double total = 0;
    for (const auto& [k, e] : per_mode) total += std::norm(e);
    spec.intensity[g] = total;
  }
  return spec;
}

Spectrum broaden(const Spectrum& spec, double fwhm_nm) {
  if (fwhm_nm < 0) throw ConfigError("broaden: FWHM must be >= 0");
  Spectrum out = spec;
  out.broadened_fwhm_nm = fwhm_nm;
  if (fwhm_nm == 0 || spec.lambda2_nm.size() < 2) return out;
  const double dl = spec.lambda2_nm[1] - spec.lambda2_nm[0];
  const double sigma = fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const int half = std::max(1, static_cast<int>(std::ceil(5.0 * sigma / dl)));
  std::vector<double> kernel(2 * half + 1);
  double norm = 0;
  for (int i = -half; i <= half; ++i) {
    kernel[i + half] = std::exp(-0.5 * (i * dl) * (i * dl) / (sigma * sigma));
    norm += kernel[i + half];
  }
  for (double& k : kernel) k /= norm;  // discrete unit mass conserves the sum

  const auto convolve = [&](const std::vector<double>& in) {
    const int n = static_cast<int>(in.size());
    std::vector<double> res(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (in[i] == 0.0) continue;
      for (int j = -half; j <= half; ++j) {
        const int k = i + j;
        if (k >= 0 && k < n) res[k] += in[i] * kernel[j + half];
      }
    }
    return res;
  };
  out.intensity = convolve(spec.intensity);
  for (size_t t = 0; t < spec.triple_intensity.size(); ++t)
    out.triple_intensity[t] = convolve(spec.triple_intensity[t]);
  return out;
}

PolarizationResponse polarization_response(double w_type0, double w_type1, double w_type2,
                                           int samples) {
  if (w_type0 < 0 || w_type1 < 0 || w_type2 < 0)
    throw ConfigError("polarization response: weights must be >= 0");
  PolarizationResponse r;
  r.alpha_deg.resize(samples);
  r.p_te_sh.resize(samples);
  r.p_tm_sh.resize(samples);
  double peak_te = 0, peak_tm = 0;
  for (int i = 0; i < samples; ++i) {
    const double alpha = 180.0 * i / (samples - 1);
    const double a = alpha * kPi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    r.alpha_deg[i] = alpha;
    r.p_te_sh[i] = w_type2 * c * c * s * s;
    // distinct SH wavelengths: type 0 and type I add incoherently
    r.p_tm_sh[i] = w_type0 * s * s * s * s + w_type1 * c * c * c * c;
    peak_te = std::max(peak_te, r.p_te_sh[i]);
    peak_tm = std::max(peak_tm, r.p_tm_sh[i]);
  }
  for (int i = 0; i < samples; ++i) {
    if (peak_te > 0) r.p_te_sh[i] /= peak_te;
    if (peak_tm > 0) r.p_tm_sh[i] /= peak_tm;
  }
  return r;
}

}  // namespace qpm
