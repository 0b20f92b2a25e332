#include "qpmshg/oracles.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace qpm::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

// March (h, S = q h') through one layer; normalizes against overflow.
struct SlabState {
  double h, s;
  void normalize() {
    const double m = std::max(std::fabs(h), std::fabs(s));
    if (m > 1e100) {
      h /= m;
      s /= m;
    }
  }
};

void march_layer(SlabState& st, const SlabLayer& layer, double beta_sq, double k0) {
  const double kappa_sq = (beta_sq - layer.n * layer.n * k0 * k0) / layer.q;
  const double t = layer.thickness_um;
  double h = st.h, dh = st.s / layer.q;
  if (kappa_sq >= 0) {
    const double k = std::sqrt(kappa_sq);
    if (k * t < 1e-12) {
      st.h = h + dh * t;
      st.s = layer.q * dh;
    } else {
      const double ch = std::cosh(k * t), sh = std::sinh(k * t);
      st.h = h * ch + dh / k * sh;
      st.s = layer.q * (h * k * sh + dh * ch);
    }
  } else {
    const double k = std::sqrt(-kappa_sq);
    const double c = std::cos(k * t), s = std::sin(k * t);
    st.h = h * c + dh / k * s;
    st.s = layer.q * (-h * k * s + dh * c);
  }
  st.normalize();
}

// Growing-component amplitude in the bottom medium; zero for a guided mode.
double guidance_mismatch(const std::vector<SlabLayer>& stack, double n_eff, double k0) {
  const double beta_sq = n_eff * n_eff * k0 * k0;
  const SlabLayer& top = stack.front();
  const SlabLayer& bottom = stack.back();
  const double kappa_top = std::sqrt(std::max(beta_sq - top.n * top.n * k0 * k0, 1e-300));
  // Decaying upward into the top medium: h = exp(+kappa y), S = q kappa h.
  SlabState st{1.0, top.q * kappa_top};
  for (size_t i = 1; i + 1 < stack.size(); ++i) march_layer(st, stack[i], beta_sq, k0);
  const double kappa_bot = std::sqrt(std::max(beta_sq - bottom.n * bottom.n * k0 * k0, 1e-300));
  return st.s + bottom.q * kappa_bot * st.h;
}

}  // namespace

std::optional<double> slab_effective_index(const std::vector<SlabLayer>& stack, double lambda_nm,
                                           int mode_order) {
  if (stack.size() < 3) throw std::invalid_argument("slab oracle: need at least 3 layers");
  if (mode_order < 0) throw std::invalid_argument("slab oracle: mode order must be >= 0");
  const double k0 = 2.0 * kPi / (lambda_nm * 1.0e-3);
  double n_outer = std::max(stack.front().n, stack.back().n);
  double n_max = 0;
  for (const auto& l : stack) n_max = std::max(n_max, l.n);
  if (n_max <= n_outer) return std::nullopt;  // no confinement

  const double lo = n_outer + 1e-9, hi = n_max - 1e-12;
  const int grid = 4000;
  std::vector<double> roots;
  double prev_n = hi, prev_f = guidance_mismatch(stack, hi, k0);
  for (int i = 1; i <= grid; ++i) {
    const double n = hi - (hi - lo) * i / grid;
    const double f = guidance_mismatch(stack, n, k0);
    if (std::isfinite(f) && std::isfinite(prev_f) && f * prev_f < 0) {
      double a = n, b = prev_n;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = guidance_mismatch(stack, mid, k0);
        if (fm * prev_f < 0)
          a = mid;
        else
          b = mid;
        if (b - a < 1e-10) break;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_n = n;
    prev_f = f;
  }
  if (mode_order >= static_cast<int>(roots.size())) return std::nullopt;
  return roots[mode_order];  // ordered from the top of the interval
}

std::vector<SlabLayer> discretize_profile(const std::function<double(double)>& n_of_y,
                                          const std::function<double(double)>& q_of_y,
                                          double depth_um, int sublayers, double n_air,
                                          double q_air, double n_substrate, double q_substrate) {
  if (sublayers < 1) throw std::invalid_argument("slab oracle: need >= 1 sublayer");
  std::vector<SlabLayer> stack;
  stack.push_back({0.0, n_air, q_air});
  const double dy = depth_um / sublayers;
  for (int i = 0; i < sublayers; ++i) {
    const double y = (i + 0.5) * dy;
    stack.push_back({dy, n_of_y(y), q_of_y(y)});
  }
  stack.push_back({0.0, n_substrate, q_substrate});
  return stack;
}

namespace {

// kx of the symmetric step slab, even/odd orders, by bisection.
std::optional<double> slab_transverse_k(double thickness, double n_core, double n_clad,
                                        double k0, int order) {
  const double v_sq = (n_core * n_core - n_clad * n_clad) * k0 * k0;
  if (v_sq <= 0) return std::nullopt;
  const double half = 0.5 * thickness;
  const double u_max = std::sqrt(v_sq) * half;  // u = kx * half
  const auto f = [&](double u) {
    const double w = std::sqrt(std::max(v_sq * half * half - u * u, 0.0));
    return (order % 2 == 0) ? u * std::tan(u) - w : u / std::tan(u) + w;
  };
  const double lo_base = order * kPi / 2;
  if (lo_base >= u_max) return std::nullopt;  // below cutoff
  double lo = lo_base + 1e-9, hi = std::min(lo_base + kPi / 2 - 1e-9, u_max - 1e-12);
  if (lo >= hi) return std::nullopt;
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) * flo <= 0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi) / half;
}

}  // namespace

std::optional<double> marcatili_rect_index(double width_um, double height_um, double n_core,
                                           double n_clad, double lambda_nm, int m, int n) {
  const double k0 = 2.0 * kPi / (lambda_nm * 1.0e-3);
  const auto kx = slab_transverse_k(width_um, n_core, n_clad, k0, m);
  const auto ky = slab_transverse_k(height_um, n_core, n_clad, k0, n);
  if (!kx || !ky) return std::nullopt;
  const double beta_sq = n_core * n_core * k0 * k0 - *kx * *kx - *ky * *ky;
  if (beta_sq <= n_clad * n_clad * k0 * k0) return std::nullopt;  // cutoff
  return std::sqrt(beta_sq) / k0;
}

AutoconvolutionResult autoconvolution_spectrum(const std::vector<double>& omega1,
                                               const std::vector<std::complex<double>>& amplitude) {
  const size_t n = omega1.size();
  if (n < 2 || amplitude.size() != n)
    throw std::invalid_argument("autoconvolution: need matched grids with >= 2 points");
  const double dw = omega1[1] - omega1[0];
  AutoconvolutionResult out;
  out.omega2.resize(2 * n - 1);
  out.intensity.resize(2 * n - 1);
  for (size_t k = 0; k < 2 * n - 1; ++k) {
    out.omega2[k] = 2.0 * omega1[0] + k * dw;
    std::complex<double> acc = 0;
    const size_t j_lo = k >= n ? k - n + 1 : 0;
    const size_t j_hi = std::min(k, n - 1);
    for (size_t j = j_lo; j <= j_hi; ++j) acc += amplitude[j] * amplitude[k - j];
    out.intensity[k] = std::norm(acc * dw);
  }
  return out;
}

double dichotomic_fourier_magnitude(double duty_ratio, int harmonic, int samples) {
  if (harmonic < 1) throw std::invalid_argument("poling oracle: harmonic must be >= 1");
  double re = 0, im = 0;
  for (int j = 0; j < samples; ++j) {
    const double f = (static_cast<double>(j) / samples < duty_ratio) ? 1.0 : -1.0;
    const double phase = -2.0 * kPi * harmonic * j / samples;
    re += f * std::cos(phase);
    im += f * std::sin(phase);
  }
  return std::sqrt(re * re + im * im) / samples;
}

double fwhm_of_samples(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("fwhm: need matched arrays with >= 3 points");
  size_t ip = 0;
  for (size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[ip]) ip = i;
  const double half = 0.5 * y[ip];
  double left = x.front(), right = x.back();
  bool found_left = false, found_right = false;
  for (size_t i = ip; i > 0; --i)
    if (y[i - 1] < half && y[i] >= half) {
      left = x[i - 1] + (x[i] - x[i - 1]) * (half - y[i - 1]) / (y[i] - y[i - 1]);
      found_left = true;
      break;
    }
  for (size_t i = ip; i + 1 < y.size(); ++i)
    if (y[i] >= half && y[i + 1] < half) {
      right = x[i] + (x[i + 1] - x[i]) * (half - y[i]) / (y[i] - y[i + 1]);
      found_right = true;
      break;
    }
  if (!found_left || !found_right)
    throw std::runtime_error("fwhm: half maximum not bracketed by the samples");
  return right - left;
}

}  // namespace qpm::oracle
