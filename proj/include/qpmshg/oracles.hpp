#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace qpm::oracle {

// Reference implementations for validation.  Nothing here shares numerical
// kernels with the main solver: quadrature, root finding and transforms are
// local to this module.

// One slab layer of the 1-D reduction q h'' = (beta^2 - n^2 k0^2) h.
// q = 1 for the TE-form equation, eps_y/eps_z for the TM form.  First and
// last layers are semi-infinite (their thickness is ignored).
struct SlabLayer {
  double thickness_um = 0;
  double n = 1.0;
  double q = 1.0;
};

// n_eff of the given mode order (0 = highest) by transfer-matrix marching and
// bisection of the guidance condition to 1e-10.  Empty when no guided mode.
std::optional<double> slab_effective_index(const std::vector<SlabLayer>& stack,
                                           double lambda_nm, int mode_order);

// Discretize a graded depth profile n(y) on [0, depth] into uniform sublayers
// between air (above) and the substrate (below).
std::vector<SlabLayer> discretize_profile(const std::function<double(double)>& n_of_y,
                                          const std::function<double(double)>& q_of_y,
                                          double depth_um, int sublayers, double n_air,
                                          double q_air, double n_substrate, double q_substrate);

// Marcatili-style separable approximation for a step-index rectangle:
// beta^2 = n_core^2 k0^2 - kx^2 - ky^2 with kx, ky from the two symmetric
// slab problems.  A coarse cross-check (1e-3 class), empty below cutoff.
std::optional<double> marcatili_rect_index(double width_um, double height_um, double n_core,
                                           double n_clad, double lambda_nm, int m, int n);

// |sum_j A(w_j) A(w2 - w_j) dw|^2 on the doubled frequency grid by direct
// summation; the flat-phase-matching limit of the SH spectrum.
struct AutoconvolutionResult {
  std::vector<double> omega2;
  std::vector<double> intensity;
};
AutoconvolutionResult autoconvolution_spectrum(const std::vector<double>& omega1,
                                               const std::vector<std::complex<double>>& amplitude);

// |c_M| of the sampled dichotomic +-1 modulation by direct DFT summation.
double dichotomic_fourier_magnitude(double duty_ratio, int harmonic, int samples = 65536);

// FWHM of a sampled peak by linear interpolation of the half crossings.
double fwhm_of_samples(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qpm::oracle
