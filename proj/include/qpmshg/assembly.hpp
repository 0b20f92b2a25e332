#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "qpmshg/mesh.hpp"

namespace qpm {

using SpMat = Eigen::SparseMatrix<double>;

// Index sampler decouples assembly from the materials module so tests can
// inject synthetic profiles (uniform media, step rectangles, slab collapses).
struct IndexSampler {
  std::function<double(Axis, double x, double y)> n;
  double operator()(Axis a, double x, double y) const { return n(a, x, y); }
};

IndexSampler make_waveguide_sampler(const DispersionModel& dispersion,
                                    const WaveguideGeometry& geom, double lambda_nm,
                                    DepthProfile profile = DepthProfile::Decay);

// Galerkin discretization of the decoupled semi-vectorial equations on P1
// triangles with element-constant coefficients sampled at centroids and
// Dirichlet zero on the window perimeter:
//   quasi-TE (h_y):  (eps_x/eps_z) u_xx + u_yy + eps_x k0^2 u = beta^2 u
//   quasi-TM (h_x):  u_xx + (eps_y/eps_z) u_yy + eps_y k0^2 u = beta^2 u
// Eigenvalues of A u = beta^2 B u approximate the guided spectrum from above.
struct AssembledProblem {
  SpMat A, B;  // A symmetric (symmetrized after assembly), B SPD mass
  Polarization pol = Polarization::TE;
  double lambda_nm = 0;
  double k0 = 0;  // 2 pi / lambda [1/um]
  const Mesh* mesh = nullptr;
  IndexSampler sampler;
  // Guided window: substrate and surface-peak indices of the transverse axis.
  double beta2_min = 0, beta2_max = 0;
  double asymmetry = 0;  // max |A - A^T| before symmetrization
};

AssembledProblem assemble(const Mesh& mesh, Polarization pol, double lambda_nm,
                          const IndexSampler& sampler);

// Production assembly: sampler from the dispersion model plus the guided
// window bounds of the polarization's transverse axis.
AssembledProblem assemble_waveguide(const Mesh& mesh, Polarization pol, double lambda_nm,
                                    const DispersionModel& dispersion,
                                    const WaveguideGeometry& geom,
                                    DepthProfile profile = DepthProfile::Decay);

// Transverse axis whose permittivity sets the eigenvalue shift (TE -> x, TM -> y).
inline Axis transverse_axis(Polarization pol) {
  return pol == Polarization::TE ? Axis::X : Axis::Y;
}

}  // namespace qpm
