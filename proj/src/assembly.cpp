#include "qpmshg/assembly.hpp"

#include <cmath>
#include <vector>

namespace qpm {

IndexSampler make_waveguide_sampler(const DispersionModel& dispersion,
                                    const WaveguideGeometry& geom, double lambda_nm,
                                    DepthProfile profile) {
  return IndexSampler{[dispersion, geom, lambda_nm, profile](Axis a, double x, double y) {
    return dispersion.refractive_index(a, lambda_nm, x, y, geom, profile);
  }};
}

AssembledProblem assemble(const Mesh& mesh, Polarization pol, double lambda_nm,
                          const IndexSampler& sampler) {
  AssembledProblem p;
  p.pol = pol;
  p.lambda_nm = lambda_nm;
  p.k0 = 2.0 * 3.14159265358979323846 / (lambda_nm * 1.0e-3);
  p.mesh = &mesh;
  p.sampler = sampler;

  const int ndof = mesh.interior_count();
  std::vector<Eigen::Triplet<double>> ta, tb;
  ta.reserve(static_cast<size_t>(mesh.tri_count()) * 9);
  tb.reserve(static_cast<size_t>(mesh.tri_count()) * 9);

  const double k0sq = p.k0 * p.k0;
  for (int t = 0; t < mesh.tri_count(); ++t) {
    const auto& tr = mesh.tris[t];
    const double x1 = mesh.node_x[tr[0]], y1 = mesh.node_y[tr[0]];
    const double x2 = mesh.node_x[tr[1]], y2 = mesh.node_y[tr[1]];
    const double x3 = mesh.node_x[tr[2]], y3 = mesh.node_y[tr[2]];
    const double area = mesh.tri_area(t);
    // P1 shape gradients.
    const double b[3] = {(y2 - y3) / (2 * area), (y3 - y1) / (2 * area), (y1 - y2) / (2 * area)};
    const double c[3] = {(x3 - x2) / (2 * area), (x1 - x3) / (2 * area), (x2 - x1) / (2 * area)};

    double cx, cy;
    mesh.tri_centroid(t, cx, cy);
    const double nx = sampler(Axis::X, cx, cy);
    const double ny = sampler(Axis::Y, cx, cy);
    const double nz = sampler(Axis::Z, cx, cy);
    const double ex = nx * nx, ey = ny * ny, ez = nz * nz;

    double px, qy, et;  // coefficients on u_xx, u_yy and the k0^2 shift
    if (pol == Polarization::TE) {
      px = ex / ez;
      qy = 1.0;
      et = ex;
    } else {
      px = 1.0;
      qy = ey / ez;
      et = ey;
    }

    for (int i = 0; i < 3; ++i) {
      const int di = mesh.interior_index[tr[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = mesh.interior_index[tr[j]];
        if (dj < 0) continue;
        const double stiff = area * (px * b[i] * b[j] + qy * c[i] * c[j]);
        const double mass = area / ((i == j) ? 6.0 : 12.0);
        ta.emplace_back(di, dj, -stiff + k0sq * et * mass);
        tb.emplace_back(di, dj, mass);
      }
    }
  }

  p.A.resize(ndof, ndof);
  p.B.resize(ndof, ndof);
  p.A.setFromTriplets(ta.begin(), ta.end());
  p.B.setFromTriplets(tb.begin(), tb.end());

  // Element-constant coefficients keep the weak form symmetric; measure and
  // symmetrize anyway so the eigensolver can rely on it.
  SpMat At = SpMat(p.A.transpose());
  SpMat diff = p.A - At;
  double asym = 0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it)
      asym = std::max(asym, std::fabs(it.value()));
  p.asymmetry = asym;
  p.A = 0.5 * (p.A + At);
  p.A.makeCompressed();
  p.B.makeCompressed();
  return p;
}

AssembledProblem assemble_waveguide(const Mesh& mesh, Polarization pol, double lambda_nm,
                                    const DispersionModel& dispersion,
                                    const WaveguideGeometry& geom, DepthProfile profile) {
  AssembledProblem p =
      assemble(mesh, pol, lambda_nm, make_waveguide_sampler(dispersion, geom, lambda_nm, profile));
  const Axis ax = transverse_axis(pol);
  const double n0 = dispersion.substrate_index(ax, lambda_nm);
  const double npk = n0 + dispersion.surface_increment(ax, lambda_nm);
  p.beta2_min = (n0 * p.k0) * (n0 * p.k0);
  p.beta2_max = (npk * p.k0) * (npk * p.k0);
  return p;
}

}  // namespace qpm
