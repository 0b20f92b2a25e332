// scratch: dump vertical cut of the TM fundamental at 800 nm
#include <cstdio>

#include "qpmshg/modes.hpp"

using namespace qpm;

int main() {
  WaveguideGeometry geom;
  DispersionModel disp = DispersionModel::ktp_default();
  Mesh mesh = build_mesh(geom, 0.4, 2.0);
  ModeSolveOptions opts;
  opts.max_modes = 8;
  auto modes = solve_guided_modes(mesh, Polarization::TM, 800, disp, geom, DepthProfile::Decay, opts);
  const GuidedMode& f = modes[0];
  std::printf("mode %s n_eff=%.6f\n", f.label_string().c_str(), f.n_eff);

  // dominant component along x = x_peak
  const Cvec& edom = f.dominant_e();
  std::vector<double> dom(mesh.node_count());
  double peak = 0;
  for (int i = 0; i < mesh.node_count(); ++i) {
    dom[i] = edom[i].real();
    peak = std::max(peak, std::fabs(dom[i]));
  }
  // find peak node
  int ip = 0;
  std::vector<double> inten(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    inten[i] = std::norm(f.ex[i]) + std::norm(f.ey[i]) + std::norm(f.ez[i]);
    if (inten[i] > inten[ip]) ip = i;
  }
  int ix = ip % mesh.nx(), iy = ip / mesh.nx();
  std::printf("peak at x=%.3f y=%.3f, floor=%.3e\n", mesh.grid_x[ix], mesh.grid_y[iy], 1e-3 * peak);
  for (int j = 0; j < mesh.ny(); ++j) {
    double v = dom[mesh.node_id(ix, j)];
    if (std::fabs(v) > 1e-5 * peak && mesh.grid_y[j] < 21.0)
      std::printf("  y=%8.3f  ey=%+.6e %s\n", mesh.grid_y[j], v,
                  std::fabs(v) > 1e-3 * peak ? "*" : "");
  }
  // also dump hx along the same column near the surface
  std::printf("hx near surface:\n");
  for (int j = 0; j < mesh.ny(); ++j) {
    if (mesh.grid_y[j] < -1.5 || mesh.grid_y[j] > 1.5) continue;
    std::printf("  y=%8.3f  hx=%+.6e ey=%+.6e\n", mesh.grid_y[j],
                f.hx[mesh.node_id(ix, j)].real(), f.ey[mesh.node_id(ix, j)].real());
  }
  return 0;
}
