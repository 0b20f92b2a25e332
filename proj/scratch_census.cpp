// scratch checkpoint (not part of the build): mode census + labels + n_eff
#include <chrono>
#include <cstdio>

#include "qpmshg/modes.hpp"

using namespace qpm;

int main() {
  WaveguideGeometry geom;
  DispersionModel disp = DispersionModel::ktp_default();

  std::printf("dispersion check:\n");
  std::printf("  n_x0(800)=%.6f dn_x(800)=%.6f\n", disp.substrate_index(Axis::X, 800),
              disp.surface_increment(Axis::X, 800));
  std::printf("  n_y0(800)=%.6f dn_y(800)=%.6f\n", disp.substrate_index(Axis::Y, 800),
              disp.surface_increment(Axis::Y, 800));
  std::printf("  n_x0(400)=%.6f n_y0(400)=%.6f n_z0(800)=%.6f n_z0(400)=%.6f\n",
              disp.substrate_index(Axis::X, 400), disp.substrate_index(Axis::Y, 400),
              disp.substrate_index(Axis::Z, 800), disp.substrate_index(Axis::Z, 400));

  Mesh mesh = build_mesh(geom, 0.4, 2.0);
  std::printf("mesh: %d nodes, %d tris, %d interior\n", mesh.node_count(), mesh.tri_count(),
              mesh.interior_count());

  ModeSolveOptions opts;
  for (double lambda : {800.0, 400.0}) {
    for (Polarization pol : {Polarization::TE, Polarization::TM}) {
      auto t0 = std::chrono::steady_clock::now();
      EigenSolveInfo info;
      auto modes = solve_guided_modes(mesh, pol, lambda, disp, geom, DepthProfile::Decay, opts, &info);
      auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("lambda=%4.0f %s: %zu modes (%.1fs, iters=%d, exhausted=%d)\n", lambda,
                  polarization_name(pol), modes.size(), dt, info.iterations,
                  (int)info.window_exhausted);
      size_t show = std::min<size_t>(modes.size(), 8);
      for (size_t i = 0; i < show; ++i)
        std::printf("   %s n_eff=%.6f parity=%+d res=%.2e flag=%d\n",
                    modes[i].label_string().c_str(), modes[i].n_eff, modes[i].parity,
                    modes[i].residual, (int)modes[i].label.flagged);
    }
  }
  return 0;
}
