// scratch: census vs window depth and resolution
#include <cstdio>

#include "qpmshg/modes.hpp"

using namespace qpm;

int main() {
  DispersionModel disp = DispersionModel::ktp_default();
  for (double ymax : {14.0, 15.0, 16.0, 18.0, 20.0}) {
    for (double res : {0.4, 0.3}) {
      WaveguideGeometry geom;
      geom.window.y_max = ymax;
      Mesh mesh = build_mesh(geom, res, 2.0);
      ModeSolveOptions opts;
      opts.resolution_um = res;
      int te8 = mode_census(mesh, Polarization::TE, 800, disp, geom, DepthProfile::Decay, opts);
      int tm8 = mode_census(mesh, Polarization::TM, 800, disp, geom, DepthProfile::Decay, opts);
      int te4 = mode_census(mesh, Polarization::TE, 400, disp, geom, DepthProfile::Decay, opts);
      int tm4 = mode_census(mesh, Polarization::TM, 400, disp, geom, DepthProfile::Decay, opts);
      std::printf("ymax=%4.1f res=%.2f nodes=%6d | 800: TE=%d TM=%d | 400: TE=%d TM=%d\n", ymax,
                  res, mesh.node_count(), te8, tm8, te4, tm4);
    }
  }
  return 0;
}
// margin variant appended via second main guard
