#include "qpmshg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace qpm {

namespace {

// Insert mandatory cuts, drop duplicates and anything outside [lo, hi].
std::vector<double> collect_cuts(double lo, double hi, std::vector<double> cuts) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (c < lo - 1e-12 || c > hi + 1e-12) continue;
    if (!out.empty() && std::fabs(c - out.back()) < 1e-9) continue;
    out.push_back(c);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

struct Band {
  double lo, hi, target;
};

// Subdivide each span uniformly with spacing bounded by the coarse target and
// by every band covering the span.
std::vector<double> fill_spans(const std::vector<double>& cuts, const std::vector<Band>& bands,
                               double coarse) {
  std::vector<double> pts;
  pts.push_back(cuts.front());
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    double target = coarse;
    for (const Band& band : bands)
      if (mid >= band.lo - 1e-12 && mid <= band.hi + 1e-12) target = std::min(target, band.target);
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / target - 1e-9)));
    for (int k = 1; k <= n; ++k) pts.push_back(a + (b - a) * k / n);
  }
  return pts;
}

}  // namespace

Mesh build_mesh(const WaveguideGeometry& geom, double resolution_um, double grading,
                const std::vector<double>& extra_x_cuts,
                const std::vector<double>& extra_y_cuts) {
  geom.validate();
  if (resolution_um <= 0) throw ConfigError("mesh resolution must be positive");
  if (grading < 1.0) throw ConfigError("mesh grading must be >= 1");

  const Window& win = geom.window;
  const double half_w = 0.5 * geom.width_um;
  const double fine = resolution_um / grading;

  std::vector<double> x_cuts = {-half_w - 1.0, -half_w, -half_w + 1.0,
                                half_w - 1.0,  half_w,  half_w + 1.0};
  x_cuts.insert(x_cuts.end(), extra_x_cuts.begin(), extra_x_cuts.end());
  for (double c : extra_x_cuts) x_cuts.push_back(-c);  // keep the grid symmetric
  // The air-side evanescent tail decays on a ~1/(k0 sqrt(n_eff^2 - 1)) scale
  // and alternates in sign on P1 elements coarser than that, so the air band
  // is resolved until the tail is far below the labeling noise floor.
  std::vector<double> y_cuts = {-1.0, -0.1, 0.0, 0.1, 1.0};
  y_cuts.insert(y_cuts.end(), extra_y_cuts.begin(), extra_y_cuts.end());

  Mesh mesh;
  mesh.grid_x = fill_spans(collect_cuts(win.x_min, win.x_max, x_cuts),
                           {{-half_w - 1.0, -half_w + 1.0, fine}, {half_w - 1.0, half_w + 1.0, fine}},
                           resolution_um);
  mesh.grid_y = fill_spans(collect_cuts(win.y_min, win.y_max, y_cuts),
                           {{-1.0, 1.0, fine},
                            {-1.0, 0.0, std::min(fine, 0.05)},
                            {-0.1, 0.1, std::min(fine, 0.025)}},
                           resolution_um);

  const int nx = mesh.nx(), ny = mesh.ny();
  mesh.node_x.resize(static_cast<size_t>(nx) * ny);
  mesh.node_y.resize(static_cast<size_t>(nx) * ny);
  mesh.on_boundary.assign(static_cast<size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int id = mesh.node_id(ix, iy);
      mesh.node_x[id] = mesh.grid_x[ix];
      mesh.node_y[id] = mesh.grid_y[iy];
      if (ix == 0 || ix == nx - 1 || iy == 0 || iy == ny - 1) mesh.on_boundary[id] = 1;
    }

  mesh.tris.reserve(static_cast<size_t>(nx - 1) * (ny - 1) * 2);
  for (int iy = 0; iy + 1 < ny; ++iy)
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const int a = mesh.node_id(ix, iy), b = mesh.node_id(ix + 1, iy);
      const int c = mesh.node_id(ix + 1, iy + 1), d = mesh.node_id(ix, iy + 1);
      const double cx = 0.5 * (mesh.grid_x[ix] + mesh.grid_x[ix + 1]);
      if (cx >= 0.0) {  // diagonal a-c, mirrored to b-d on the other side
        mesh.tris.push_back({a, b, c});
        mesh.tris.push_back({a, c, d});
      } else {
        mesh.tris.push_back({a, b, d});
        mesh.tris.push_back({b, c, d});
      }
    }

  mesh.interior_index.assign(mesh.node_count(), -1);
  for (int id = 0; id < mesh.node_count(); ++id)
    if (!mesh.on_boundary[id]) {
      mesh.interior_index[id] = static_cast<int>(mesh.interior_nodes.size());
      mesh.interior_nodes.push_back(id);
    }

  mesh.x_symmetric = true;
  for (int ix = 0; ix < nx; ++ix)
    if (std::fabs(mesh.grid_x[ix] + mesh.grid_x[nx - 1 - ix]) > 1e-9) mesh.x_symmetric = false;
  mesh.mirror_node.assign(mesh.node_count(), -1);
  if (mesh.x_symmetric)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        mesh.mirror_node[mesh.node_id(ix, iy)] = mesh.node_id(nx - 1 - ix, iy);

  for (int t = 0; t < mesh.tri_count(); ++t)
    if (mesh.tri_area(t) <= 1e-6)
      throw NumericalError("degenerate triangle in mesh (area <= 1e-6 um^2)");
  return mesh;
}

double Mesh::tri_area(int t) const {
  const auto& tr = tris[t];
  const double x1 = node_x[tr[0]], y1 = node_y[tr[0]];
  const double x2 = node_x[tr[1]], y2 = node_y[tr[1]];
  const double x3 = node_x[tr[2]], y3 = node_y[tr[2]];
  return 0.5 * ((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1));
}

void Mesh::tri_centroid(int t, double& cx, double& cy) const {
  const auto& tr = tris[t];
  cx = (node_x[tr[0]] + node_x[tr[1]] + node_x[tr[2]]) / 3.0;
  cy = (node_y[tr[0]] + node_y[tr[1]] + node_y[tr[2]]) / 3.0;
}

double Mesh::interpolate(const std::vector<double>& nodal, double x, double y) const {
  x = std::clamp(x, grid_x.front(), grid_x.back());
  y = std::clamp(y, grid_y.front(), grid_y.back());
  const auto cell = [](const std::vector<double>& g, double v) {
    auto it = std::upper_bound(g.begin(), g.end(), v);
    int i = static_cast<int>(it - g.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(g.size()) - 2);
  };
  const int ix = cell(grid_x, x), iy = cell(grid_y, y);
  // Bilinear on the structured cell; identical to P1 on the two triangles up
  // to the diagonal term, adequate for rasters and cut lines.
  const double fx = (x - grid_x[ix]) / (grid_x[ix + 1] - grid_x[ix]);
  const double fy = (y - grid_y[iy]) / (grid_y[iy + 1] - grid_y[iy]);
  const double v00 = nodal[node_id(ix, iy)], v10 = nodal[node_id(ix + 1, iy)];
  const double v01 = nodal[node_id(ix, iy + 1)], v11 = nodal[node_id(ix + 1, iy + 1)];
  return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
         v11 * fx * fy;
}

void Mesh::export_text(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open mesh export file: " + path);
  std::fprintf(f, "# nodes %d\n", node_count());
  for (int i = 0; i < node_count(); ++i)
    std::fprintf(f, "%.9g %.9g %d\n", node_x[i], node_y[i], static_cast<int>(on_boundary[i]));
  std::fprintf(f, "# triangles %d\n", tri_count());
  for (const auto& t : tris) std::fprintf(f, "%d %d %d\n", t[0], t[1], t[2]);
  std::fclose(f);
}

}  // namespace qpm
