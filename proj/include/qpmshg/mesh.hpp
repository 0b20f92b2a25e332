#pragma once

#include <array>
#include <vector>

#include "qpmshg/materials.hpp"

namespace qpm {

// Conforming triangulation of the transverse window, built over a graded
// tensor grid whose breakpoints include the material discontinuities
// (y = 0 air interface, x = +-w/2 core edges) so no element straddles them.
// Node id = iy * nx + ix.  Diagonals are mirrored about x = 0 so the mesh
// carries the x symmetry of the index profile.
struct Mesh {
  std::vector<double> grid_x, grid_y;         // structured breakpoints
  std::vector<double> node_x, node_y;         // per-node coordinates
  std::vector<std::array<int, 3>> tris;       // CCW connectivity
  std::vector<char> on_boundary;              // window perimeter flags
  std::vector<int> interior_index;            // node -> dof, -1 on boundary
  std::vector<int> interior_nodes;            // dof -> node
  std::vector<int> mirror_node;               // node -> node mirrored in x (-1 if none)
  bool x_symmetric = false;

  int nx() const { return static_cast<int>(grid_x.size()); }
  int ny() const { return static_cast<int>(grid_y.size()); }
  int node_count() const { return static_cast<int>(node_x.size()); }
  int tri_count() const { return static_cast<int>(tris.size()); }
  int interior_count() const { return static_cast<int>(interior_nodes.size()); }
  int node_id(int ix, int iy) const { return iy * nx() + ix; }

  double tri_area(int t) const;
  void tri_centroid(int t, double& cx, double& cy) const;

  // P1 interpolation of a nodal field; clamps to the window.
  double interpolate(const std::vector<double>& nodal, double x, double y) const;

  // Plain text export: nodes, triangles, boundary flags.
  void export_text(const std::string& path) const;
};

// resolution: target edge length away from interfaces; within 1 um of y = 0
// and x = +-w/2 the target is resolution / grading.  Extra cuts let tests
// align the grid with synthetic profile steps.
Mesh build_mesh(const WaveguideGeometry& geom, double resolution_um, double grading,
                const std::vector<double>& extra_x_cuts = {},
                const std::vector<double>& extra_y_cuts = {});

}  // namespace qpm
