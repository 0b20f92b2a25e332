#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "qpmshg/modes.hpp"
#include "qpmshg/oracles.hpp"

using namespace qpm;

namespace {

const DispersionModel kDisp = DispersionModel::ktp_default();

struct PaperDevice {
  WaveguideGeometry geom;
  Mesh mesh;
  ModeSolveOptions opts;
  PaperDevice() { mesh = build_mesh(geom, opts.resolution_um, opts.grading); }
  std::vector<GuidedMode> solve(Polarization pol, double lambda) {
    return solve_guided_modes(mesh, pol, lambda, kDisp, geom, DepthProfile::Decay, opts);
  }
};

PaperDevice& device() {
  static PaperDevice d;
  return d;
}

}  // namespace

TEST_CASE("census and labels at the pump wavelength") {
  auto& d = device();
  const auto te = d.solve(Polarization::TE, 800.0);
  const auto tm = d.solve(Polarization::TM, 800.0);
  CHECK(te.size() == 3);
  CHECK(tm.size() == 5);
  CHECK(mode_census(d.mesh, Polarization::TE, 800, kDisp, d.geom, DepthProfile::Decay, d.opts) == 3);
  CHECK(mode_census(d.mesh, Polarization::TM, 800, kDisp, d.geom, DepthProfile::Decay, d.opts) == 5);

  CHECK(te[0].label == ModeLabel{0, 0});
  CHECK(te[0].parity == +1);
  std::set<std::pair<int, int>> tm_labels;
  for (const auto& m : tm) tm_labels.insert({m.label.m, m.label.n});
  CHECK(tm_labels == std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 2}});
  std::set<std::pair<int, int>> te_labels;
  for (const auto& m : te) te_labels.insert({m.label.m, m.label.n});
  CHECK(te_labels == std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}});
  for (const auto& m : tm) CHECK(m.parity == (m.label.m % 2 == 0 ? +1 : -1));

  // n_eff strictly inside the guided window
  for (const auto& m : te) {
    CHECK(m.n_eff > 1.75719);
    CHECK(m.n_eff < 1.75719 + 0.009);
  }
}

TEST_CASE("plane-wave limit: h_z vanishes when the envelope is flat") {
  WaveguideGeometry geom;
  geom.width_um = 2.0;
  geom.depth_um = 2.0;
  geom.window = {-6.0, 6.0, -5.0, 5.0};
  const Mesh mesh = build_mesh(geom, 0.4, 1.0);
  AssembledProblem p = assemble(mesh, Polarization::TM, 800.0,
                                IndexSampler{[](Axis, double, double) { return 1.5; }});
  EigenPair pair;
  pair.beta_sq = std::pow(1.4 * p.k0, 2);
  pair.u = Eigen::VectorXd::Ones(mesh.interior_count());
  const GuidedMode mode = reconstruct_fields(pair, p);
  // interior bulk away from the Dirichlet ring: gradients of a constant vanish
  double hz_max = 0;
  for (int i = 0; i < mesh.node_count(); ++i)
    if (std::fabs(mesh.node_x[i]) < 3.0 && std::fabs(mesh.node_y[i]) < 2.0)
      hz_max = std::max(hz_max, std::abs(mode.hz[i]));
  CHECK(hz_max < 1e-12);
}

TEST_CASE("degenerate beta is rejected in reconstruction") {
  auto& d = device();
  AssembledProblem p = assemble_waveguide(d.mesh, Polarization::TE, 800.0, kDisp, d.geom);
  EigenPair pair;
  pair.beta_sq = -1.0;
  pair.u = Eigen::VectorXd::Ones(d.mesh.interior_count());
  CHECK_THROWS_AS(reconstruct_fields(pair, p), NumericalError);
}

TEST_CASE("semi-vectorial smallness of the non-dominant electric components") {
  auto& d = device();
  const auto te = d.solve(Polarization::TE, 800.0);
  const GuidedMode& f = te[0];
  double ex_peak = 0, ey_peak = 0, ez_peak = 0;
  for (size_t i = 0; i < f.ex.size(); ++i) {
    ex_peak = std::max(ex_peak, std::abs(f.ex[i]));
    ey_peak = std::max(ey_peak, std::abs(f.ey[i]));
    ez_peak = std::max(ez_peak, std::abs(f.ez[i]));
  }
  CHECK(ey_peak <= 0.15 * ex_peak);
  CHECK(ez_peak <= 0.15 * ex_peak);
}

TEST_CASE("electric and magnetic field energies balance") {
  auto& d = device();
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    const auto modes = d.solve(pol, 800.0);
    const GuidedMode& f = modes[0];
    std::vector<double> e_density(d.mesh.node_count()), h_density(d.mesh.node_count()),
        ones(d.mesh.node_count(), 1.0);
    for (int i = 0; i < d.mesh.node_count(); ++i) {
      const double x = d.mesh.node_x[i], y = d.mesh.node_y[i];
      const double ex = kDisp.refractive_index(Axis::X, 800, x, y, d.geom);
      const double ey = kDisp.refractive_index(Axis::Y, 800, x, y, d.geom);
      const double ez = kDisp.refractive_index(Axis::Z, 800, x, y, d.geom);
      e_density[i] = ex * ex * std::norm(f.ex[i]) + ey * ey * std::norm(f.ey[i]) +
                     ez * ez * std::norm(f.ez[i]);
      h_density[i] = std::norm(f.hx[i]) + std::norm(f.hy[i]) + std::norm(f.hz[i]);
    }
    const double we = integrate_product(d.mesh, e_density, ones);
    const double wh = integrate_product(d.mesh, h_density, ones);
    CHECK(we / wh == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("power normalization is idempotent") {
  auto& d = device();
  auto modes = d.solve(Polarization::TM, 800.0);
  GuidedMode m = modes[0];
  CHECK(m.normalized);
  const Cvec before = m.ey;
  normalize_power(m, d.mesh);  // second call must be an exact no-op
  for (size_t i = 0; i < before.size(); ++i) CHECK(m.ey[i] == before[i]);
}

TEST_CASE("odd modes integrate to zero against even weights") {
  auto& d = device();
  const auto te = d.solve(Polarization::TE, 800.0);
  const GuidedMode* odd = nullptr;
  for (const auto& m : te)
    if (m.label == ModeLabel{1, 0}) odd = &m;
  REQUIRE(odd != nullptr);
  std::vector<double> f(d.mesh.node_count()), w(d.mesh.node_count()), af(d.mesh.node_count());
  for (int i = 0; i < d.mesh.node_count(); ++i) {
    f[i] = odd->ex[i].real();
    af[i] = std::fabs(f[i]);
    const double x = d.mesh.node_x[i], y = d.mesh.node_y[i];
    w[i] = std::exp(-(x * x) / 18.0 - (y - 3) * (y - 3) / 12.0);  // even in x
  }
  const double overlap = std::fabs(integrate_product(d.mesh, f, w));
  const double scale = integrate_product(d.mesh, af, w);
  CHECK(overlap / scale < 1e-3);
}

TEST_CASE("slab oracle agrees with the x-collapsed FEM profile") {
  WaveguideGeometry geom;
  geom.window = {-40.0, 40.0, -5.0, 40.0};
  const Mesh mesh = build_mesh(geom, 0.5, 2.0);
  const double lambda = 800.0;
  for (Polarization pol : {Polarization::TE, Polarization::TM}) {
    const Axis ax = transverse_axis(pol);
    const double n0 = kDisp.substrate_index(ax, lambda);
    const double dn = kDisp.surface_increment(ax, lambda);
    const double nz0 = kDisp.substrate_index(Axis::Z, lambda);
    // x-uniform profile: the rect factor removed, erfc depth kept
    IndexSampler sampler{[&, pol](Axis a, double, double y) {
      if (y < 0) return 1.0;
      const double g = std::erfc(y / geom.depth_um);
      if (a == Axis::Z) return nz0;
      const double base = kDisp.substrate_index(a, lambda);
      const double inc = kDisp.surface_increment(a, lambda);
      return base + inc * g;
    }};
    AssembledProblem p = assemble(mesh, pol, lambda, sampler);
    p.beta2_min = std::pow(n0 * p.k0, 2);
    p.beta2_max = std::pow((n0 + dn) * p.k0, 2);
    EigenRequest req;
    req.sigma = p.beta2_max;
    req.beta2_min = p.beta2_min;
    req.beta2_max = p.beta2_max;
    req.count = 2;
    const auto pairs = solve_eigenpairs(p, req);
    REQUIRE(pairs.size() == 2);

    const auto n_of_y = [&](double y) { return n0 + dn * std::erfc(y / geom.depth_um); };
    const auto q_of_y = [&](double y) {
      if (pol == Polarization::TE) return 1.0;
      const double ny = n_of_y(y);
      return ny * ny / (nz0 * nz0);
    };
    const double q_sub = pol == Polarization::TE ? 1.0 : n0 * n0 / (nz0 * nz0);
    const auto stack = oracle::discretize_profile(n_of_y, q_of_y, 40.0, 400, 1.0, 1.0, n0, q_sub);
    for (int order = 0; order < 2; ++order) {
      const auto oracle_neff = oracle::slab_effective_index(stack, lambda, order);
      REQUIRE(oracle_neff.has_value());
      const double fem_neff = std::sqrt(pairs[order].beta_sq) / p.k0;
      CHECK(std::fabs(fem_neff - *oracle_neff) <= 1e-4);
    }
  }
}

TEST_CASE("rasters: fundamental single lobe, odd mode split across the axis") {
  auto& d = device();
  const auto te = d.solve(Polarization::TE, 800.0);
  const Raster fund = render_intensity(te[0], d.mesh, 121, 101);
  int imax = 0;
  for (size_t i = 1; i < fund.values.size(); ++i)
    if (fund.values[i] > fund.values[imax]) imax = static_cast<int>(i);
  const double x_at_max = fund.x0 + (imax % fund.nx) * fund.dx;
  const double y_at_max = fund.y0 + (imax / fund.nx) * fund.dy;
  CHECK(std::fabs(x_at_max) < 2.5);
  CHECK(y_at_max > 0.0);
  CHECK(y_at_max < 10.0);

  const GuidedMode* odd = nullptr;
  for (const auto& m : te)
    if (m.label == ModeLabel{1, 0}) odd = &m;
  REQUIRE(odd);
  const Raster split = render_intensity(*odd, d.mesh, 121, 101);
  // null along x = 0: the central column stays below 5% of the peak
  const int center_ix = static_cast<int>(std::lround((0.0 - split.x0) / split.dx));
  double center_max = 0;
  for (int iy = 0; iy < split.ny; ++iy) center_max = std::max(center_max, split.at(center_ix, iy));
  CHECK(center_max < 0.05);
  // and two lobes: maxima on both sides
  double left = 0, right = 0;
  for (int iy = 0; iy < split.ny; ++iy)
    for (int ix = 0; ix < split.nx; ++ix) {
      const double x = split.x0 + ix * split.dx;
      if (x < -0.5) left = std::max(left, split.at(ix, iy));
      if (x > 0.5) right = std::max(right, split.at(ix, iy));
    }
  CHECK(left > 0.9);
  CHECK(right > 0.9);
}

TEST_CASE("white-light render is a single connected bright region") {
  auto& d = device();
  const auto te = d.solve(Polarization::TE, 800.0);
  const auto tm = d.solve(Polarization::TM, 800.0);
  std::vector<const GuidedMode*> all;
  for (const auto& m : te) all.push_back(&m);
  for (const auto& m : tm) all.push_back(&m);
  const Raster white =
      render_intensity(all, std::vector<double>(all.size(), 1.0), d.mesh, 121, 101);
  // flood fill the 0.35-level set
  std::vector<int> comp(white.values.size(), -1);
  int ncomp = 0;
  for (int start = 0; start < static_cast<int>(white.values.size()); ++start) {
    if (white.values[start] < 0.35 || comp[start] >= 0) continue;
    std::vector<int> stack{start};
    comp[start] = ncomp;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int ix = cur % white.nx, iy = cur / white.nx;
      const int nbr[4][2] = {{ix + 1, iy}, {ix - 1, iy}, {ix, iy + 1}, {ix, iy - 1}};
      for (const auto& nb : nbr) {
        if (nb[0] < 0 || nb[0] >= white.nx || nb[1] < 0 || nb[1] >= white.ny) continue;
        const int id = nb[1] * white.nx + nb[0];
        if (white.values[id] >= 0.35 && comp[id] < 0) {
          comp[id] = ncomp;
          stack.push_back(id);
        }
      }
    }
    ++ncomp;
  }
  CHECK(ncomp == 1);
}

TEST_CASE("window independence and mesh-refinement convergence of the fundamental") {
  WaveguideGeometry geom;
  const DispersionModel& disp = kDisp;
  ModeSolveOptions opts;
  opts.max_modes = 1;

  const Mesh base = build_mesh(geom, 0.4, 2.0);
  const auto m0 = solve_guided_modes(base, Polarization::TE, 800, disp, geom,
                                     DepthProfile::Decay, opts);
  REQUIRE(!m0.empty());

  WaveguideGeometry larger = geom;
  larger.window = {-22.5, 22.5, -7.5, 60.0};
  const Mesh big = build_mesh(larger, 0.4, 2.0);
  const auto m1 = solve_guided_modes(big, Polarization::TE, 800, disp, larger,
                                     DepthProfile::Decay, opts);
  REQUIRE(!m1.empty());
  const double k0 = 2 * M_PI / 0.8;
  CHECK(std::fabs(m1[0].beta - m0[0].beta) < 1e-6 * k0);

  const Mesh fine = build_mesh(geom, 0.2, 2.0);
  const auto m2 = solve_guided_modes(fine, Polarization::TE, 800, disp, geom,
                                     DepthProfile::Decay, opts);
  REQUIRE(!m2.empty());
  CHECK(std::fabs(m2[0].n_eff - m0[0].n_eff) < 1e-5);
}
