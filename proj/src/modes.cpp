#include "qpmshg/modes.hpp"

#include <algorithm>
#include <cmath>

namespace qpm {

namespace {

// Area-weighted average of the element-constant P1 gradient onto nodes.
void nodal_gradient(const Mesh& mesh, const std::vector<double>& f, std::vector<double>& dfdx,
                    std::vector<double>& dfdy) {
  const int nn = mesh.node_count();
  dfdx.assign(nn, 0.0);
  dfdy.assign(nn, 0.0);
  std::vector<double> wsum(nn, 0.0);
  for (int t = 0; t < mesh.tri_count(); ++t) {
    const auto& tr = mesh.tris[t];
    const double x1 = mesh.node_x[tr[0]], y1 = mesh.node_y[tr[0]];
    const double x2 = mesh.node_x[tr[1]], y2 = mesh.node_y[tr[1]];
    const double x3 = mesh.node_x[tr[2]], y3 = mesh.node_y[tr[2]];
    const double area = mesh.tri_area(t);
    const double b[3] = {(y2 - y3) / (2 * area), (y3 - y1) / (2 * area), (y1 - y2) / (2 * area)};
    const double c[3] = {(x3 - x2) / (2 * area), (x1 - x3) / (2 * area), (x2 - x1) / (2 * area)};
    double gx = 0, gy = 0;
    for (int i = 0; i < 3; ++i) {
      gx += f[tr[i]] * b[i];
      gy += f[tr[i]] * c[i];
    }
    for (int i = 0; i < 3; ++i) {
      dfdx[tr[i]] += gx * area;
      dfdy[tr[i]] += gy * area;
      wsum[tr[i]] += area;
    }
  }
  for (int i = 0; i < nn; ++i) {
    dfdx[i] /= wsum[i];
    dfdy[i] /= wsum[i];
  }
}

std::vector<double> real_part(const Cvec& v) {
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i].real();
  return r;
}
std::vector<double> imag_part(const Cvec& v) {
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i].imag();
  return r;
}

// Sign changes of a sampled line, ignoring anything below the noise floor.
// ambiguous reports counts that appear only marginally above the floor.
int count_sign_changes(const std::vector<double>& vals, double floor, bool& ambiguous) {
  int changes = 0;
  int weak_changes = 0;
  int last_sign = 0, last_weak_sign = 0;
  const double strong = 10.0 * floor;
  for (double v : vals) {
    if (std::fabs(v) > floor) {
      const int s = v > 0 ? 1 : -1;
      if (last_sign != 0 && s != last_sign) ++changes;
      last_sign = s;
    }
    if (std::fabs(v) > strong) {
      const int s = v > 0 ? 1 : -1;
      if (last_weak_sign != 0 && s != last_weak_sign) ++weak_changes;
      last_weak_sign = s;
    }
  }
  ambiguous = (changes != weak_changes);
  return changes;
}

}  // namespace

std::string GuidedMode::label_string() const {
  return "(" + std::to_string(label.m) + "," + std::to_string(label.n) + ")";
}

double integrate_product(const Mesh& mesh, const std::vector<double>& f,
                         const std::vector<double>& g) {
  double total = 0;
  for (int t = 0; t < mesh.tri_count(); ++t) {
    const auto& tr = mesh.tris[t];
    const double area = mesh.tri_area(t);
    const double sf = f[tr[0]] + f[tr[1]] + f[tr[2]];
    const double sg = g[tr[0]] + g[tr[1]] + g[tr[2]];
    const double diag = f[tr[0]] * g[tr[0]] + f[tr[1]] * g[tr[1]] + f[tr[2]] * g[tr[2]];
    total += area / 12.0 * (sf * sg + diag);
  }
  return total;
}

GuidedMode reconstruct_fields(const EigenPair& pair, const AssembledProblem& problem) {
  if (pair.beta_sq <= 0)
    throw NumericalError("mode reconstruction: beta^2 <= 0 (degenerate mode)");
  const Mesh& mesh = *problem.mesh;
  const int nn = mesh.node_count();
  const double beta = std::sqrt(pair.beta_sq);
  const double k0 = problem.k0;

  GuidedMode mode;
  mode.pol = problem.pol;
  mode.lambda_nm = problem.lambda_nm;
  mode.beta = beta;
  mode.n_eff = beta / k0;
  mode.residual = pair.residual;

  // Dominant magnetic component from the eigenvector, zero on the boundary.
  std::vector<double> dom(nn, 0.0);
  for (int d = 0; d < mesh.interior_count(); ++d) dom[mesh.interior_nodes[d]] = pair.u[d];

  std::vector<double> dom_dx, dom_dy;
  nodal_gradient(mesh, dom, dom_dx, dom_dy);

  // h_z = i Z with Z real, from div h = 0.
  std::vector<double> Z(nn);
  for (int i = 0; i < nn; ++i)
    Z[i] = (problem.pol == Polarization::TM ? dom_dx[i] : dom_dy[i]) / beta;
  std::vector<double> Z_dx, Z_dy;
  nodal_gradient(mesh, Z, Z_dx, Z_dy);

  mode.hx.assign(nn, 0.0);
  mode.hy.assign(nn, 0.0);
  mode.hz.assign(nn, 0.0);
  mode.ex.assign(nn, 0.0);
  mode.ey.assign(nn, 0.0);
  mode.ez.assign(nn, 0.0);

  for (int i = 0; i < nn; ++i) {
    const double x = mesh.node_x[i], y = mesh.node_y[i];
    const double ex_n = problem.sampler(Axis::X, x, y);
    const double ey_n = problem.sampler(Axis::Y, x, y);
    const double ez_n = problem.sampler(Axis::Z, x, y);
    const double eps_x = ex_n * ex_n, eps_y = ey_n * ey_n, eps_z = ez_n * ez_n;
    mode.hz[i] = std::complex<double>(0.0, Z[i]);
    if (problem.pol == Polarization::TM) {
      mode.hx[i] = dom[i];
      mode.ex[i] = -Z_dy[i] / (eps_x * k0);
      mode.ey[i] = (Z_dx[i] - beta * dom[i]) / (eps_y * k0);
      mode.ez[i] = std::complex<double>(0.0, -dom_dy[i] / (eps_z * k0));
    } else {
      mode.hy[i] = dom[i];
      mode.ex[i] = (beta * dom[i] - Z_dy[i]) / (eps_x * k0);
      mode.ey[i] = Z_dx[i] / (eps_y * k0);
      mode.ez[i] = std::complex<double>(0.0, dom_dx[i] / (eps_z * k0));
    }
  }

  // Dominant electric component real and positive at its maximum.
  const Cvec& edom = mode.dominant_e();
  size_t imax = 0;
  for (size_t i = 1; i < edom.size(); ++i)
    if (std::abs(edom[i]) > std::abs(edom[imax])) imax = i;
  if (edom[imax].real() < 0) {
    for (Cvec* f : {&mode.hx, &mode.hy, &mode.hz, &mode.ex, &mode.ey, &mode.ez})
      for (auto& v : *f) v = -v;
  }
  return mode;
}

void normalize_power(GuidedMode& mode, const Mesh& mesh) {
  // S_z = Re(e_x h_y* - e_y h_x*)
  const auto exr = real_part(mode.ex), exi = imag_part(mode.ex);
  const auto eyr = real_part(mode.ey), eyi = imag_part(mode.ey);
  const auto hxr = real_part(mode.hx), hxi = imag_part(mode.hx);
  const auto hyr = real_part(mode.hy), hyi = imag_part(mode.hy);
  const double power = integrate_product(mesh, exr, hyr) + integrate_product(mesh, exi, hyi) -
                       integrate_product(mesh, eyr, hxr) - integrate_product(mesh, eyi, hxi);
  if (power <= 0) throw NumericalError("mode normalization: non-positive modal power");
  if (std::fabs(power - 1.0) < 1e-12) {
    mode.normalized = true;
    return;
  }
  const double s = 1.0 / std::sqrt(power);
  for (Cvec* f : {&mode.hx, &mode.hy, &mode.hz, &mode.ex, &mode.ey, &mode.ez})
    for (auto& v : *f) v *= s;
  mode.normalized = true;
}

ModeLabel label_mode(GuidedMode& mode, const Mesh& mesh, double width_um) {
  // Node counting runs on the dominant magnetic component: it is the P1
  // eigenvector itself, free of the differentiation noise the reconstructed
  // e picks up at the surface kink.  Both dominant components share the sign
  // structure (e_dom is -beta/eps times h_dom plus small corrections).
  const Cvec& hdom = mode.dominant_h();
  const int nn = mesh.node_count();
  std::vector<double> dom(nn), intensity(nn);
  double peak_dom = 0;
  for (int i = 0; i < nn; ++i) {
    dom[i] = hdom[i].real();
    intensity[i] = std::norm(mode.ex[i]) + std::norm(mode.ey[i]) + std::norm(mode.ez[i]);
    peak_dom = std::max(peak_dom, std::fabs(dom[i]));
  }
  int ipeak = 0;
  for (int i = 1; i < nn; ++i)
    if (intensity[i] > intensity[ipeak]) ipeak = i;
  const int nx = mesh.nx();
  const int peak_ix = ipeak % nx, peak_iy = ipeak / nx;
  const double floor = 1.0e-3 * peak_dom;

  const auto row_values = [&](double y) {
    std::vector<double> v(mesh.grid_x.size());
    for (size_t ix = 0; ix < mesh.grid_x.size(); ++ix)
      v[ix] = mesh.interpolate(dom, mesh.grid_x[ix], y);
    return v;
  };
  const auto col_values = [&](double x) {
    std::vector<double> v(mesh.grid_y.size());
    for (size_t iy = 0; iy < mesh.grid_y.size(); ++iy)
      v[iy] = mesh.interpolate(dom, x, mesh.grid_y[iy]);
    return v;
  };

  const double x_peak = mesh.grid_x[peak_ix];
  const double y_peak = mesh.grid_y[peak_iy];

  ModeLabel label;
  bool amb_m = false, amb_n = false;
  label.m = count_sign_changes(row_values(y_peak), floor, amb_m);
  label.n = count_sign_changes(col_values(x_peak), floor, amb_n);
  if (amb_m || amb_n) {
    // Fallback cuts offset by w/4 catch cuts running along a nodal line.
    for (const double off : {+0.25 * width_um, -0.25 * width_um}) {
      bool amb2 = false;
      if (amb_m)
        label.m = std::max(label.m, count_sign_changes(row_values(y_peak + off), floor, amb2));
      if (amb_n)
        label.n = std::max(label.n, count_sign_changes(col_values(x_peak + off), floor, amb2));
    }
    label.flagged = true;
  }

  // Parity from the mirror symmetry of the dominant component.
  if (mesh.x_symmetric) {
    double even = 0, odd = 0;
    for (int i = 0; i < nn; ++i) {
      const double vm = dom[mesh.mirror_node[i]];
      even += (dom[i] - vm) * (dom[i] - vm);
      odd += (dom[i] + vm) * (dom[i] + vm);
    }
    mode.parity = even <= odd ? +1 : -1;
  }
  mode.label = label;
  return label;
}

namespace {

EigenRequest guided_request(const AssembledProblem& problem, const ModeSolveOptions& opts) {
  const double n_sub = std::sqrt(problem.beta2_min) / problem.k0;
  double margin = 0.0;
  if (opts.confinement_depth_um > 0) {
    const double kd = problem.k0 * opts.confinement_depth_um;
    margin = 1.0 / (2.0 * n_sub * kd * kd);
  }
  const double n_min = n_sub + margin;
  EigenRequest req;
  req.sigma = problem.beta2_max;
  req.beta2_min = (n_min * problem.k0) * (n_min * problem.k0);
  req.beta2_max = problem.beta2_max;
  req.count = opts.max_modes;
  req.tol = opts.tol;
  req.seed = opts.seed;
  req.max_subspace = opts.max_subspace;
  return req;
}

}  // namespace

std::vector<GuidedMode> solve_guided_modes(const Mesh& mesh, Polarization pol, double lambda_nm,
                                           const DispersionModel& dispersion,
                                           const WaveguideGeometry& geom, DepthProfile profile,
                                           const ModeSolveOptions& opts, EigenSolveInfo* info) {
  AssembledProblem problem = assemble_waveguide(mesh, pol, lambda_nm, dispersion, geom, profile);
  const EigenRequest req = guided_request(problem, opts);
  const std::vector<EigenPair> pairs = solve_eigenpairs(problem, req, info);

  std::vector<GuidedMode> modes;
  modes.reserve(pairs.size());
  for (const auto& p : pairs) {
    GuidedMode m = reconstruct_fields(p, problem);
    normalize_power(m, mesh);
    label_mode(m, mesh, geom.width_um);
    modes.push_back(std::move(m));
  }
  return modes;
}

int mode_census(const Mesh& mesh, Polarization pol, double lambda_nm,
                const DispersionModel& dispersion, const WaveguideGeometry& geom,
                DepthProfile profile, const ModeSolveOptions& opts) {
  AssembledProblem problem = assemble_waveguide(mesh, pol, lambda_nm, dispersion, geom, profile);
  // Counting needs no eigenvectors: Sylvester inertia at the window edges.
  const EigenRequest req = guided_request(problem, opts);
  return count_eigenvalues_in_window(problem, req.beta2_min, req.beta2_max);
}

Raster render_intensity(const std::vector<const GuidedMode*>& modes,
                        const std::vector<double>& weights, const Mesh& mesh, int nx, int ny) {
  if (modes.empty() || modes.size() != weights.size())
    throw ConfigError("render: modes and weights must be non-empty and matched");
  const int nn = mesh.node_count();
  std::vector<double> total(nn, 0.0);
  for (size_t k = 0; k < modes.size(); ++k) {
    const GuidedMode& m = *modes[k];
    for (int i = 0; i < nn; ++i)
      total[i] += weights[k] * (std::norm(m.ex[i]) + std::norm(m.ey[i]) + std::norm(m.ez[i]));
  }
  Raster r;
  r.nx = nx;
  r.ny = ny;
  r.x0 = mesh.grid_x.front();
  r.y0 = mesh.grid_y.front();
  r.dx = (mesh.grid_x.back() - r.x0) / (nx - 1);
  r.dy = (mesh.grid_y.back() - r.y0) / (ny - 1);
  r.values.resize(static_cast<size_t>(nx) * ny);
  double peak = 0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double v = mesh.interpolate(total, r.x0 + ix * r.dx, r.y0 + iy * r.dy);
      r.values[static_cast<size_t>(iy) * nx + ix] = v;
      peak = std::max(peak, v);
    }
  if (peak > 0)
    for (auto& v : r.values) v /= peak;
  return r;
}

}  // namespace qpm
