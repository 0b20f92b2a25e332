#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "qpmshg/eigensolver.hpp"

using namespace qpm;

namespace {

AssembledProblem matrix_problem(SpMat a, SpMat b) {
  AssembledProblem p;
  p.A = std::move(a);
  p.B = std::move(b);
  p.mesh = nullptr;
  return p;
}

SpMat sparse_identity(int n) {
  SpMat b(n, n);
  b.setIdentity();
  return b;
}

AssembledProblem small_waveguide(Mesh& mesh_out) {
  WaveguideGeometry geom;
  geom.window = {-8.0, 8.0, -3.0, 12.5};
  static DispersionModel disp = DispersionModel::ktp_default();
  mesh_out = build_mesh(geom, 0.7, 2.0);
  return assemble_waveguide(mesh_out, Polarization::TM, 800.0, disp, geom);
}

}  // namespace

TEST_CASE("discrete Laplacian chain matches the dense solver to 1e-10") {
  const int n = 100;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, -2.0);
    if (i > 0) t.emplace_back(i, i - 1, 1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, 1.0);
  }
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  AssembledProblem p = matrix_problem(a, sparse_identity(n));

  Eigen::MatrixXd ad(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(ad);

  EigenRequest req;
  req.sigma = 0.0;  // largest eigenvalues sit just below zero
  req.beta2_min = -0.02;
  req.beta2_max = 0.0;
  req.count = 3;
  req.tol = 1e-12;
  const auto pairs = solve_eigenpairs(p, req);
  REQUIRE(pairs.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(std::fabs(pairs[i].beta_sq - dense.eigenvalues()[n - 1 - i]) < 1e-10);
}

TEST_CASE("diagonal A with identity B returns the diagonal entries") {
  const int n = 12;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, 1.0 + 0.25 * i);
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  AssembledProblem p = matrix_problem(a, sparse_identity(n));
  EigenRequest req;
  req.sigma = 4.0;
  req.beta2_min = 3.0;
  req.beta2_max = 4.0;
  req.count = 10;
  const auto pairs = solve_eigenpairs(p, req);
  REQUIRE(pairs.size() == 3);  // diagonal entries in (3, 4]: 3.25, 3.5, 3.75
  for (size_t i = 0; i + 1 < pairs.size(); ++i) CHECK(pairs[i].beta_sq > pairs[i + 1].beta_sq);
  CHECK(pairs[0].beta_sq == doctest::Approx(3.75).epsilon(1e-12));
  CHECK(pairs[2].beta_sq == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("request validation") {
  EigenRequest req;
  req.sigma = 1.0;
  req.beta2_min = 2.0;  // min above sigma
  req.beta2_max = 3.0;
  CHECK_THROWS_AS(req.validate(), ConfigError);
  req.beta2_min = 0.5;
  req.tol = 1.0;  // out of the allowed band
  CHECK_THROWS_AS(req.validate(), ConfigError);
}

TEST_CASE("guided solve honors the residual contract and B-orthogonality") {
  Mesh mesh;
  AssembledProblem p = small_waveguide(mesh);
  EigenRequest req;
  req.sigma = p.beta2_max;
  req.beta2_min = p.beta2_min;
  req.beta2_max = p.beta2_max;
  req.count = 64;
  req.tol = 1e-9;
  EigenSolveInfo info;
  const auto pairs = solve_eigenpairs(p, req, &info);
  REQUIRE(pairs.size() >= 4);
  CHECK(info.window_exhausted);
  for (const auto& pr : pairs) {
    CHECK(pr.residual <= req.tol);
    const Eigen::VectorXd bu = p.B * pr.u;
    CHECK((p.A * pr.u - pr.beta_sq * bu).norm() / bu.norm() <= req.tol);
  }
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = i + 1; j < pairs.size(); ++j) {
      const double bij = pairs[i].u.dot(p.B * pairs[j].u);
      const double ni = std::sqrt(pairs[i].u.dot(p.B * pairs[i].u));
      const double nj = std::sqrt(pairs[j].u.dot(p.B * pairs[j].u));
      CHECK(std::fabs(bij) / (ni * nj) < 1e-8);
    }
}

TEST_CASE("eigenvalues agree with a dense generalized solve to 1e-8") {
  Mesh mesh;
  AssembledProblem p = small_waveguide(mesh);
  REQUIRE(p.A.rows() <= 2000);
  Eigen::MatrixXd ad(p.A), bd(p.B);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(ad, bd);
  std::vector<double> in_window;
  for (int i = 0; i < dense.eigenvalues().size(); ++i) {
    const double v = dense.eigenvalues()[i];
    if (v >= p.beta2_min && v <= p.beta2_max) in_window.push_back(v);
  }
  std::sort(in_window.rbegin(), in_window.rend());

  EigenRequest req;
  req.sigma = p.beta2_max;
  req.beta2_min = p.beta2_min;
  req.beta2_max = p.beta2_max;
  req.count = 64;
  req.tol = 1e-10;
  const auto pairs = solve_eigenpairs(p, req);
  REQUIRE(pairs.size() == in_window.size());
  for (size_t i = 0; i < pairs.size(); ++i)
    CHECK(std::fabs(pairs[i].beta_sq - in_window[i]) / std::fabs(in_window[i]) < 1e-8);

  // the inertia count agrees with the dense census
  CHECK(count_eigenvalues_in_window(p, p.beta2_min, p.beta2_max) ==
        static_cast<int>(in_window.size()));
}

TEST_CASE("results are shift-invariant inside the guided window") {
  Mesh mesh;
  AssembledProblem p = small_waveguide(mesh);
  EigenRequest req;
  req.beta2_min = p.beta2_min;
  req.beta2_max = p.beta2_max;
  req.count = 8;
  req.tol = 1e-10;
  req.sigma = p.beta2_max;
  const auto a = solve_eigenpairs(p, req);
  req.sigma = 0.3 * p.beta2_min + 0.7 * p.beta2_max;
  const auto b = solve_eigenpairs(p, req);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(std::fabs(a[i].beta_sq - b[i].beta_sq) / a[i].beta_sq < 1e-9);
}

TEST_CASE("fixed seed reproduces bit-identical eigenvalues") {
  Mesh mesh;
  AssembledProblem p = small_waveguide(mesh);
  EigenRequest req;
  req.sigma = p.beta2_max;
  req.beta2_min = p.beta2_min;
  req.beta2_max = p.beta2_max;
  req.count = 5;
  const auto a = solve_eigenpairs(p, req);
  const auto b = solve_eigenpairs(p, req);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].beta_sq == b[i].beta_sq);
    CHECK((a[i].u - b[i].u).norm() == 0.0);
  }
}

TEST_CASE("empty window returns nothing but reports exhaustion") {
  Mesh mesh;
  AssembledProblem p = small_waveguide(mesh);
  EigenRequest req;
  req.sigma = p.beta2_max * 1.5;
  req.beta2_min = p.beta2_max * 1.2;  // above every eigenvalue
  req.beta2_max = p.beta2_max * 1.5;
  req.count = 3;
  EigenSolveInfo info;
  const auto pairs = solve_eigenpairs(p, req, &info);
  CHECK(pairs.empty());
  CHECK(info.window_exhausted);
  CHECK(!info.found_requested);
}
