#include "qpmshg/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>

namespace qpm {

void EigenRequest::validate() const {
  if (!(beta2_min < sigma && sigma <= beta2_max))
    throw ConfigError("eigen request: need beta2_min < sigma <= beta2_max");
  if (count < 1) throw ConfigError("eigen request: count must be >= 1");
  if (!(tol > 0 && tol <= 1.0e-4)) throw ConfigError("eigen request: tolerance in (0, 1e-4]");
}

namespace {

Eigen::VectorXd start_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    // uniform in (-1, 1), independent of stdlib distribution internals
    const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    v[i] = 2.0 * u - 1.0;
  }
  return v;
}

int parity_sign(const AssembledProblem& p, const Eigen::VectorXd& u) {
  if (!p.mesh) return 0;
  const Mesh& mesh = *p.mesh;
  if (!mesh.x_symmetric) return 0;
  double even = 0, odd = 0;
  for (int d = 0; d < mesh.interior_count(); ++d) {
    const int node = mesh.interior_nodes[d];
    const int dm = mesh.interior_index[mesh.mirror_node[node]];
    if (dm < 0) continue;
    even += (u[d] - u[dm]) * (u[d] - u[dm]);
    odd += (u[d] + u[dm]) * (u[d] + u[dm]);
  }
  return even <= odd ? +1 : -1;
}

}  // namespace

int count_eigenvalues_above(const SpMat& A, const SpMat& B, double tau) {
  const double scale = std::max(std::fabs(tau), 1.0);
  for (int attempt = 0; attempt < 3; ++attempt) {
    SpMat shifted = A - (tau + attempt * 1e-9 * scale) * B;
    shifted.makeCompressed();
    Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) continue;
    const auto& d = ldlt.vectorD();
    int positives = 0;
    bool suspicious = false;
    double dmax = 0;
    for (int i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::fabs(d[i]));
    for (int i = 0; i < d.size(); ++i) {
      if (std::fabs(d[i]) < 1e-13 * dmax) suspicious = true;
      if (d[i] > 0) ++positives;
    }
    if (!suspicious) return positives;
  }
  throw NumericalError("inertia count: LDLT factorization failed near tau");
}

int count_eigenvalues_in_window(const AssembledProblem& problem, double beta2_min,
                                double beta2_max) {
  return count_eigenvalues_above(problem.A, problem.B, beta2_min) -
         count_eigenvalues_above(problem.A, problem.B, beta2_max);
}

std::vector<EigenPair> solve_eigenpairs(const AssembledProblem& problem,
                                        const EigenRequest& request, EigenSolveInfo* info) {
  request.validate();
  const SpMat& A = problem.A;
  const SpMat& B = problem.B;
  const int n = static_cast<int>(A.rows());
  if (n == 0) throw NumericalError("eigensolver: empty problem");

  EigenSolveInfo local_info;
  EigenSolveInfo& out_info = info ? *info : local_info;

  // Factor (A - sigma B); a shift landing on an eigenvalue is cured by a
  // relative perturbation, giving up after three retries.
  Eigen::SparseLU<SpMat> lu;
  double sigma = request.sigma;
  const double scale = std::max(std::fabs(request.beta2_max), 1.0);
  for (int attempt = 0;; ++attempt) {
    SpMat shifted = A - sigma * B;
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() == Eigen::Success) break;
    out_info.factorization_retries = attempt + 1;
    if (attempt >= 2)
      throw NumericalError("eigensolver: factorization failed after 3 shift retries");
    sigma += scale * 1.0e-8 * (attempt + 1);
  }

  const auto b_dot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.dot(B * y);
  };

  // The window population is known exactly up front.
  const int in_window = count_eigenvalues_in_window(problem, request.beta2_min, request.beta2_max);
  const int needed = std::min(request.count, in_window);
  if (needed == 0) {
    out_info.found_requested = false;
    out_info.window_exhausted = true;
    if (info) *info = out_info;
    return {};
  }

  const int m_cap = std::min(request.max_subspace, n);
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(m_cap + 1);
  std::vector<double> alpha, beta;  // Lanczos tridiagonal

  std::mt19937_64 restart_rng(request.seed ^ 0x9e3779b97f4a7c15ull);
  Eigen::VectorXd v = start_vector(n, request.seed);
  v /= std::sqrt(b_dot(v, v));
  basis.push_back(v);

  struct Candidate {
    double beta_sq;
    Eigen::VectorXd x;
    double residual;
    bool converged;
  };
  std::vector<Candidate> cands;

  // Ritz extraction.  Vectors (and true residuals) are only built for values
  // whose tridiagonal residual estimate is already small and which matter for
  // the window bookkeeping; everything else stays a cheap unconverged entry.
  const auto run_ritz = [&]() {
    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < m; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    const double beta_last = (m >= 1) ? beta[m - 1] : 0.0;

    cands.clear();
    for (int i = 0; i < m; ++i) {
      const double theta = es.eigenvalues()[i];
      if (std::fabs(theta) < 1e-300) continue;
      const double beta_sq = sigma + 1.0 / theta;
      const double est = std::fabs(beta_last * es.eigenvectors()(m - 1, i));
      const bool near_window = beta_sq >= request.beta2_min - 1e-6 * scale;
      const bool cheap_ok = est <= std::max(1e-12, 1e-7 * std::fabs(theta));
      if (!(near_window && cheap_ok)) {
        cands.push_back({beta_sq, Eigen::VectorXd(), 1.0, false});
        continue;
      }
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < m; ++j) x += es.eigenvectors()(j, i) * basis[j];
      x /= std::sqrt(b_dot(x, x));
      const Eigen::VectorXd bx = B * x;
      const double rayleigh = x.dot(A * x);  // polish the eigenvalue
      const double res = (A * x - rayleigh * bx).norm() / bx.norm();
      cands.push_back({rayleigh, std::move(x), res, res <= request.tol});
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.beta_sq > b.beta_sq; });
  };

  // In-window means beta2_min < beta^2 <= beta2_max, matching the inertia count.
  const auto accepted_count = [&]() {
    int accepted = 0;
    for (const auto& c : cands)
      if (c.converged && c.beta_sq > request.beta2_min && c.beta_sq <= request.beta2_max)
        ++accepted;
    return accepted;
  };

  int m = 0;
  while (true) {
    const int m_next = std::min(m_cap, m == 0 ? std::min(2 * needed + 16, m_cap) : m + 16);
    for (; m < m_next; ++m) {
      Eigen::VectorXd w = lu.solve(B * basis[m]);
      const double a = b_dot(w, basis[m]);
      alpha.push_back(a);
      w -= a * basis[m];
      if (m > 0) w -= beta[m - 1] * basis[m - 1];
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= m; ++i) w -= b_dot(w, basis[i]) * basis[i];
      double nb = std::sqrt(std::max(b_dot(w, w), 0.0));
      if (nb < 1e-13) {
        // invariant subspace: continue in a fresh direction
        w = start_vector(n, restart_rng());
        for (int pass = 0; pass < 2; ++pass)
          for (int i = 0; i <= m; ++i) w -= b_dot(w, basis[i]) * basis[i];
        nb = std::sqrt(std::max(b_dot(w, w), 0.0));
        if (nb < 1e-13) {
          basis.push_back(Eigen::VectorXd::Zero(n));
          beta.push_back(0.0);
          ++m;
          break;
        }
        beta.push_back(0.0);
      } else {
        beta.push_back(nb);
      }
      basis.push_back(w / nb);
    }
    run_ritz();
    const int accepted = accepted_count();
    out_info.iterations = m;
    out_info.window_exhausted = accepted >= in_window;
    if (accepted >= needed || m >= m_cap) break;
  }

  std::vector<EigenPair> result;
  for (auto& c : cands) {
    if (!c.converged) continue;
    if (c.beta_sq <= request.beta2_min || c.beta_sq > request.beta2_max) continue;
    EigenPair p;
    p.beta_sq = c.beta_sq;
    p.u = std::move(c.x);
    p.residual = c.residual;
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::fabs(p.u[i]) > std::fabs(p.u[imax])) imax = i;
    if (p.u[imax] < 0) p.u = -p.u;  // deterministic sign
    result.push_back(std::move(p));
    if (static_cast<int>(result.size()) >= request.count) break;
  }

  // Stable ordering of near-degenerate pairs: even x-parity first.
  for (size_t i = 0; i + 1 < result.size(); ++i) {
    const double rel = std::fabs(result[i].beta_sq - result[i + 1].beta_sq) /
                       std::max(std::fabs(result[i].beta_sq), 1.0);
    if (rel < 1e-9 && parity_sign(problem, result[i].u) < parity_sign(problem, result[i + 1].u))
      std::swap(result[i], result[i + 1]);
  }

  out_info.found_requested = static_cast<int>(result.size()) >= request.count;
  if (info) *info = out_info;
  return result;
}

}  // namespace qpm
