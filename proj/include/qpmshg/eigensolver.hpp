#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qpmshg/assembly.hpp"

namespace qpm {

struct EigenRequest {
  double sigma = 0;                  // shift, beta^2 scale [1/um^2]
  int count = 8;                     // eigenpairs wanted inside the window
  double beta2_min = 0, beta2_max = 0;
  double tol = 1.0e-9;               // ||A u - beta^2 B u|| / ||B u||
  std::uint64_t seed = 20120612;     // start-vector seed
  int max_subspace = 360;

  void validate() const;
};

struct EigenPair {
  double beta_sq = 0;
  Eigen::VectorXd u;  // interior-node coefficients, B-normalized
  double residual = 0;
};

struct EigenSolveInfo {
  bool found_requested = false;   // count pairs found in the window
  bool window_exhausted = false;  // converged past the lower window edge
  int iterations = 0;
  int factorization_retries = 0;
};

// Number of generalized eigenvalues of A u = lambda B u above tau, by
// Sylvester inertia of the LDL^T factorization of (A - tau B).
int count_eigenvalues_above(const SpMat& A, const SpMat& B, double tau);

// Exact number of eigenvalues in (beta2_min, beta2_max].
int count_eigenvalues_in_window(const AssembledProblem& problem, double beta2_min,
                                double beta2_max);

// Shift-invert Lanczos in the B inner product with full reorthogonalization;
// (A - sigma B) is factorized once per shift by sparse LU.  The window
// population is known exactly from inertia counts, so iteration stops as soon
// as the requested pairs have converged.  Returned pairs lie in
// [beta2_min, beta2_max], sorted by beta^2 descending, pairwise B-orthogonal,
// deterministic for a fixed seed.
std::vector<EigenPair> solve_eigenpairs(const AssembledProblem& problem,
                                        const EigenRequest& request,
                                        EigenSolveInfo* info = nullptr);

}  // namespace qpm
