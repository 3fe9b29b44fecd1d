// Self-contained dense semidefinite-program solver for real symmetric
// problems in inequality and standard form. Primal-dual path following with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step; dense
// Cholesky on the Schur complement.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace symext::sdp {

using SpMat = Eigen::SparseMatrix<double>;

// minimize c^T x  subject to  F(x) = G + sum_i x_i F_i >= 0.
struct SdpInequality {
  Eigen::VectorXd c;
  std::vector<SpMat> F;   // symmetric, linearly independent
  Eigen::MatrixXd G;      // symmetric
};

// minimize tr(C X)  subject to  tr(A_i X) = b_i, X >= 0.
struct SdpStandard {
  Eigen::MatrixXd C;
  std::vector<Eigen::MatrixXd> A;
  Eigen::VectorXd b;
};

enum class SdpStatus { OPTIMAL, MAX_ITER, INFEASIBLE_CERTIFICATE };

struct SdpSolution {
  Eigen::VectorXd x;      // inequality-form variables
  Eigen::MatrixXd X;      // primal matrix iterate: F(x) for inequality form,
                          // the optimized X for standard form
  Eigen::MatrixXd Z;      // dual matrix iterate
  double primal_obj = 0;
  double dual_obj = 0;
  double gap = 0;
  SdpStatus status = SdpStatus::MAX_ITER;
  int iterations = 0;
  std::string note;
};

struct SdpOptions {
  double tol = 1e-9;        // relative duality gap target
  int max_iter = 200;
  double step_fraction = 0.98;
  double feas_tol = 1e-9;
  int threads = 1;          // Schur assembly threads (deterministic split)
};

SdpSolution solve_inequality(const SdpInequality& problem, const SdpOptions& opts = {});
SdpSolution solve_standard(const SdpStandard& problem, const SdpOptions& opts = {});

struct CertifyReport {
  double gap = 0;                 // primal_obj - dual_obj
  double slackness_max = 0;       // max |(F(x) Z)_{ij}|
  double min_eig_F = 0;
  double min_eig_Z = 0;
  double dual_residual = 0;       // max_i |c_i - tr(F_i Z)|
};

CertifyReport certify(const SdpSolution& solution, const SdpInequality& problem);

SpMat to_sparse(const Eigen::MatrixXd& dense, double prune = 0.0);

}  // namespace symext::sdp
