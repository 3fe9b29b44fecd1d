#include "symext/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace symext::sdp {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

// Inverse square root of a symmetric positive definite matrix.
Mat inv_sqrt(const Mat& m, bool* ok) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.eigenvalues().minCoeff() <= 0) {
    *ok = false;
    return Mat();
  }
  *ok = true;
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

// Largest step length alpha so that s + alpha ds stays positive definite,
// via the minimum eigenvalue of s^{-1/2} ds s^{-1/2}.
double max_step(const Mat& s_inv_sqrt, const Mat& ds) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(s_inv_sqrt * ds * s_inv_sqrt),
                                        Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues().minCoeff();
  if (lam >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

double spd_min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

SpMat to_sparse(const Eigen::MatrixXd& dense, double prune) {
  SpMat out = dense.sparseView(1.0, prune);
  out.makeCompressed();
  return out;
}

SdpSolution solve_inequality(const SdpInequality& raw, const SdpOptions& opts) {
  const int m = static_cast<int>(raw.F.size());
  const int d = static_cast<int>(raw.G.rows());
  if (raw.c.size() != m) throw std::invalid_argument("solve_inequality: |c| != |F|");
  for (const SpMat& f : raw.F)
    if (f.rows() != d || f.cols() != d)
      throw std::invalid_argument("solve_inequality: F_i side mismatch");

  // Scale the whole matrix inequality to unit size. The variables x, both
  // objective values and the duality gap are invariant under this (the dual
  // matrix is unscaled on return).
  const double lmi_scale = 1.0 / std::max(1.0, raw.G.cwiseAbs().maxCoeff());
  SdpInequality problem;
  problem.c = raw.c;
  problem.G = lmi_scale * raw.G;
  problem.F.reserve(m);
  for (const SpMat& f : raw.F) problem.F.push_back(lmi_scale * f);

  auto add_scaled = [](Mat& out, const SpMat& f, double w) {
    if (w == 0.0) return;
    for (int k = 0; k < f.outerSize(); ++k)
      for (SpMat::InnerIterator it(f, k); it; ++it) out(it.row(), it.col()) += w * it.value();
  };
  auto assemble_F = [&](const Vec& x) {
    Mat out = problem.G;
    for (int i = 0; i < m; ++i) add_scaled(out, problem.F[i], x(i));
    return out;
  };
  auto trace_dot = [](const SpMat& f, const Mat& dense) {
    double acc = 0;
    for (int k = 0; k < f.outerSize(); ++k)
      for (SpMat::InnerIterator it(f, k); it; ++it) acc += it.value() * dense(it.row(), it.col());
    return acc;
  };
  const int nthreads = std::max(1, opts.threads);

  SdpSolution sol;
  sol.x = Vec::Zero(m);
  const double tau = 1.0 + problem.G.cwiseAbs().maxCoeff();
  Mat S = tau * Mat::Identity(d, d);  // primal slack, kept positive definite
  Mat Z = tau * Mat::Identity(d, d);  // dual matrix
  const Mat eye = Mat::Identity(d, d);
  const double obj_scale = 1.0 + problem.c.cwiseAbs().maxCoeff();

  // Start the dual matrix exactly feasible whenever a positive definite
  // point of the form tau I + sum gamma_i F_i exists: Newton steps then hold
  // tr(F_i Z) = c_i for the whole run, and the dual residual never has to
  // fight the ill-conditioned endgame.
  {
    Mat gram(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        const double v = Mat(problem.F[i]).cwiseProduct(Mat(problem.F[j])).sum();
        gram(i, j) = v;
        gram(j, i) = v;
      }
    Eigen::LDLT<Mat> gram_ldlt(gram);
    Vec trf(m);
    for (int i = 0; i < m; ++i) trf(i) = Mat(problem.F[i]).trace();
    if (gram_ldlt.info() == Eigen::Success) {
      for (double factor : {1.0, 2.0, 5.0, 10.0, 100.0}) {
        const double t0 = factor * tau;
        const Vec gamma = gram_ldlt.solve(problem.c - t0 * trf);
        Mat cand = t0 * Mat::Identity(d, d);
        for (int i = 0; i < m; ++i) add_scaled(cand, problem.F[i], gamma(i));
        cand = sym(cand);
        Vec resid(m);
        for (int i = 0; i < m; ++i)
          resid(i) = problem.c(i) - cand.cwiseProduct(Mat(problem.F[i])).sum();
        if (resid.cwiseAbs().maxCoeff() > 1e-10 * obj_scale) continue;
        Eigen::SelfAdjointEigenSolver<Mat> es(cand, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() > 1e-6 * t0) {
          Z = cand;
          break;
        }
      }
    }
  }

  double best_score = std::numeric_limits<double>::infinity();
  int stall = 0;
  double last_step = 1.0;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    sol.iterations = iter;
    // Residuals: primal  R_p = S - F(x), dual  r_d = c - A^*(Z).
    const Mat Fx = assemble_F(sol.x);
    const Mat Rp = S - Fx;
    Vec rd(m);
    for (int i = 0; i < m; ++i) rd(i) = problem.c(i) - trace_dot(problem.F[i], Z);
    const double mu = S.cwiseProduct(Z).sum() / d;
    const double pin = Rp.cwiseAbs().maxCoeff();
    const double din = rd.cwiseAbs().maxCoeff();

    sol.primal_obj = problem.c.dot(sol.x);
    sol.dual_obj = -(problem.G.cwiseProduct(Z)).sum();
    sol.gap = S.cwiseProduct(Z).sum();
    const double gap_rel = sol.gap / (1.0 + std::abs(sol.primal_obj));
    const double pin_rel = pin / (1.0 + problem.G.cwiseAbs().maxCoeff());
    const double din_rel = din / obj_scale;
    if (gap_rel <= opts.tol && pin_rel <= opts.feas_tol && din_rel <= opts.feas_tol) {
      sol.status = SdpStatus::OPTIMAL;
      break;
    }
    // Stagnation guard: accept a converged-but-degenerate endgame where only
    // the dual residual resists (still far below the certified slackness).
    // Counts only step-starved iterations so a slow infeasible start is
    // never mistaken for a stall.
    const double score = std::max({gap_rel / opts.tol, pin_rel / opts.feas_tol,
                                   din_rel / opts.feas_tol});
    if (score < 0.9 * best_score) {
      best_score = score;
      stall = 0;
    } else if (++stall >= (last_step > 1e-4 ? 40 : 10)) {
      if (gap_rel <= 1e2 * opts.tol && pin_rel <= 1e2 * opts.feas_tol &&
          din_rel <= 1e3 * opts.feas_tol) {
        sol.status = SdpStatus::OPTIMAL;
        sol.note = "converged with degenerate endgame";
      } else {
        sol.status = SdpStatus::MAX_ITER;
        sol.note = "stalled without reaching tolerances";
      }
      break;
    }
    if (sol.x.cwiseAbs().maxCoeff() > 1e13 || Z.cwiseAbs().maxCoeff() > 1e13) {
      sol.status = SdpStatus::INFEASIBLE_CERTIFICATE;
      sol.note = "iterates diverged: problem unbounded or infeasible";
      break;
    }

    // Cholesky of the slack; S^{-1} drives the Schur complement.
    Eigen::LLT<Mat> llt_s(S);
    if (llt_s.info() != Eigen::Success) {
      sol.status = SdpStatus::MAX_ITER;
      sol.note = "numerical breakdown: slack lost definiteness";
      break;
    }
    const Mat Sinv = llt_s.solve(eye);

    // Schur complement M_ij = tr(F_i S^{-1} F_j Z) (symmetric positive
    // definite for linearly independent F_i). Row blocks are assembled in
    // parallel; every entry is produced by exactly one thread, so the result
    // is identical for any thread count.
    Mat M(m, m);
    auto schur_rows = [&](int lo, int hi) {
      Mat u(d, d);
      for (int i = lo; i < hi; ++i) {
        u.noalias() = Sinv * (problem.F[i] * Z);
        for (int j = i; j < m; ++j) {
          const double v = trace_dot(problem.F[j], u);
          M(i, j) = v;
          M(j, i) = v;
        }
      }
    };
    if (nthreads == 1 || m < 64) {
      schur_rows(0, m);
    } else {
      // Interleave-free contiguous split balanced by the triangular row cost.
      std::vector<int> bounds{0};
      const double total_cost = 0.5 * double(m) * double(m);
      for (int t = 1; t < nthreads; ++t) {
        const double target = total_cost * t / nthreads;
        // rows 0..b contribute m*b - b^2/2.
        int b = static_cast<int>(m - std::sqrt(std::max(0.0, double(m) * m - 2 * target)));
        b = std::clamp(b, bounds.back(), m);
        bounds.push_back(b);
      }
      bounds.push_back(m);
      std::vector<std::thread> pool;
      for (size_t t = 0; t + 1 < bounds.size(); ++t)
        pool.emplace_back(schur_rows, bounds[t], bounds[t + 1]);
      for (auto& th : pool) th.join();
    }
    M = 0.5 * (M + M.transpose());
    // Escalating diagonal regularization keeps the factorization alive in
    // the ill-conditioned endgame.
    Eigen::LLT<Mat> llt(M);
    const double mscale = M.diagonal().maxCoeff();
    for (double jitter = 1e-14; llt.info() != Eigen::Success && jitter <= 1e-8; jitter *= 100)
      llt.compute(M + jitter * mscale * Mat::Identity(m, m));
    if (llt.info() != Eigen::Success) {
      sol.status = SdpStatus::MAX_ITER;
      sol.note = "numerical breakdown: Schur complement not positive definite";
      break;
    }

    // Direction for the linearized complementarity  dS Z + S dZ = Rc:
    //   dZ = S^{-1}(Rc - dS Z), dS = sum_j dx_j F_j - Rp,
    //   Schur rows: sum_j tr(F_i S^{-1} F_j Z) dx_j
    //             = tr(F_i S^{-1}(Rc + Rp Z)) - rd_i.
    auto solve_direction = [&](const Mat& Rc, Vec& dx, Mat& dS, Mat& dZ) {
      Vec rhs(m);
      const Mat t = Sinv * (Rc + Rp * Z);
      for (int i = 0; i < m; ++i) rhs(i) = trace_dot(problem.F[i], t) - rd(i);
      dx = llt.solve(rhs);
      dS = -Rp;
      for (int i = 0; i < m; ++i) add_scaled(dS, problem.F[i], dx(i));
      dZ = sym(Sinv * (Rc - dS * Z));
    };

    bool okS = true, okZ = true;
    const Mat Si = inv_sqrt(S, &okS);
    const Mat Zi = inv_sqrt(Z, &okZ);

    // Step length: eigenvalue estimate when the iterate is comfortably
    // definite, then a Cholesky backtracking guard either way.
    auto step_len = [&](const Mat& base, const Mat& delta, const Mat& base_isqrt, bool est_ok) {
      double a = est_ok ? std::min(1.0, opts.step_fraction * max_step(base_isqrt, delta)) : 1.0;
      for (int back = 0; back < 60 && a > 1e-14; ++back) {
        Eigen::LLT<Mat> chk(sym(base + a * delta));
        if (chk.info() == Eigen::Success) return a;
        a *= 0.5;
      }
      return 0.0;
    };

    // Predictor (affine) direction.
    Vec dx_a;
    Mat dS_a, dZ_a;
    solve_direction(-S * Z, dx_a, dS_a, dZ_a);
    const double ap = step_len(S, dS_a, Si, okS);
    const double ad = step_len(Z, dZ_a, Zi, okZ);
    const double mu_aff = ((S + ap * dS_a).cwiseProduct(Z + ad * dZ_a)).sum() / d;
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
    // Re-center when the previous step collapsed; long pure-Mehrotra steps
    // cannot escape a badly centered iterate.
    if (last_step < 1e-4) sigma = std::max(sigma, 0.5);
    // Corrector with the Mehrotra second-order term.
    Vec dx;
    Mat dS, dZ;
    const Mat Rc = sigma * mu * eye - S * Z - dS_a * dZ_a;
    solve_direction(Rc, dx, dS, dZ);
    double a_p = step_len(S, dS, Si, okS);
    double a_d = step_len(Z, dZ, Zi, okZ);
    // While either side is infeasible, move both by the same fraction;
    // otherwise the primal can rush to its optimal face and the collapsed
    // slack blocks all further dual progress.
    if (pin > opts.feas_tol * (1.0 + problem.G.cwiseAbs().maxCoeff()) ||
        din > 10 * opts.feas_tol * obj_scale)
      a_p = a_d = std::min(a_p, a_d);
    if (getenv("SYMEXT_SDP_TRACE"))
      fprintf(stderr, "iter=%d mu=%.3e gap=%.3e pin=%.2e din=%.2e sig=%.2e ap=%.2e ad=%.2e\n",
              iter, mu, sol.gap, pin, din, sigma, a_p, a_d);
    if (a_p == 0.0 && a_d == 0.0) {
      sol.status = SdpStatus::MAX_ITER;
      sol.note = "numerical breakdown: no admissible step";
      break;
    }
    sol.x += a_p * dx;
    S = sym(S + a_p * dS);
    Z = sym(Z + a_d * dZ);
    last_step = std::max(a_p, a_d);
  }

  // Best-effort recentering: Mehrotra leaves the final iterate far from the
  // central path, which inflates the complementary-slackness certificate.
  // The target is the largest duality measure still inside the gap
  // criterion, where the Newton system is well conditioned again; steps are
  // kept only when the certificate actually improves.
  if (sol.status == SdpStatus::OPTIMAL) {
    const double mu_target =
        0.2 * opts.tol * (1.0 + std::abs(sol.primal_obj)) / d;
    for (int round = 0; round < 6; ++round) {
      const Mat Fx = assemble_F(sol.x);
      const Mat Rp = S - Fx;
      Vec rd(m);
      for (int i = 0; i < m; ++i) rd(i) = problem.c(i) - trace_dot(problem.F[i], Z);
      Eigen::LLT<Mat> llt_s(S);
      if (llt_s.info() != Eigen::Success) break;
      const Mat Sinv = llt_s.solve(eye);
      Mat M(m, m);
      for (int i = 0; i < m; ++i) {
        const Mat u = Sinv * (problem.F[i] * Z);
        for (int j = i; j < m; ++j) {
          const double v = trace_dot(problem.F[j], u);
          M(i, j) = v;
          M(j, i) = v;
        }
      }
      Eigen::LLT<Mat> llt(M);
      const double mscale = M.diagonal().maxCoeff();
      for (double jitter = 1e-14; llt.info() != Eigen::Success && jitter <= 1e-8; jitter *= 100)
        llt.compute(M + jitter * mscale * Mat::Identity(m, m));
      if (llt.info() != Eigen::Success) break;
      const Mat Rc = mu_target * eye - S * Z;
      Vec rhs(m);
      const Mat t = Sinv * (Rc + Rp * Z);
      for (int i = 0; i < m; ++i) rhs(i) = trace_dot(problem.F[i], t) - rd(i);
      const Vec dx = llt.solve(rhs);
      Mat dS = -Rp;
      for (int i = 0; i < m; ++i) add_scaled(dS, problem.F[i], dx(i));
      const Mat dZ = sym(Sinv * (Rc - dS * Z));
      const double slack_old = (S * Z - mu_target * eye).cwiseAbs().maxCoeff();
      double a = 1.0;
      bool stepped = false;
      for (int back = 0; back < 8 && !stepped; ++back, a *= 0.5) {
        const Mat Sn = sym(S + a * dS);
        const Mat Zn = sym(Z + a * dZ);
        Eigen::LLT<Mat> cs(Sn), cz(Zn);
        if (cs.info() != Eigen::Success || cz.info() != Eigen::Success) continue;
        const double slack_new = (Sn * Zn - mu_target * eye).cwiseAbs().maxCoeff();
        const double gap_new = Sn.cwiseProduct(Zn).sum();
        if (slack_new < 0.7 * slack_old &&
            gap_new <= opts.tol * (1.0 + std::abs(sol.primal_obj))) {
          S = Sn;
          Z = Zn;
          sol.x += a * dx;
          stepped = true;
        }
      }
      if (!stepped) break;
    }
    sol.gap = S.cwiseProduct(Z).sum();
  }

  sol.X = assemble_F(sol.x) / lmi_scale;
  sol.Z = lmi_scale * Z;
  sol.primal_obj = problem.c.dot(sol.x);
  sol.dual_obj = -(problem.G.cwiseProduct(Z)).sum();
  sol.gap = sol.primal_obj - sol.dual_obj;
  if (sol.status == SdpStatus::MAX_ITER && sol.note.empty())
    sol.note = "maximum iterations reached";
  return sol;
}

namespace {

// svec with sqrt(2) off-diagonal scaling preserves trace inner products.
Vec svec(const Mat& m) {
  const int d = static_cast<int>(m.rows());
  Vec v(d * (d + 1) / 2);
  int idx = 0;
  const double s2 = std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) v(idx++) = i == j ? m(i, i) : s2 * m(i, j);
  return v;
}

Mat smat(const Vec& v, int d) {
  Mat m(d, d);
  int idx = 0;
  const double s2 = std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      m(i, j) = i == j ? v(idx) : v(idx) / s2;
      m(j, i) = m(i, j);
      ++idx;
    }
  return m;
}

}  // namespace

SdpSolution solve_standard(const SdpStandard& problem, const SdpOptions& opts) {
  const int d = static_cast<int>(problem.C.rows());
  const int p = static_cast<int>(problem.A.size());
  const int nsym = d * (d + 1) / 2;
  if (problem.b.size() != p) throw std::invalid_argument("solve_standard: |b| != |A|");

  // Parametrize the affine set: X = X0 + sum_i x_i B_i with B_i an
  // orthonormal basis of the orthogonal complement of span{A_i}.
  Mat amat(nsym, std::max(p, 1));
  for (int i = 0; i < p; ++i) amat.col(i) = svec(problem.A[i]);
  if (p == 0) amat.setZero();
  Eigen::JacobiSVD<Mat> svd(amat, Eigen::ComputeFullU);
  int arank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-12 * svd.singularValues()(0)) ++arank;
  if (p > 0 && arank < p)
    throw std::invalid_argument("solve_standard: A_i linearly dependent");

  // Least-squares particular solution of tr(A_i X) = b_i.
  Vec x0 = Vec::Zero(nsym);
  if (p > 0) {
    Mat ata = amat.transpose() * amat;
    x0 = amat * ata.ldlt().solve(problem.b);
  }

  SdpInequality ineq;
  const int nfree = nsym - arank;
  ineq.G = smat(x0, d);
  ineq.c.resize(nfree);
  ineq.F.reserve(nfree);
  for (int i = 0; i < nfree; ++i) {
    const Mat bi = smat(svd.matrixU().col(arank + i), d);
    ineq.F.push_back(to_sparse(bi, 1e-14));
    ineq.c(i) = (problem.C.cwiseProduct(bi)).sum();
  }

  SdpSolution sol_in = solve_inequality(ineq, opts);
  SdpSolution out = sol_in;
  out.X = sol_in.X;  // the optimized standard-form X
  out.primal_obj = (problem.C.cwiseProduct(out.X)).sum();
  out.gap = sol_in.X.cwiseProduct(sol_in.Z).sum();
  out.dual_obj = out.primal_obj - out.gap;
  return out;
}

CertifyReport certify(const SdpSolution& solution, const SdpInequality& problem) {
  CertifyReport rep;
  rep.gap = solution.primal_obj - solution.dual_obj;
  rep.slackness_max = (solution.X * solution.Z).cwiseAbs().maxCoeff();
  rep.min_eig_F = spd_min_eig(solution.X);
  rep.min_eig_Z = spd_min_eig(solution.Z);
  double dr = 0;
  for (size_t i = 0; i < problem.F.size(); ++i) {
    double acc = 0;
    const SpMat& f = problem.F[i];
    for (int k = 0; k < f.outerSize(); ++k)
      for (SpMat::InnerIterator it(f, k); it; ++it)
        acc += it.value() * solution.Z(it.row(), it.col());
    dr = std::max(dr, std::abs(problem.c(i) - acc));
  }
  rep.dual_residual = dr;
  return rep;
}

}  // namespace symext::sdp
