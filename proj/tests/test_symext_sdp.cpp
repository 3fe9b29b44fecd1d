#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "symext/analytic.hpp"
#include "symext/bell.hpp"
#include "symext/gf2.hpp"
#include "symext/symext_sdp.hpp"
#include "test_util.hpp"

using namespace symext;
using bell::BellDiagonalDistribution;
using symext_sdp::SymmetryMode;
namespace tu = symext::testutil;

namespace {

const double kS5 = std::sqrt(5.0);

BellDiagonalDistribution table_state(int k, int n, gf2::Word prow_bits_msb_first) {
  const double p = bell::threshold_p(n);
  std::vector<gf2::Word> rows{prow_bits_msb_first | (gf2::Word(1) << k)};
  const gf2::ParityCheckMatrix h(1, n, rows);
  return bell::lad_apply(h, bell::iid(bell::isotropic(p), n));
}

}  // namespace

TEST_CASE("projection tables load and verify") {
  const symext_sdp::PauliTermTable& t = symext_sdp::pauli_term_table();
  CHECK(t.P.size() == 16);
  CHECK(t.Q.size() == 16);
  CHECK(t.R.size() == 10);
  CHECK(t.T.size() == 10);
  // Spot entries from the published tables.
  CHECK((t.Q[1] - kron(pauli(0), pauli(1))).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((t.Q[2] + kron(pauli(3), pauli(1))).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((t.Q[8] + kron(pauli(1), pauli(3))).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((t.T[1] - (kron(pauli(0), pauli(1)) - kron(pauli(3), pauli(1)))).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK((t.T[9] - (kron(pauli(0), pauli(2)) - kron(pauli(3), pauli(2)))).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("open parameter counts match the published table") {
  CHECK(symext_sdp::count_open_parameters(1, SymmetryMode::GENERIC_BELL_DIAG) == 3);
  CHECK(symext_sdp::count_open_parameters(2, SymmetryMode::GENERIC_BELL_DIAG) == 60);
  CHECK(symext_sdp::count_open_parameters(3, SymmetryMode::GENERIC_BELL_DIAG) == 1008);
  CHECK(symext_sdp::count_open_parameters(4, SymmetryMode::GENERIC_BELL_DIAG) == 16320);
}

TEST_CASE("phase symmetry strictly shrinks the search space") {
  for (int n = 1; n <= 4; ++n)
    CHECK(symext_sdp::count_open_parameters(n, SymmetryMode::S_SYMMETRIC) <
          symext_sdp::count_open_parameters(n, SymmetryMode::GENERIC_BELL_DIAG));
}

TEST_CASE("build produces the expected problem shapes") {
  const symext_sdp::SymextProblem p1 =
      symext_sdp::build(bell::isotropic(0.1), SymmetryMode::GENERIC_BELL_DIAG);
  CHECK(p1.open_parameters == 3);
  CHECK(p1.sdp.G.rows() == 4);
  CHECK(p1.sdp.F.size() == 4);  // t plus the three open coefficients
  CHECK(p1.sdp.c(0) == 1.0);

  const symext_sdp::SymextProblem p2 =
      symext_sdp::build(bell::iid(bell::isotropic(0.1), 2), SymmetryMode::GENERIC_BELL_DIAG);
  CHECK(p2.open_parameters == 60);
  CHECK(p2.sdp.G.rows() == 16);

  const symext_sdp::SymextProblem p1s =
      symext_sdp::build(bell::isotropic(0.1), SymmetryMode::S_SYMMETRIC);
  CHECK(p1s.open_parameters == 2);
  CHECK_THROWS_AS(
      symext_sdp::build(BellDiagonalDistribution(1, Eigen::Vector4d(0.6, 0.3, 0.0, 0.1)),
                        SymmetryMode::S_SYMMETRIC),
      std::invalid_argument);
}

TEST_CASE("minimal t on stock states") {
  const auto mm = symext_sdp::min_t(bell::isotropic(0.25), SymmetryMode::GENERIC_BELL_DIAG);
  CHECK(mm.t == doctest::Approx(-1.0).epsilon(1e-7));
  const auto phip = symext_sdp::min_t(BellDiagonalDistribution(1, Eigen::Vector4d(1, 0, 0, 0)),
                                      SymmetryMode::GENERIC_BELL_DIAG);
  CHECK(phip.t > 1e-3);  // no extension
  // Known published rows for k = 3, n = 4.
  CHECK(symext_sdp::min_t(table_state(3, 4, 0b110), SymmetryMode::S_SYMMETRIC).t ==
        doctest::Approx(-0.1452).epsilon(4e-3));
  CHECK(symext_sdp::min_t(table_state(3, 4, 0b111), SymmetryMode::S_SYMMETRIC).t ==
        doctest::Approx(-0.0537).epsilon(4e-3));
  CHECK(symext_sdp::min_t(table_state(3, 4, 0b001), SymmetryMode::S_SYMMETRIC).t ==
        doctest::Approx(-0.0455).epsilon(4e-3));
}

TEST_CASE("sign of minimal t agrees with the analytic decider") {
  std::mt19937_64 rng(71);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const BellDiagonalDistribution s(1, tu::random_bell_weights(rng));
    const auto res = symext_sdp::min_t(s, SymmetryMode::GENERIC_BELL_DIAG);
    if (std::abs(res.t) <= 1e-6) continue;
    ++checked;
    const bool sdp_yes = res.t <= 1e-7;
    CHECK(sdp_yes == (analytic::decide_bell_diag(s).verdict == analytic::Verdict::YES));
  }
  CHECK(checked > 300);
}

TEST_CASE("modes agree for phase-symmetric states") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Vector4d w = tu::random_bell_weights(rng);
    w(2) = w(1);
    w /= w.sum();
    const BellDiagonalDistribution s(1, w);
    const BellDiagonalDistribution two = bell::iid(s, 2);
    const double t_gen = symext_sdp::min_t(two, SymmetryMode::GENERIC_BELL_DIAG).t;
    const double t_sym = symext_sdp::min_t(two, SymmetryMode::S_SYMMETRIC).t;
    CHECK(std::abs(t_gen - t_sym) < 1e-6);
  }
}

TEST_CASE("projected and full formulations agree at one pair") {
  // Solve the unprojected 8-dimensional problem directly from the P table
  // and compare with the projected 4-dimensional route.
  std::mt19937_64 rng(73);
  const symext_sdp::PauliTermTable& table = symext_sdp::pauli_term_table();
  for (int trial = 0; trial < 8; ++trial) {
    const BellDiagonalDistribution s(1, tu::random_bell_weights(rng));
    const double t_proj = symext_sdp::min_t(s, SymmetryMode::GENERIC_BELL_DIAG).t;

    const symext_sdp::SymextProblem proj = symext_sdp::build(s, SymmetryMode::GENERIC_BELL_DIAG);
    sdp::SdpInequality full;
    full.G = Eigen::MatrixXd::Zero(8, 8);
    for (size_t i = 0; i < proj.fixed_terms.size(); ++i)
      full.G += proj.fixed_values[i] * Eigen::MatrixXd(table.P[proj.fixed_terms[i].slots[0] - 1].real());
    full.F.push_back(sdp::to_sparse(Eigen::MatrixXd::Identity(8, 8)));
    for (const auto& orbit : proj.open_terms) {
      Eigen::MatrixXd f = Eigen::MatrixXd::Zero(8, 8);
      for (const auto& term : orbit) f += term.sign * table.P[term.slots[0] - 1].real();
      full.F.push_back(sdp::to_sparse(f));
    }
    full.c = Eigen::VectorXd::Zero(full.F.size());
    full.c(0) = 1.0;
    const sdp::SdpSolution sol = sdp::solve_inequality(full);
    REQUIRE(sol.status == sdp::SdpStatus::OPTIMAL);
    CHECK(std::abs(sol.x(0) - t_proj) < 1e-8);
  }
}

TEST_CASE("mixing toward maximally mixed never raises minimal t") {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::Vector4d w = tu::random_bell_weights(rng);
    double prev = symext_sdp::min_t(BellDiagonalDistribution(1, w), SymmetryMode::GENERIC_BELL_DIAG).t;
    for (double lam : {0.25, 0.5, 0.75, 1.0}) {
      const Eigen::Vector4d mix = (1 - lam) * w + lam * Eigen::Vector4d::Constant(0.25);
      const double t = symext_sdp::min_t(BellDiagonalDistribution(1, mix),
                                         SymmetryMode::GENERIC_BELL_DIAG).t;
      CHECK(t <= prev + 1e-7);
      prev = t;
    }
  }
}

TEST_CASE("extension extraction verifies on representative states") {
  auto verify = [](const BellDiagonalDistribution& s, SymmetryMode mode) {
    const symext_sdp::SymextProblem prob = symext_sdp::build(s, mode);
    const sdp::SdpSolution sol = sdp::solve_inequality(prob.sdp);
    REQUIRE(sol.status == sdp::SdpStatus::OPTIMAL);
    REQUIRE(sol.x(0) <= 1e-7);
    const DensityMatrix ext = symext_sdp::extract_extension(prob, sol);
    const int n = s.pairs;
    // Swap all B_k <-> B'_k.
    std::vector<int> perm(3 * n);
    for (int k = 0; k < n; ++k) {
      perm[3 * k] = 3 * k;
      perm[3 * k + 1] = 3 * k + 2;
      perm[3 * k + 2] = 3 * k + 1;
    }
    const Matc swapped = permute_subsystems(ext.entries(), ext.dims(), perm);
    CHECK((ext.entries() - swapped).cwiseAbs().maxCoeff() < 1e-8);
    std::vector<int> keep;
    for (int k = 0; k < n; ++k) {
      keep.push_back(3 * k);
      keep.push_back(3 * k + 1);
    }
    const Matc red = partial_trace(ext.entries(), ext.dims(), keep);
    const Matc expect = bell::to_density_matrix(s.normalized()).entries();
    CHECK((red - expect).cwiseAbs().maxCoeff() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Matc> es(ext.entries(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
  };
  verify(bell::isotropic(0.25), SymmetryMode::GENERIC_BELL_DIAG);                 // maximally mixed
  verify(bell::isotropic(1.0 / 12), SymmetryMode::GENERIC_BELL_DIAG);             // one-way border
  verify(bell::rcad(bell::isotropic(bell::threshold_p(3)), 3).normalized(),
         SymmetryMode::S_SYMMETRIC);                                              // boundary state
  verify(table_state(3, 4, 0b110).normalized(), SymmetryMode::S_SYMMETRIC);       // best n=4 class
  CHECK_THROWS_AS(
      symext_sdp::extract_extension(
          symext_sdp::build(BellDiagonalDistribution(1, Eigen::Vector4d(1, 0, 0, 0)),
                            SymmetryMode::GENERIC_BELL_DIAG),
          sdp::solve_inequality(
              symext_sdp::build(BellDiagonalDistribution(1, Eigen::Vector4d(1, 0, 0, 0)),
                                SymmetryMode::GENERIC_BELL_DIAG)
                  .sdp)),
      std::invalid_argument);
}

TEST_CASE("boundary states sit at vanishing t") {
  const double p1 = bell::threshold_p(1);
  const double t = symext_sdp::min_t(bell::isotropic(p1), SymmetryMode::GENERIC_BELL_DIAG).t;
  CHECK(std::abs(t) < 1e-6);
}
