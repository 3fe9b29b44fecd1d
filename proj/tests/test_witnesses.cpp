#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "symext/bell.hpp"
#include "symext/witnesses.hpp"

using namespace symext;
namespace wit = symext::witnesses;

namespace {

const double kS5 = std::sqrt(5.0);

double verify_all(const wit::WitnessBlock& block) {
  const DensityMatrix ext = wit::reconstruct_extension(block);
  const Matc& rho = ext.entries();
  Eigen::SelfAdjointEigenSolver<Matc> es(rho, Eigen::EigenvaluesOnly);
  const double psd_defect = std::max(0.0, -es.eigenvalues().minCoeff());
  const Matc p = swap_last_two({4, 4, 4});
  const double swap_defect = (rho - p * rho * p.adjoint()).cwiseAbs().maxCoeff();
  const Matc red = partial_trace(rho, {4, 4, 4}, {0, 1});
  const double trace_defect = (red - wit::expected_reduction(block)).cwiseAbs().maxCoeff();
  return std::max({psd_defect, swap_defect, trace_defect});
}

}  // namespace

TEST_CASE("diagonal 4x4 block at the published angle triples") {
  SUBCASE("split (2,2,1) of five pairs") {
    const wit::WitnessBlock b = wit::m4_diag_from_cos(kS5 / 3, kS5 / 3, 1 / kS5);
    CHECK(b.psd);
    CHECK(b.auxiliary.at("f") ==
          doctest::Approx((140 - 44 * kS5) / (36 * kS5)).epsilon(1e-12));
    CHECK(verify_all(b) < 1e-8);
  }
  SUBCASE("split (3,1,1) of five pairs") {
    const wit::WitnessBlock b = wit::m4_diag_from_cos(2 / kS5, 1 / kS5, 1 / kS5);
    CHECK(b.psd);
    // The chapter quotes 78 - 30 sqrt5 for this value; the natural
    // normalization carries the same 1/(20 sqrt5) factor as its sibling.
    CHECK(b.auxiliary.at("f") == doctest::Approx((78 - 30 * kS5) / (20 * kS5)).epsilon(1e-12));
    CHECK(verify_all(b) < 1e-8);
  }
  SUBCASE("the positivity factor is monotone in each cosine") {
    const int grid = 20;
    for (int i = 0; i + 1 < grid; ++i)
      for (int j = 0; j < grid; ++j)
        for (int k = 0; k < grid; ++k) {
          auto at = [&](int a, int b, int c) {
            const double lo = 0.05, hi = 0.95;
            auto val = [&](int t) { return lo + (hi - lo) * t / (grid - 1); };
            return wit::m4_positivity_f(val(a), val(b), val(c));
          };
          CHECK(at(i + 1, j, k) >= at(i, j, k) - 1e-12);
        }
  }
}

TEST_CASE("equal-angle 4x4 block for block sizes three and four") {
  SUBCASE("blocksize three") {
    const wit::WitnessBlock b = wit::m4_equal_angle_from_cos(1 / kS5);
    CHECK(b.psd);
    CHECK(verify_all(b) < 1e-8);
  }
  SUBCASE("blocksize four") {
    const wit::WitnessBlock b = wit::m4_equal_angle_from_cos(bell::rcad_cos(2));
    CHECK(b.psd);
    CHECK(verify_all(b) < 1e-8);
  }
  SUBCASE("the determinant sign flips at the published root") {
    const double root = (3 * kS5 - 4 - 2 * std::sqrt(2 * kS5 - 3)) / (4 - kS5);
    auto det3 = [](double ct) {
      const wit::WitnessBlock b = wit::m4_equal_angle_from_cos(ct);
      // Positivity reduces to the 3x3 block with the duplicated row dropped.
      return b.entries.topLeftCorner(3, 3).determinant();
    };
    double lo = 0.05, hi = 0.45;
    REQUIRE(det3(lo) < 0);
    REQUIRE(det3(hi) > 0);
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (det3(mid) > 0 ? hi : lo) = mid;
    }
    CHECK(std::abs(hi - root) < 1e-10);
  }
}

TEST_CASE("block constraint residuals vanish") {
  for (const wit::WitnessBlock& b : {wit::m4_diag_from_cos(kS5 / 3, kS5 / 3, 1 / kS5),
                                     wit::m4_equal_angle_from_cos(1 / kS5)}) {
    for (const auto& [name, value] : wit::constraint_residuals(b)) {
      INFO(name);
      CHECK(std::abs(value) < 1e-13);
    }
  }
  // The 5x5 block solves its off-diagonal constraints by fixed point, so the
  // residual floor is the iteration tolerance, not machine epsilon.
  const wit::WitnessBlock b5 = wit::m5_iterative_from_cos(0.6, 0.7, 0.8, 400, 1e-15);
  for (const auto& [name, value] : wit::constraint_residuals(b5)) {
    INFO(name);
    CHECK(std::abs(value) < 1e-12);
  }
}

TEST_CASE("iterative 5x5 block") {
  SUBCASE("equal threshold angles converge quickly and stay positive") {
    const wit::WitnessBlock b = wit::m5_iterative_from_cos(1 / kS5, 1 / kS5, 1 / kS5);
    CHECK(b.converged);
    CHECK(b.iterations < 50);
    CHECK(b.residual < 1e-13);
    CHECK(b.auxiliary.at("d1") >= 0);
    CHECK(b.auxiliary.at("d2") >= 0);
    CHECK(b.auxiliary.at("d3") >= 0);
    CHECK(b.psd);
    CHECK(verify_all(b) < 1e-8);
  }
  SUBCASE("degenerate cos theta = 1 block-diagonalizes") {
    const wit::WitnessBlock b = wit::m5_iterative_from_cos(1.0, 0.6, 0.7);
    CHECK(b.converged);
    CHECK(b.auxiliary.at("k1") == 0.0);
    CHECK(b.auxiliary.at("k2") == 0.0);
    CHECK(b.auxiliary.at("t") == 0.0);
    CHECK(b.entries.row(4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.psd);
    CHECK(verify_all(b) < 1e-8);
  }
  SUBCASE("angle grids over every subblock split stay positive semidefinite") {
    for (int n = 5; n <= 12; ++n)
      for (int n1 = 1; n1 < n - 1; ++n1)
        for (int n2 = 1; n2 <= n1 && n1 + n2 < n; ++n2) {
          const int n3 = n - n1 - n2;
          if (n3 > n2) continue;
          const wit::WitnessBlock b = wit::m5_iterative_from_cos(
              bell::rcad_cos(n1), bell::rcad_cos(n2), bell::rcad_cos(n3));
          CHECK(b.converged);
          CHECK(b.psd);
        }
  }
}

TEST_CASE("reconstruction round trips through the announcement transform") {
  // The witness blocks must reduce to the exact two-pair state produced by
  // the circuit-level three-pair parity announcement.
  for (int n1 = 3; n1 <= 6; ++n1) {
    const wit::WitnessBlock b =
        wit::m4_diag_from_cos(bell::rcad_cos(n1), bell::rcad_cos(2), bell::rcad_cos(1));
    if (!b.psd) continue;
    CHECK(verify_all(b) < 1e-8);
  }
  const wit::WitnessBlock b5 = wit::m5_iterative_from_cos(0.8, 0.55, 0.6);
  REQUIRE(b5.psd);
  CHECK(verify_all(b5) < 1e-8);
}

TEST_CASE("non-psd blocks are rejected by the reconstructor") {
  // Blocksize three angles make the diagonal form indefinite.
  const wit::WitnessBlock bad = wit::m4_diag_from_cos(1 / kS5, 1 / kS5, 1 / kS5);
  REQUIRE_FALSE(bad.psd);
  CHECK_THROWS_AS(wit::reconstruct_extension(bad), std::invalid_argument);
}
