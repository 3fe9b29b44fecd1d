#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "symext/analytic.hpp"
#include "symext/bell.hpp"
#include "symext/gf2.hpp"
#include "test_util.hpp"

using namespace symext;
using bell::BellDiagonalDistribution;
namespace tu = symext::testutil;

namespace {

const double kS5 = std::sqrt(5.0);
const double kPstar = (5.0 - kS5) / 20.0;

BellDiagonalDistribution random_state(std::mt19937_64& rng) {
  return BellDiagonalDistribution(1, tu::random_bell_weights(rng));
}

// Independent oracle for the repetition-code transform: classify every
// error string of the block by bit-error agreement and phase parity.
Eigen::Vector4d rcad_brute(const Eigen::Vector4d& w, int n) {
  Eigen::Vector4d out = Eigen::Vector4d::Zero();
  const long total = 1L << (2 * n);
  for (long e = 0; e < total; ++e) {
    double prob = 1.0;
    int nbit = 0, nphase = 0;
    for (int pos = 0; pos < n; ++pos) {
      const int d = static_cast<int>((e >> (2 * pos)) & 3);
      prob *= w(d);
      nbit += d == 1 || d == 2;
      nphase += d == 2 || d == 3;
    }
    if (nbit != 0 && nbit != n) continue;  // detected bit error
    const int x = nbit == n;
    const int z = nphase & 1;
    out(x ? (z ? 2 : 1) : (z ? 3 : 0)) += prob;
  }
  return out;
}

}  // namespace

TEST_CASE("isotropic construction") {
  CHECK(bell::isotropic(0.0).weights.isApprox(Eigen::Vector4d(1, 0, 0, 0)));
  CHECK(bell::isotropic(0.25).weights.isApprox(Eigen::Vector4d::Constant(0.25)));
  CHECK(bell::isotropic(kPstar).weights(1) == doctest::Approx(kPstar));
  CHECK(std::abs(bell::d_c(bell::isotropic(kPstar))) < 1e-12);
  CHECK_THROWS_AS(bell::isotropic(0.4), std::invalid_argument);
}

TEST_CASE("qber reconstruction and basis rotations") {
  SUBCASE("equal rates give the isotropic state") {
    const double q = 0.21;
    const BellDiagonalDistribution s = bell::from_qber({q, q, q});
    CHECK((s.weights - bell::isotropic(q / 2).weights).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("rotating twice by y equals rotating once by x") {
    std::mt19937_64 rng(41);
    const BellDiagonalDistribution s = random_state(rng);
    const BellDiagonalDistribution yy =
        bell::rotate_basis(bell::rotate_basis(s, bell::Basis::Y), bell::Basis::Y);
    const BellDiagonalDistribution x = bell::rotate_basis(s, bell::Basis::X);
    CHECK((yy.weights - x.weights).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("the one-basis-distillable example rotates as published") {
    const BellDiagonalDistribution s(
        1, Eigen::Vector4d(4.0 / 7, 3.0 / 14, 0, 3.0 / 14));
    const BellDiagonalDistribution y = bell::rotate_basis(s, bell::Basis::Y);
    CHECK((y.weights - Eigen::Vector4d(4.0 / 7, 3.0 / 14, 3.0 / 14, 0)).cwiseAbs().maxCoeff() <
          1e-15);
    CHECK(bell::d_c(s) <= 0);
    CHECK(bell::d_c(y) > 0);
  }
  SUBCASE("the hadamard frame swaps x and z weights") {
    std::mt19937_64 rng(42);
    const BellDiagonalDistribution s = random_state(rng);
    const BellDiagonalDistribution h = bell::hadamard_frame(s);
    CHECK(h.weights(1) == s.weights(3));
    CHECK(h.weights(3) == s.weights(1));
  }
  SUBCASE("bb84 family spans the allowed interval") {
    const double q = 0.2;
    const BellDiagonalDistribution worst = bell::bb84_family(q, 4 * q - 1);
    // t = 0 member: (1-2Q, Q, 0, Q).
    CHECK((worst.weights - Eigen::Vector4d(1 - 2 * q, q, 0, q)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(bell::bb84_family(q, 0.9), std::invalid_argument);
  }
}

TEST_CASE("alpha coordinates") {
  CHECK(bell::alpha(bell::isotropic(0.25)).a1 == doctest::Approx(0.0));
  const bell::AlphaCoords phi = bell::alpha(BellDiagonalDistribution(1, Eigen::Vector4d(1, 0, 0, 0)));
  CHECK(phi.a1 == doctest::Approx(1.0));
  CHECK(phi.a2 == doctest::Approx(std::sqrt(2.0)));
  CHECK(phi.a3 == doctest::Approx(0.0));
  const bell::AlphaCoords th = bell::alpha(bell::isotropic(kPstar));
  CHECK(th.a1 == doctest::Approx(1.0 / kS5).epsilon(1e-12));
  CHECK(th.a2 == doctest::Approx(std::sqrt(2.0 / 5.0)).epsilon(1e-12));
  CHECK(th.a3 == doctest::Approx(0.0));
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const BellDiagonalDistribution s = random_state(rng);
    const BellDiagonalDistribution back = bell::from_alpha(bell::alpha(s));
    CHECK((back.weights - s.weights).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("distillability parameter") {
  CHECK(bell::d_c(BellDiagonalDistribution(1, Eigen::Vector4d(0.5, 0, 0, 0.5))) ==
        -std::numeric_limits<double>::infinity());
  CHECK(bell::d_c(BellDiagonalDistribution(1, Eigen::Vector4d(0.7, 0, 0, 0.3))) ==
        std::numeric_limits<double>::infinity());
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const BellDiagonalDistribution s = random_state(rng);
    const auto& w = s.weights;
    const double direct =
        std::log2((w(0) - w(3)) * (w(0) - w(3)) / ((w(0) + w(3)) * (w(1) + w(2))));
    CHECK(bell::d_c(s) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("rcad recursion") {
  std::mt19937_64 rng(45);
  SUBCASE("blocksize one is the identity") {
    const BellDiagonalDistribution s = random_state(rng);
    CHECK((bell::rcad(s, 1).weights - s.weights).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("threshold state at blocksize two hits the published angle") {
    const BellDiagonalDistribution out = bell::rcad(bell::isotropic(kPstar), 2).normalized();
    CHECK(bell::alpha(out).a1 == doctest::Approx(kS5 / 3.0).epsilon(1e-12));
  }
  SUBCASE("brute-force enumeration agrees at blocksize three") {
    for (int trial = 0; trial < 20; ++trial) {
      const BellDiagonalDistribution s = random_state(rng);
      const Eigen::Vector4d brute = rcad_brute(s.weights, 3);
      CHECK((bell::rcad(s, 3).weights - brute).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("blocksize zero is rejected") {
    CHECK_THROWS_AS(bell::rcad(bell::isotropic(0.1), 0), std::invalid_argument);
  }
}

TEST_CASE("d_c multiplies under the repetition code") {
  // The identity is exact; at blocksize 12 the stored weights of the output
  // resolve (p_I - p_z)^n only when p_I - p_z is not tiny against p_I + p_z,
  // so the generator keeps that ratio above 1/3.
  std::mt19937_64 rng(46);
  int done = 0;
  while (done < 200) {
    const BellDiagonalDistribution s = random_state(rng);
    const auto& w = s.weights;
    if (std::abs(w(0) - w(3)) < (w(0) + w(3)) / 3.0) continue;
    const double dc = bell::d_c(s);
    if (!std::isfinite(dc)) continue;
    ++done;
    for (int n : {2, 5, 12}) {
      const double dcn = bell::d_c(bell::rcad(s, n).normalized());
      CHECK(std::abs(dcn - n * dc) < 1e-9);
    }
  }
}

TEST_CASE("angle parametrization of repetition-code outputs") {
  SUBCASE("cos theta = 1/sqrt5 reproduces the threshold isotropic state") {
    const BellDiagonalDistribution s = bell::rcad_angle_state(std::acos(1.0 / kS5));
    CHECK((s.weights - bell::isotropic(kPstar).weights).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("theta = 0 gives the even phase mixture") {
    const BellDiagonalDistribution s = bell::rcad_angle_state(0.0);
    CHECK((s.weights - Eigen::Vector4d(0.5, 0, 0, 0.5)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("the whole family sits on the zero-distillability border") {
    for (int i = 1; i <= 20; ++i) {
      const double theta = i * (M_PI / 2) / 21;
      const BellDiagonalDistribution s = bell::rcad_angle_state(theta);
      const auto& w = s.weights;
      CHECK(std::abs((w(0) - w(3)) * (w(0) - w(3)) - (w(0) + w(3)) * (w(1) + w(2))) < 1e-14);
      const BellDiagonalDistribution y0 = bell::rcad_angle_state(theta, true);
      CHECK(y0.weights(2) == 0.0);
      CHECK(std::abs((y0.weights(0) - y0.weights(3)) * (y0.weights(0) - y0.weights(3)) -
                     (y0.weights(0) + y0.weights(3)) * (y0.weights(1) + y0.weights(2))) < 1e-14);
    }
  }
  SUBCASE("rcad_cos matches the closed form") {
    CHECK(bell::rcad_cos(1) == doctest::Approx(1.0 / kS5).epsilon(1e-14));
    CHECK(bell::rcad_cos(2) == doctest::Approx(kS5 / 3.0).epsilon(1e-14));
    CHECK(bell::rcad_cos(3) == doctest::Approx(2.0 / kS5).epsilon(1e-14));
    for (int n = 1; n <= 9; ++n) {
      const BellDiagonalDistribution out = bell::rcad(bell::isotropic(kPstar), n).normalized();
      CHECK(bell::alpha(out).a1 == doctest::Approx(bell::rcad_cos(n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("announcement transform") {
  std::mt19937_64 rng(47);
  SUBCASE("perfect input passes through any announcement") {
    const BellDiagonalDistribution perfect(1, Eigen::Vector4d(1, 0, 0, 0));
    const gf2::ParityCheckMatrix h(2, 4, {0b1011, 0b0110});
    const BellDiagonalDistribution out = bell::lad_apply(h, bell::iid(perfect, 4));
    CHECK(out.total == doctest::Approx(1.0));
    CHECK(out.weights(0) == doctest::Approx(1.0));
  }
  SUBCASE("the three-pair parity matches the published sums") {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Vector4d q = tu::random_bell_weights(rng);
      const Eigen::Vector4d r = tu::random_bell_weights(rng);
      const Eigen::Vector4d s = tu::random_bell_weights(rng);
      Eigen::VectorXd win(64);
      for (int e = 0; e < 64; ++e)
        win(e) = q((e >> 4) & 3) * r((e >> 2) & 3) * s(e & 3);
      const BellDiagonalDistribution out =
          bell::lad_apply(gf2::ParityCheckMatrix(1, 3, {0b111}), BellDiagonalDistribution(3, win));
      // Eigenvalue relations for the parity announcement on three pairs.
      const int I = 0, x = 1, y = 2, z = 3;
      auto p3 = [&](int a, int b, int c) { return q(a) * r(b) * s(c); };
      const struct {
        int a, b;
        double expect;
      } rows[] = {
          {I, I, p3(I, I, I) + p3(z, z, z)}, {I, x, p3(I, x, x) + p3(z, y, y)},
          {I, y, p3(I, y, x) + p3(z, x, y)}, {I, z, p3(I, z, I) + p3(z, I, z)},
          {x, I, p3(x, I, x) + p3(y, z, y)}, {x, x, p3(x, x, I) + p3(y, y, z)},
          {x, y, p3(x, y, I) + p3(y, x, z)}, {x, z, p3(x, z, x) + p3(y, I, y)},
          {y, I, p3(y, I, x) + p3(x, z, y)}, {y, x, p3(y, x, I) + p3(x, y, z)},
          {y, y, p3(y, y, I) + p3(x, x, z)}, {y, z, p3(y, z, x) + p3(x, I, y)},
          {z, I, p3(z, I, I) + p3(I, z, z)}, {z, x, p3(z, x, x) + p3(I, y, y)},
          {z, y, p3(z, y, x) + p3(I, x, y)}, {z, z, p3(z, z, I) + p3(I, I, z)},
      };
      for (const auto& rw : rows)
        CHECK(std::abs(out.weights(4 * rw.a + rw.b) - rw.expect) < 1e-12);
    }
  }
  SUBCASE("repetition announcements reproduce the closed-form recursion") {
    for (int n = 2; n <= 9; ++n) {
      const BellDiagonalDistribution s = random_state(rng);
      std::vector<gf2::Word> rows(n - 1);
      for (int i = 0; i < n - 1; ++i) rows[i] = 1 | (gf2::Word(1) << (1 + i));
      const BellDiagonalDistribution out =
          bell::lad_apply(gf2::ParityCheckMatrix(n - 1, n, rows), bell::iid(s, n));
      CHECK((out.weights - bell::rcad(s, n).weights).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("acceptance probability matches the parity-of-bit-errors count") {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 3 + static_cast<int>(rng() % 4);
      const int m = 1 + static_cast<int>(rng() % (n - 1));
      std::vector<gf2::Word> rows(m);
      for (int i = 0; i < m; ++i) rows[i] = rng() & ((gf2::Word(1) << n) - 1);
      const gf2::ParityCheckMatrix h(m, n, rows);
      if (gf2::rank(h) != m) continue;
      const BellDiagonalDistribution s = random_state(rng);
      const BellDiagonalDistribution in = bell::iid(s, n);
      const BellDiagonalDistribution out = bell::lad_apply(h, in);
      // A block is kept iff the bit-error indicator vector is in the code.
      double accept = 0;
      for (Eigen::Index e = 0; e < in.weights.size(); ++e) {
        gf2::Word bits = 0;
        for (int pos = 0; pos < n; ++pos) {
          const int d = static_cast<int>((e >> (2 * (n - 1 - pos))) & 3);
          if (d == 1 || d == 2) bits |= gf2::Word(1) << pos;
        }
        bool ok = true;
        for (int i = 0; i < m; ++i) ok = ok && (std::popcount(h.rows[i] & bits) & 1) == 0;
        if (ok) accept += in.weights(e);
      }
      CHECK(out.total == doctest::Approx(accept).epsilon(1e-12));
    }
  }
  SUBCASE("column permutations of the parity matrix reorder the kept pairs") {
    std::mt19937_64 rng2(470);
    for (int trial = 0; trial < 8; ++trial) {
      const int n = 5, k = 3, m = 2;
      std::vector<gf2::Word> rows(m);
      for (int i = 0; i < m; ++i) rows[i] = rng2() & 7;
      // Swap parity-matrix columns 0 and 2 = swap kept pairs 0 and 2.
      std::vector<gf2::Word> swapped(m);
      for (int i = 0; i < m; ++i)
        swapped[i] = (rows[i] & 2) | ((rows[i] & 1) << 2) | ((rows[i] >> 2) & 1);
      auto to_h = [&](const std::vector<gf2::Word>& pr) {
        std::vector<gf2::Word> hr = pr;
        for (int i = 0; i < m; ++i) hr[i] |= gf2::Word(1) << (k + i);
        return gf2::ParityCheckMatrix(m, n, hr);
      };
      const BellDiagonalDistribution s = random_state(rng2);
      const BellDiagonalDistribution in = bell::iid(s, n);
      const BellDiagonalDistribution o1 = bell::lad_apply(to_h(rows), in);
      const BellDiagonalDistribution o2 = bell::lad_apply(to_h(swapped), in);
      double dev = 0;
      for (Eigen::Index e = 0; e < o1.weights.size(); ++e) {
        const int d0 = static_cast<int>((e >> 4) & 3), d1 = static_cast<int>((e >> 2) & 3),
                  d2 = static_cast<int>(e & 3);
        dev = std::max(dev, std::abs(o1.weights(e) - o2.weights((d2 << 4) | (d1 << 2) | d0)));
      }
      CHECK(dev < 1e-13);
    }
  }
  SUBCASE("equivalent announcements give matching output multisets on iid inputs") {
    int done = 0;
    while (done < 12) {
      const int n = 4 + static_cast<int>(rng() % 2);
      const int k = 2 + static_cast<int>(rng() % 2);
      const int m = n - k;
      std::vector<gf2::Word> rows(m);
      for (int i = 0; i < m; ++i) rows[i] = rng() & ((gf2::Word(1) << k) - 1);
      gf2::ParityMatrix p(m, k, rows);
      const gf2::ParityMatrix canon = gf2::canonical_form(p);
      if (canon.rows == p.rows) continue;
      ++done;
      const BellDiagonalDistribution s = random_state(rng);
      const BellDiagonalDistribution in = bell::iid(s, n);
      auto to_h = [&](const gf2::ParityMatrix& pm) {
        std::vector<gf2::Word> hr = pm.rows;
        for (int i = 0; i < m; ++i) hr[i] |= gf2::Word(1) << (k + i);
        return gf2::ParityCheckMatrix(m, n, hr);
      };
      const BellDiagonalDistribution o1 = bell::lad_apply(to_h(p), in);
      const BellDiagonalDistribution o2 = bell::lad_apply(to_h(canon), in);
      // The post-measurement states of equivalent announcements are related
      // by local unitaries that relabel the error strings, so the weight
      // multisets and totals coincide.
      CHECK(o1.total == doctest::Approx(o2.total).epsilon(1e-12));
      std::vector<double> w1(o1.weights.data(), o1.weights.data() + o1.weights.size());
      std::vector<double> w2(o2.weights.data(), o2.weights.data() + o2.weights.size());
      std::sort(w1.begin(), w1.end());
      std::sort(w2.begin(), w2.end());
      double dev = 0;
      for (size_t i = 0; i < w1.size(); ++i) dev = std::max(dev, std::abs(w1[i] - w2[i]));
      CHECK(dev < 1e-12);
    }
  }
  SUBCASE("phase-symmetric inputs keep the per-pair x/y symmetry") {
    const double p = bell::threshold_p(4);
    const BellDiagonalDistribution in = bell::iid(bell::isotropic(p), 4);
    const gf2::ParityCheckMatrix h(1, 4, {0b1111});
    const BellDiagonalDistribution out = bell::lad_apply(h, in);
    CHECK(bell::s_symmetry_defect(out) < 1e-15);
  }
}

TEST_CASE("thresholds") {
  const bell::Thresholds th = bell::thresholds();
  CHECK(th.six_state_two_way == doctest::Approx((5 - kS5) / 10.0).epsilon(1e-15));
  CHECK(th.bb84_two_way == 0.2);
  CHECK(th.six_state_symext_oneway == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(2 * bell::threshold_p(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  // Bisection on the distillability border agrees with the closed form.
  double lo = 0.2, hi = 0.3;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bell::d_c(bell::isotropic(mid / 2)) <= 0 ? hi : lo) = mid;
  }
  CHECK(std::abs(hi - th.six_state_two_way) < 1e-6);
}

TEST_CASE("threshold_p grows with blocksize and brackets the two-way limit") {
  double prev = 0;
  for (int n = 1; n <= 6; ++n) {
    const double p = bell::threshold_p(n);
    CHECK(p > prev);
    CHECK(p < kPstar);
    prev = p;
    // The repetition-code output at the bisected p sits on the boundary.
    const BellDiagonalDistribution out = bell::rcad(bell::isotropic(p), n).normalized();
    CHECK(std::abs(analytic::bell_diag_margin(out)) < 1e-9);
  }
}

TEST_CASE("dense state conversion") {
  std::mt19937_64 rng(48);
  const BellDiagonalDistribution s = random_state(rng);
  const DensityMatrix rho = bell::to_density_matrix(s);
  CHECK(rho.dims() == std::vector<int>{2, 2});
  const RMatrix r = r_matrix(rho);
  CHECK(r.r(1, 1) == doctest::Approx(s.weights(0) + s.weights(1) - s.weights(2) - s.weights(3)));
  // Two-pair version reduces per pair.
  const BellDiagonalDistribution two = bell::iid(s, 2);
  const DensityMatrix rho2 = bell::to_density_matrix(two);
  const Matc red = partial_trace(rho2.entries(), rho2.dims(), {0, 1});
  CHECK((red - rho.entries()).cwiseAbs().maxCoeff() < 1e-13);
}
