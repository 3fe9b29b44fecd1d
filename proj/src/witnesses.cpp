#include "symext/witnesses.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "symext/bell.hpp"
#include "symext/gf2.hpp"

namespace symext::witnesses {

namespace {

const double kS5 = std::sqrt(5.0);

double sin_from_cos(double c) { return std::sqrt(std::max(0.0, 1.0 - c * c)); }

void finish(WitnessBlock& b) {
  Eigen::SelfAdjointEigenSolver<Matd> es(b.entries, Eigen::EigenvaluesOnly);
  b.min_eig = es.eigenvalues().minCoeff();
  b.psd = b.min_eig >= -1e-10;
}

// Diagonal upper bounds from the three inequality constraints, in 1/32 units.
std::array<double, 3> diag_bounds(double ct, double cp, double ca) {
  return {(1 + ct) * (1 - cp) * (1 - ca), (1 - ct) * (1 + cp) * (1 - ca),
          (1 - ct) * (1 - cp) * (1 + ca)};
}

}  // namespace

double m4_positivity_f(double ct, double cp, double ca) {
  return 0.25 * (1 + ct) * (1 + cp) * (1 + ca) - (1 - ct) * (1 + cp) * (1 - ca) -
         (1 - ct) * (1 - cp) * (1 + ca) - (1 + ct) * (1 - cp) * (1 - ca);
}

WitnessBlock m4_diag_from_cos(double ct, double cp, double ca) {
  const double st = sin_from_cos(ct), sp = sin_from_cos(cp), sa = sin_from_cos(ca);
  WitnessBlock out;
  out.variant = WitnessVariant::M4_DIAG;
  out.cos_theta = ct;
  out.cos_phi = cp;
  out.cos_alpha = ca;
  const double B = (1 + ct) * (1 + cp) * (1 + ca) - (1 - ct) * (1 + cp) * (1 - ca) -
                   (1 - ct) * (1 - cp) * (1 + ca) - (1 + ct) * (1 - cp) * (1 - ca);
  const double a = 0.5 * (1 + ct) * sp * sa;
  const double b = 0.5 * st * (1 + cp) * sa;
  const double c = 0.5 * st * sp * (1 + ca);
  const auto [x, y, z] = diag_bounds(ct, cp, ca);
  out.entries = (Matd(4, 4) << B, a, b, c, a, x, 0, 0, b, 0, y, 0, c, 0, 0, z).finished() / 32.0;
  out.auxiliary = {{"B", B}, {"a", a}, {"b", b}, {"c", c}, {"x", x}, {"y", y}, {"z", z},
                   {"f", m4_positivity_f(ct, cp, ca)}};
  finish(out);
  return out;
}

WitnessBlock m4_diag(double theta, double phi, double alpha) {
  return m4_diag_from_cos(std::cos(theta), std::cos(phi), std::cos(alpha));
}

WitnessBlock m4_equal_angle_from_cos(double ct) {
  const double st = sin_from_cos(ct);
  WitnessBlock out;
  out.variant = WitnessVariant::M4_EQUAL_ANGLE;
  out.cos_theta = ct;
  out.cos_phi = out.cos_alpha = 1.0 / kS5;
  const double B = 0.8 * (kS5 * (1 + ct) - 2 * (1 - ct));
  const double a = 0.4 * (-1 + 3 * ct);
  const double b = 0.2 * (kS5 + 1) * st;
  const double x = 0.4 * (3 - kS5) * (1 + ct);
  const double y = 0.8 * (1 - ct);
  out.entries = (Matd(4, 4) << B, a, b, b, a, x, 0, 0, b, 0, y, y, b, 0, y, y).finished() / 32.0;
  out.auxiliary = {{"B", B}, {"a", a}, {"b", b}, {"x", x}, {"y", y}};
  finish(out);
  return out;
}

WitnessBlock m4_equal_angle(double theta) { return m4_equal_angle_from_cos(std::cos(theta)); }

WitnessBlock m5_iterative_from_cos(double ct, double cp, double ca, int max_iter, double tol) {
  const double st = sin_from_cos(ct), sp = sin_from_cos(cp), sa = sin_from_cos(ca);
  WitnessBlock out;
  out.variant = WitnessVariant::M5_ITERATIVE;
  out.cos_theta = ct;
  out.cos_phi = cp;
  out.cos_alpha = ca;

  const double tau = (1 - ct) * (1 - cp) * (1 - ca) / 64.0;
  const double k1 = st * (1 - cp) * (1 - ca) / 128.0;
  const double k2 = (1 - ct) * sp * (1 - ca) / 128.0;
  const double k3 = (1 - ct) * (1 - cp) * sa / 128.0;
  // Products k_i k_j / tau in cancelled form (finite in the tau -> 0 limit).
  const double k2k3_t = (1 - ct) * sp * sa / 256.0;
  const double k1k3_t = st * (1 - cp) * sa / 256.0;
  const double k1k2_t = st * sp * (1 - ca) / 256.0;
  const double k1sq_t = st * st * (1 - cp) * (1 - ca) / 256.0;
  const double k2sq_t = (1 - ct) * sp * sp * (1 - ca) / 256.0;
  const double k3sq_t = (1 - ct) * (1 - cp) * sa * sa / 256.0;

  // B is pinned by requiring the four-element diagonal constraint to follow
  // from the three two-element ones.
  const double dia = 2.0 * (1 + ct) * (1 + cp) * (1 + ca) / 64.0;
  const double tri = (1 + ct) * (1 - cp) * (1 - ca) / 64.0;
  const double trid = (1 - ct) * (1 + cp) * (1 - ca) / 64.0;
  const double box = (1 - ct) * (1 - cp) * (1 + ca) / 64.0;
  const double B = dia - (tri + trid + box) + 3 * tau;

  const double r0 = (1 + ct) * sp * sa / 64.0 - k2k3_t;
  const double s0 = st * (1 + cp) * sa / 64.0 - k1k3_t;
  const double t0 = st * sp * (1 + ca) / 64.0 - k1k2_t;
  double r = r0, s = s0, t = t0, res = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const double rn = r0 - s * t / B;
    const double sn = s0 - r * t / B;
    const double tn = t0 - r * s / B;
    res = std::max({std::abs(rn - r), std::abs(sn - s), std::abs(tn - t)});
    r = rn;
    s = sn;
    t = tn;
    if (res < tol) break;
  }
  out.iterations = it + 1;
  out.residual = res;
  out.converged = res < tol;

  Eigen::Vector3d v(r, s, t);
  v /= std::sqrt(B);
  Eigen::Vector3d d(tri - tau - k1sq_t - v(0) * v(0), trid - tau - k2sq_t - v(1) * v(1),
                    box - tau - k3sq_t - v(2) * v(2));
  Matd m5 = Matd::Zero(5, 5);
  m5(0, 0) = B;
  m5.block<1, 3>(0, 1) = (std::sqrt(B) * v).transpose();
  m5.block<3, 1>(1, 0) = std::sqrt(B) * v;
  Matd kk(3, 3);
  kk << k1sq_t, k1k2_t, k1k3_t, k1k2_t, k2sq_t, k2k3_t, k1k3_t, k2k3_t, k3sq_t;
  m5.block<3, 3>(1, 1) = kk + v * v.transpose() + d.asDiagonal().toDenseMatrix();
  m5(4, 4) = tau;
  m5(4, 1) = m5(1, 4) = k1;
  m5(4, 2) = m5(2, 4) = k2;
  m5(4, 3) = m5(3, 4) = k3;
  out.entries = m5;
  out.auxiliary = {{"B", B},   {"k1", k1}, {"k2", k2}, {"k3", k3}, {"t", tau},
                   {"d1", d(0)}, {"d2", d(1)}, {"d3", d(2)}, {"r", r}, {"s", s},
                   {"t_fp", t}};
  // PSD by construction when the diagonal remainder is nonnegative.
  Eigen::SelfAdjointEigenSolver<Matd> es(out.entries, Eigen::EigenvaluesOnly);
  out.min_eig = es.eigenvalues().minCoeff();
  out.psd = out.converged && d.minCoeff() >= -1e-10;
  return out;
}

WitnessBlock m5_iterative(double theta, double phi, double alpha, int max_iter, double tol) {
  return m5_iterative_from_cos(std::cos(theta), std::cos(phi), std::cos(alpha), max_iter, tol);
}

std::map<std::string, double> constraint_residuals(const WitnessBlock& block) {
  const double ct = block.cos_theta, cp = block.cos_phi, ca = block.cos_alpha;
  const double st = sin_from_cos(ct), sp = sin_from_cos(cp), sa = sin_from_cos(ca);
  const Matd m = block.entries * 32.0;
  std::map<std::string, double> res;
  const double dia = (1 + ct) * (1 + cp) * (1 + ca);
  const double heart = (1 + ct) * sp * sa;
  const double spade = st * (1 + cp) * sa;
  const double club = st * sp * (1 + ca);
  const auto [tri, trid, box] = diag_bounds(ct, cp, ca);
  if (block.variant == WitnessVariant::M5_ITERATIVE) {
    const double tau32 = 32.0 * block.auxiliary.at("t");
    res["diamond"] = m(0, 0) + m(1, 1) + m(2, 2) + m(3, 3) - dia;
    res["heart"] = 2 * (m(0, 1) + m(2, 3)) - heart;
    res["spade"] = 2 * (m(0, 2) + m(1, 3)) - spade;
    res["club"] = 2 * (m(0, 3) + m(1, 2)) - club;
    res["triangle"] = m(1, 1) + tau32 - 0.5 * tri;
    res["triangle-down"] = m(2, 2) + tau32 - 0.5 * trid;
    res["box"] = m(3, 3) + tau32 - 0.5 * box;
  } else {
    res["diamond"] = m(0, 0) + m(1, 1) + m(2, 2) + m(3, 3) - dia;
    res["heart"] = 2 * (m(0, 1) + m(2, 3)) - heart;
    res["spade"] = 2 * (m(0, 2) + m(1, 3)) - spade;
    res["club"] = 2 * (m(0, 3) + m(1, 2)) - club;
    res["triangle"] = m(1, 1) - tri;       // saturated upper bounds
    res["triangle-down"] = m(2, 2) - trid;
    res["box"] = m(3, 3) - box;
  }
  return res;
}

namespace {

// Positive-parity basis |A B B'> with two-qubit labels, in the fixed order
// used throughout: 000; 110,220,330; 101,202,303; 011,022,033;
// 123,231,312; 132,213,321.
constexpr int kBasis16[16][3] = {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}, {3, 3, 0},
                                 {1, 0, 1}, {2, 0, 2}, {3, 0, 3}, {0, 1, 1},
                                 {0, 2, 2}, {0, 3, 3}, {1, 2, 3}, {2, 3, 1},
                                 {3, 1, 2}, {1, 3, 2}, {2, 1, 3}, {3, 2, 1}};

}  // namespace

Matd projected_block16(const WitnessBlock& block) {
  Matd m16 = Matd::Zero(16, 16);
  const Matd m = block.entries;
  if (block.variant == WitnessVariant::M5_ITERATIVE) {
    m16(0, 0) = m(0, 0);
    const Eigen::Vector3d abc = m.block<3, 1>(1, 0);
    const Matd m3 = m.block<3, 3>(1, 1);
    const Eigen::Vector3d ks = m.block<3, 1>(1, 4);
    for (int b1 = 0; b1 < 3; ++b1) {
      m16.block<1, 3>(0, 1 + 3 * b1) = abc.transpose();
      m16.block<3, 1>(1 + 3 * b1, 0) = abc;
      for (int b2 = 0; b2 < 3; ++b2) m16.block<3, 3>(1 + 3 * b1, 1 + 3 * b2) = m3;
      for (int col = 10; col < 16; ++col) {
        m16.block<3, 1>(1 + 3 * b1, col) = ks;
        m16.block<1, 3>(col, 1 + 3 * b1) = ks.transpose();
      }
    }
    m16.block<6, 6>(10, 10).setConstant(m(4, 4));
  } else {
    m16.block<4, 4>(0, 0) = m;
    const Matd m3 = m.block<3, 3>(1, 1);
    m16.block<1, 3>(0, 4) = m.block<1, 3>(0, 1);
    m16.block<3, 1>(4, 0) = m.block<3, 1>(1, 0);
    m16.block<3, 3>(4, 4) = m3;
    m16.block<3, 3>(1, 4) = m3;
    m16.block<3, 3>(4, 1) = m3;
    // Diagonal leftovers keeping the two-element diagonal constraints exact.
    const auto [tri, trid, box] = diag_bounds(block.cos_theta, block.cos_phi, block.cos_alpha);
    m16(7, 7) = tri / 32.0 - m(1, 1);
    m16(8, 8) = trid / 32.0 - m(2, 2);
    m16(9, 9) = box / 32.0 - m(3, 3);
  }
  return m16;
}

DensityMatrix reconstruct_extension(const WitnessBlock& block) {
  if (!block.psd) throw std::invalid_argument("reconstruct_extension: block not PSD");
  const Matd m16 = projected_block16(block);
  Matd base = Matd::Zero(64, 64);
  auto idx = [](int a, int b, int c) { return 16 * a + 4 * b + c; };
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      base(idx(kBasis16[r][0], kBasis16[r][1], kBasis16[r][2]),
           idx(kBasis16[c][0], kBasis16[c][1], kBasis16[c][2])) = m16(r, c);
  // Replicate onto the other parity sectors with bit flips on whole pairs:
  // label XOR by 2 flips the first pair's qubit, XOR by 1 the second's.
  Matd rho = Matd::Zero(64, 64);
  for (int u = 0; u < 4; ++u) {
    std::array<int, 64> map{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) map[idx(a, b, c)] = idx(a ^ u, b ^ u, c ^ u);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) rho(map[r], map[c]) += base(r, c);
  }
  return DensityMatrix({4, 4, 4}, rho.cast<cxd>(), rho.trace(), 1e-8);
}

Matc expected_reduction(const WitnessBlock& block) {
  const bool y_zero = block.variant == WitnessVariant::M5_ITERATIVE;
  const bell::BellDiagonalDistribution q =
      bell::rcad_angle_state(std::acos(std::min(1.0, block.cos_theta)), y_zero);
  const bell::BellDiagonalDistribution r =
      bell::rcad_angle_state(std::acos(std::min(1.0, block.cos_phi)), y_zero);
  const bell::BellDiagonalDistribution s =
      bell::rcad_angle_state(std::acos(std::min(1.0, block.cos_alpha)), y_zero);
  Eigen::VectorXd win(64);
  for (int e = 0; e < 64; ++e)
    win(e) = q.weights((e >> 4) & 3) * r.weights((e >> 2) & 3) * s.weights(e & 3);
  const gf2::ParityCheckMatrix h(1, 3, {0b111});
  const bell::BellDiagonalDistribution out =
      bell::lad_apply(h, bell::BellDiagonalDistribution(3, win));
  // Per-pair layout (A1,B1,A2,B2) -> (A1,A2,B1,B2).
  const DensityMatrix dm = bell::to_density_matrix(out);
  return permute_subsystems(dm.entries(), {2, 2, 2, 2}, {0, 2, 1, 3});
}

}  // namespace symext::witnesses
