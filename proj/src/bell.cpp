#include "symext/bell.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "symext/analytic.hpp"

namespace symext::bell {

namespace {

Eigen::Index pow4(int n) { return Eigen::Index(1) << (2 * n); }

int digit(Eigen::Index flat, int pos, int pairs) {
  return static_cast<int>((flat >> (2 * (pairs - 1 - pos))) & 3);
}

constexpr int kDigit[2][2] = {{0, 3}, {1, 2}};  // [x part][z part] -> I,x,y,z

int xpart(int d) { return d == 1 || d == 2; }
int zpart(int d) { return d == 2 || d == 3; }

}  // namespace

BellDiagonalDistribution::BellDiagonalDistribution(int pairs_, Eigen::VectorXd weights_)
    : pairs(pairs_), weights(std::move(weights_)) {
  if (pairs < 1 || weights.size() != pow4(pairs))
    throw std::invalid_argument("BellDiagonalDistribution: weight length != 4^pairs");
  if (weights.minCoeff() < -1e-12)
    throw std::invalid_argument("BellDiagonalDistribution: negative weight");
  total = weights.sum();
  if (total <= 0 || total > 1.0 + 1e-9)
    throw std::invalid_argument("BellDiagonalDistribution: total outside (0, 1]");
}

BellDiagonalDistribution BellDiagonalDistribution::normalized() const {
  return BellDiagonalDistribution(pairs, weights / total);
}

BellDiagonalDistribution isotropic(double p) {
  if (p < 0 || p > 1.0 / 3.0) throw std::invalid_argument("isotropic: need 0 <= p <= 1/3");
  Eigen::Vector4d w(1 - 3 * p, p, p, p);
  return BellDiagonalDistribution(1, w);
}

BellDiagonalDistribution from_qber(const ErrorRates& r) {
  for (double q : {r.qx, r.qy, r.qz})
    if (q < 0 || q > 1) throw std::invalid_argument("from_qber: rate outside [0,1]");
  const double px = 0.5 * (r.qy + r.qz - r.qx);
  const double py = 0.5 * (r.qx + r.qz - r.qy);
  const double pz = 0.5 * (r.qx + r.qy - r.qz);
  Eigen::Vector4d w(1 - px - py - pz, px, py, pz);
  if (w.minCoeff() < -1e-12) throw std::invalid_argument("from_qber: rates not realizable");
  w = w.cwiseMax(0.0);
  return BellDiagonalDistribution(1, w);
}

BellDiagonalDistribution bb84_family(double q, double r22) {
  const double r11 = 1 - 2 * q;
  Eigen::Vector4d w(0.25 * (1 + 2 * r11 - r22), 0.25 * (1 + r22),
                    0.25 * (1 - 2 * r11 - r22), 0.25 * (1 + r22));
  if (w.minCoeff() < -1e-12)
    throw std::invalid_argument("bb84_family: r22 outside the allowed interval");
  return BellDiagonalDistribution(1, w.cwiseMax(0.0));
}

BellDiagonalDistribution rotate_basis(const BellDiagonalDistribution& s, Basis b) {
  if (s.pairs != 1) throw std::invalid_argument("rotate_basis: N=1 only");
  const Eigen::VectorXd& w = s.weights;
  Eigen::Vector4d out;
  switch (b) {
    case Basis::Z: out << w(0), w(1), w(2), w(3); break;
    case Basis::Y: out << w(0), w(3), w(1), w(2); break;
    case Basis::X: out << w(0), w(2), w(3), w(1); break;
  }
  return BellDiagonalDistribution(1, out);
}

BellDiagonalDistribution hadamard_frame(const BellDiagonalDistribution& s) {
  if (s.pairs != 1) throw std::invalid_argument("hadamard_frame: N=1 only");
  const Eigen::VectorXd& w = s.weights;
  return BellDiagonalDistribution(1, Eigen::Vector4d(w(0), w(3), w(2), w(1)));
}

BellDiagonalDistribution rcad_angle_state(double theta, bool y_zero) {
  if (theta < 0 || theta > M_PI_2 + 1e-12)
    throw std::invalid_argument("rcad_angle_state: theta outside [0, pi/2]");
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Vector4d w;
  if (y_zero)
    w << 0.25 * (1 + c + s), 0.5 * (1 - c), 0.0, 0.25 * (1 + c - s);
  else
    w << 0.25 * (1 + c + s), 0.25 * (1 - c), 0.25 * (1 - c), 0.25 * (1 + c - s);
  return BellDiagonalDistribution(1, w.cwiseMax(0.0));
}

double rcad_cos(int blocksize) {
  if (blocksize < 1) throw std::invalid_argument("rcad_cos: blocksize >= 1");
  const double x = (3.0 - std::sqrt(5.0)) / 2.0;
  const double xn = std::pow(x, blocksize);
  return (1 - xn) / (1 + xn);
}

AlphaCoords alpha(const BellDiagonalDistribution& s) {
  if (s.pairs != 1) throw std::invalid_argument("alpha: N=1 only");
  const Eigen::VectorXd& w = s.weights;
  AlphaCoords a;
  a.a0 = s.total;
  a.a1 = w(0) - w(1) - w(2) + w(3);
  a.a2 = std::sqrt(2.0) * (w(0) - w(3));
  a.a3 = std::sqrt(2.0) * (w(1) - w(2));
  return a;
}

BellDiagonalDistribution from_alpha(const AlphaCoords& a) {
  const double s2 = std::sqrt(2.0);
  Eigen::Vector4d w(0.25 * (a.a0 + a.a1) + a.a2 / (2 * s2),
                    0.25 * (a.a0 - a.a1) + a.a3 / (2 * s2),
                    0.25 * (a.a0 - a.a1) - a.a3 / (2 * s2),
                    0.25 * (a.a0 + a.a1) - a.a2 / (2 * s2));
  return BellDiagonalDistribution(1, w);
}

double d_c(const BellDiagonalDistribution& s) {
  if (s.pairs != 1) throw std::invalid_argument("d_c: N=1 only");
  const Eigen::VectorXd& w = s.weights;
  const double num = (w(0) - w(3)) * (w(0) - w(3));
  const double den = (w(0) + w(3)) * (w(1) + w(2));
  if (num == 0) return -std::numeric_limits<double>::infinity();
  if (den == 0) return std::numeric_limits<double>::infinity();
  return std::log2(num / den);
}

BellDiagonalDistribution rcad(const BellDiagonalDistribution& s, int blocksize) {
  if (s.pairs != 1) throw std::invalid_argument("rcad: N=1 only");
  if (blocksize < 1) throw std::invalid_argument("rcad: blocksize >= 1");
  const Eigen::VectorXd& w = s.weights;
  const int n = blocksize;
  const double sp = std::pow(w(0) + w(3), n), sm = std::pow(w(0) - w(3), n);
  const double tp = std::pow(w(1) + w(2), n), tm = std::pow(w(1) - w(2), n);
  Eigen::Vector4d out(0.5 * (sp + sm), 0.5 * (tp + tm), 0.5 * (tp - tm), 0.5 * (sp - sm));
  return BellDiagonalDistribution(1, out.cwiseMax(0.0));
}

BellDiagonalDistribution iid(const BellDiagonalDistribution& s, int pairs) {
  if (s.pairs != 1) throw std::invalid_argument("iid: N=1 input only");
  Eigen::VectorXd out(pow4(pairs));
  for (Eigen::Index e = 0; e < out.size(); ++e) {
    double v = 1.0;
    for (int pos = 0; pos < pairs; ++pos) v *= s.weights(digit(e, pos, pairs));
    out(e) = v;
  }
  return BellDiagonalDistribution(pairs, out);
}

BellDiagonalDistribution lad_apply(const gf2::ParityCheckMatrix& h,
                                   const BellDiagonalDistribution& input) {
  const int n = input.pairs;
  if (h.n != n) throw std::invalid_argument("lad_apply: H columns != input pairs");
  const gf2::SystematicForm sf = gf2::to_systematic(h);
  const int m = h.m, k = n - m;

  // Relabel pairs so that kept pairs are the first k (column c of H acts on
  // the pair at position column_permutation[c]).
  Eigen::VectorXd w(input.weights.size());
  std::vector<int> perm(sf.column_permutation.begin(), sf.column_permutation.end());
  for (Eigen::Index e = 0; e < w.size(); ++e) {
    Eigen::Index g = 0;
    for (int pos = 0; pos < n; ++pos) {
      const int d = digit(e, pos, n);
      g |= Eigen::Index(d) << (2 * (n - 1 - perm[pos]));
    }
    w(g) = input.weights(e);
  }

  // One CNOT per 1 in P: source = kept pair j, target = measured pair k+i.
  std::vector<std::pair<int, int>> cnots;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j)
      if ((sf.p.rows[i] >> j) & 1) cnots.emplace_back(j, k + i);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(pow4(k));
  std::vector<int> xs(n), zs(n);
  for (Eigen::Index e = 0; e < w.size(); ++e) {
    if (w(e) == 0.0) continue;
    for (int pos = 0; pos < n; ++pos) {
      const int d = digit(e, pos, n);
      xs[pos] = xpart(d);
      zs[pos] = zpart(d);
    }
    for (auto [s, t] : cnots) {
      xs[t] ^= xs[s];
      zs[s] ^= zs[t];
    }
    bool accept = true;
    for (int i = 0; i < m; ++i) accept = accept && xs[k + i] == 0;
    if (!accept) continue;
    Eigen::Index o = 0;
    for (int pos = 0; pos < k; ++pos) o = (o << 2) | kDigit[xs[pos]][zs[pos]];
    out(o) += w(e);
  }
  return BellDiagonalDistribution(k, out);
}

double s_symmetry_defect(const BellDiagonalDistribution& s) {
  double defect = 0.0;
  for (int pos = 0; pos < s.pairs; ++pos) {
    const int shift = 2 * (s.pairs - 1 - pos);
    for (Eigen::Index e = 0; e < s.weights.size(); ++e) {
      const int d = static_cast<int>((e >> shift) & 3);
      if (d != 1) continue;  // swap x <-> y once per pair index
      const Eigen::Index f = (e & ~(Eigen::Index(3) << shift)) | (Eigen::Index(2) << shift);
      defect = std::max(defect, std::abs(s.weights(e) - s.weights(f)));
    }
  }
  return defect;
}

Thresholds thresholds() {
  return Thresholds{(5.0 - std::sqrt(5.0)) / 10.0, 0.2, 1.0 / 6.0};
}

double threshold_p(int n) {
  if (n < 1) throw std::invalid_argument("threshold_p: n >= 1");
  double lo = 0.0, hi = 0.25;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const BellDiagonalDistribution out = rcad(isotropic(mid), n).normalized();
    if (analytic::decide_bell_diag(out).verdict == analytic::Verdict::YES)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

DensityMatrix to_density_matrix(const BellDiagonalDistribution& s) {
  static const std::array<Matc, 4> bell = [] {
    std::array<Matc, 4> b;
    Vecc phip = Vecc::Zero(4);
    phip(0) = phip(3) = 1.0 / std::sqrt(2.0);
    for (int e = 0; e < 4; ++e) {
      Vecc v = kron(Matc::Identity(2, 2), pauli(e)) * phip;
      b[e] = v * v.adjoint();
    }
    return b;
  }();
  const Eigen::Index d = Eigen::Index(1) << (2 * s.pairs);
  Matc rho = Matc::Zero(d, d);
  for (Eigen::Index e = 0; e < s.weights.size(); ++e) {
    if (s.weights(e) == 0.0) continue;
    Matc term = Matc::Identity(1, 1);
    for (int pos = 0; pos < s.pairs; ++pos) term = kron(term, bell[digit(e, pos, s.pairs)]).eval();
    rho += s.weights(e) * term;
  }
  std::vector<int> dims(2 * s.pairs, 2);
  return DensityMatrix(dims, std::move(rho), s.total);
}

}  // namespace symext::bell
