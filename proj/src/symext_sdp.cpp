#include "symext/symext_sdp.hpp"

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace symext::symext_sdp {

namespace {

// P_i index triples (A, B, B' Pauli indices), 1-based list order.
constexpr int kPdefs[16][3] = {{0, 0, 0}, {0, 1, 1}, {0, 2, 2}, {0, 3, 3},
                               {1, 1, 0}, {2, 2, 0}, {3, 3, 0}, {1, 0, 1},
                               {2, 0, 2}, {3, 0, 3}, {1, 2, 3}, {2, 3, 1},
                               {3, 1, 2}, {1, 3, 2}, {2, 1, 3}, {3, 2, 1}};

// R_i as signed combinations of P indices (1-based).
const std::vector<std::vector<std::pair<int, double>>> kRdefs = {
    {{1, 1}}, {{2, 1}, {3, 1}}, {{4, 1}}, {{5, 1}, {6, -1}}, {{7, 1}},
    {{8, 1}, {9, -1}}, {{10, 1}}, {{11, 1}, {15, 1}}, {{12, 1}, {14, 1}}, {{13, 1}, {16, -1}}};

PauliTermTable build_table() {
  PauliTermTable t;
  // Projector onto the +1 parity eigenspace, basis (|000>,|011>,|101>,|110>)
  // ordered by the first two qubits.
  Matc proj = Matc::Zero(4, 8);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) proj(2 * a + b, 4 * a + 2 * b + (a ^ b)) = 1.0;
  for (const auto& def : kPdefs) {
    Matc p = kron(kron(pauli(def[0]), pauli(def[1])), pauli(def[2]));
    t.Q.push_back(proj * p * proj.adjoint());
    t.P.push_back(std::move(p));
  }
  for (const auto& combo : kRdefs) {
    Matc r = Matc::Zero(8, 8), tp = Matc::Zero(4, 4);
    for (auto [pi, s] : combo) {
      r += s * t.P[pi - 1];
      tp += s * t.Q[pi - 1];
    }
    t.R.push_back(std::move(r));
    t.T.push_back(std::move(tp));
  }
  // Verify the projections against the defining projector.
  for (int i = 0; i < 16; ++i)
    if ((t.Q[i] - proj * t.P[i] * proj.adjoint()).cwiseAbs().maxCoeff() > 1e-14)
      throw std::runtime_error("pauli_term_table: Q projection mismatch");
  for (int i = 0; i < 10; ++i)
    if ((t.T[i] - proj * t.R[i] * proj.adjoint()).cwiseAbs().maxCoeff() > 1e-14)
      throw std::runtime_error("pauli_term_table: T projection mismatch");
  t.swap_p = {0, 1, 2, 3, 4, 8, 9, 10, 5, 6, 7, 14, 15, 16, 11, 12, 13};
  t.swap_r = {0, 1, 2, 3, 6, 7, 4, 5, 9, 8, 10};
  // Verify the swap maps by conjugating with the B <-> B' permutation.
  Matc swap = Matc::Zero(8, 8);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) swap(4 * a + 2 * c + b, 4 * a + 2 * b + c) = 1.0;
  for (int i = 1; i <= 16; ++i)
    if ((swap * t.P[i - 1] * swap.adjoint() - t.P[t.swap_p[i] - 1]).cwiseAbs().maxCoeff() > 1e-14)
      throw std::runtime_error("pauli_term_table: P swap map mismatch");
  for (int i = 1; i <= 10; ++i) {
    const double sign = i == 10 ? -1.0 : 1.0;
    if ((swap * t.R[i - 1] * swap.adjoint() - sign * t.R[t.swap_r[i] - 1]).cwiseAbs().maxCoeff() >
        1e-14)
      throw std::runtime_error("pauli_term_table: R swap map mismatch");
  }
  return t;
}

// +-1 character: tr[(sigma_j (x) sigma_j) |beta_e><beta_e|].
constexpr double kChi[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {-1, 1, -1, 1}, {1, -1, -1, 1}};

bool transposition_odd_p(const std::vector<int>& slots) {
  int count = 0;
  for (int s : slots) count += s >= 11;
  return count & 1;
}

bool transposition_odd_r(const std::vector<int>& slots) {
  int count = 0;
  for (int s : slots) count += s >= 8;
  return count & 1;
}

// Pauli index mapped from a trace-fixed slot value, or -1 when not fixed.
int fixed_digit_p(int slot) {
  switch (slot) {
    case 1: return 0;
    case 5: return 1;
    case 6: return 2;
    case 7: return 3;
    case 8: return 1;
    case 9: return 2;
    case 10: return 3;
    default: return -1;
  }
}

int fixed_digit_r(int slot) {
  switch (slot) {
    case 1: return 0;
    case 4: return 1;  // x branch; the partner branch carries beta_y = -beta_x
    case 6: return 1;
    case 5: return 3;
    case 7: return 3;
    default: return -1;
  }
}

// beta coefficient tr[rho (x)_k sigma_{j_k} sigma_{j_k}] of a Bell-diagonal
// weight vector.
double beta_coeff(const bell::BellDiagonalDistribution& s, const std::vector<int>& digits) {
  const int n = s.pairs;
  double acc = 0;
  for (Eigen::Index e = 0; e < s.weights.size(); ++e) {
    if (s.weights(e) == 0.0) continue;
    double prod = s.weights(e);
    for (int pos = 0; pos < n; ++pos)
      prod *= kChi[digits[pos]][(e >> (2 * (n - 1 - pos))) & 3];
    acc += prod;
  }
  return acc;
}

// Sparse Kronecker product of small complex matrices cast to real.
sdp::SpMat real_kron_chain(const std::vector<const Matc*>& factors, double scale) {
  std::vector<Eigen::Triplet<cxd>> cur{{0, 0, cxd(scale, 0)}};
  Eigen::Index dim = 1;
  for (const Matc* f : factors) {
    const Eigen::Index fd = f->rows();
    std::vector<Eigen::Triplet<cxd>> next;
    next.reserve(cur.size() * 8);
    for (const auto& t : cur)
      for (Eigen::Index r = 0; r < fd; ++r)
        for (Eigen::Index c = 0; c < fd; ++c) {
          const cxd v = (*f)(r, c);
          if (v != cxd(0, 0)) next.emplace_back(t.row() * fd + r, t.col() * fd + c, t.value() * v);
        }
    cur = std::move(next);
    dim *= fd;
  }
  std::vector<Eigen::Triplet<double>> real;
  real.reserve(cur.size());
  for (const auto& t : cur) {
    if (std::abs(t.value().imag()) > 1e-12)
      throw std::runtime_error("real_kron_chain: imaginary entries survived");
    if (t.value().real() != 0.0) real.emplace_back(t.row(), t.col(), t.value().real());
  }
  sdp::SpMat out(dim, dim);
  out.setFromTriplets(real.begin(), real.end());
  out.makeCompressed();
  return out;
}

struct TermEnumerator {
  int pairs;
  SymmetryMode mode;
  const PauliTermTable& table;
  int nslots;  // 16 or 10

  bool excluded(const std::vector<int>& slots) const {
    return mode == SymmetryMode::GENERIC_BELL_DIAG ? transposition_odd_p(slots)
                                                   : transposition_odd_r(slots);
  }
  bool fixed(const std::vector<int>& slots, std::vector<int>* digits) const {
    auto map = mode == SymmetryMode::GENERIC_BELL_DIAG ? fixed_digit_p : fixed_digit_r;
    const bool primary =
        mode == SymmetryMode::GENERIC_BELL_DIAG
            ? std::all_of(slots.begin(), slots.end(), [](int s) { return s == 1 || (s >= 5 && s <= 7); })
            : std::all_of(slots.begin(), slots.end(), [](int s) { return s == 1 || s == 4 || s == 5; });
    const bool partner =
        mode == SymmetryMode::GENERIC_BELL_DIAG
            ? std::all_of(slots.begin(), slots.end(), [](int s) { return s == 1 || (s >= 8 && s <= 10); })
            : std::all_of(slots.begin(), slots.end(), [](int s) { return s == 1 || s == 6 || s == 7; });
    if (!primary && !partner) return false;
    if (digits) {
      digits->resize(slots.size());
      for (size_t i = 0; i < slots.size(); ++i) (*digits)[i] = map(slots[i]);
    }
    return true;
  }
  std::vector<int> swap_partner(const std::vector<int>& slots, double* sign) const {
    std::vector<int> out(slots.size());
    double s = 1.0;
    for (size_t i = 0; i < slots.size(); ++i) {
      if (mode == SymmetryMode::GENERIC_BELL_DIAG) {
        out[i] = table.swap_p[slots[i]];
      } else {
        out[i] = table.swap_r[slots[i]];
        if (slots[i] == 10) s = -s;
      }
    }
    *sign = s;
    return out;
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::vector<int> slots(pairs, 1);
    while (true) {
      fn(slots);
      int pos = pairs - 1;
      while (pos >= 0 && slots[pos] == nslots) slots[pos--] = 1;
      if (pos < 0) break;
      ++slots[pos];
    }
  }
};

}  // namespace

const PauliTermTable& pauli_term_table() {
  static const PauliTermTable table = build_table();
  return table;
}

long count_open_parameters(int pairs, SymmetryMode mode) {
  const PauliTermTable& table = pauli_term_table();
  TermEnumerator en{pairs, mode, table,
                    mode == SymmetryMode::GENERIC_BELL_DIAG ? 16 : 10};
  long count = 0;
  en.for_each([&](const std::vector<int>& slots) {
    if (en.excluded(slots) || en.fixed(slots, nullptr)) return;
    double sign = 1.0;
    const std::vector<int> partner = en.swap_partner(slots, &sign);
    if (partner == slots) {
      if (sign > 0) ++count;  // a sign-flipped self-partner must vanish
    } else if (slots < partner) {
      ++count;
    }
  });
  return count;
}

SymextProblem build(const bell::BellDiagonalDistribution& state, SymmetryMode mode) {
  const int n = state.pairs;
  const bell::BellDiagonalDistribution norm = state.normalized();
  if (mode == SymmetryMode::S_SYMMETRIC && bell::s_symmetry_defect(norm) > 1e-12)
    throw std::invalid_argument("build: state lacks the per-pair x<->y symmetry");
  const PauliTermTable& table = pauli_term_table();
  TermEnumerator en{n, mode, table, mode == SymmetryMode::GENERIC_BELL_DIAG ? 16 : 10};
  const auto& ops = mode == SymmetryMode::GENERIC_BELL_DIAG ? table.Q : table.T;

  SymextProblem prob;
  prob.pairs = n;
  prob.mode = mode;
  const Eigen::Index dim = Eigen::Index(1) << (2 * n);

  auto term_matrix = [&](const std::vector<int>& slots, double scale) {
    std::vector<const Matc*> factors(n);
    for (int i = 0; i < n; ++i) factors[i] = &ops[slots[i] - 1];
    return real_kron_chain(factors, scale);
  };

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<sdp::SpMat> fs;
  fs.push_back(sdp::to_sparse(Eigen::MatrixXd::Identity(dim, dim)));  // the t variable
  std::vector<std::vector<Term>> open_terms;

  std::vector<int> digits;
  en.for_each([&](const std::vector<int>& slots) {
    if (en.excluded(slots)) return;
    if (en.fixed(slots, &digits)) {
      const double beta = beta_coeff(norm, digits);
      prob.fixed_terms.push_back(Term{slots, 1.0});
      prob.fixed_values.push_back(beta);
      if (beta != 0.0) G += Eigen::MatrixXd(term_matrix(slots, beta));
      return;
    }
    double sign = 1.0;
    const std::vector<int> partner = en.swap_partner(slots, &sign);
    if (partner == slots) {
      if (sign < 0) return;
      fs.push_back(term_matrix(slots, 1.0));
      open_terms.push_back({Term{slots, 1.0}});
    } else if (slots < partner) {
      sdp::SpMat f = term_matrix(slots, 1.0);
      f += sign * term_matrix(partner, 1.0);
      f.makeCompressed();
      fs.push_back(std::move(f));
      open_terms.push_back({Term{slots, 1.0}, Term{partner, sign}});
    }
  });

  prob.open_parameters = static_cast<int>(fs.size()) - 1;
  prob.open_terms = std::move(open_terms);
  prob.sdp.G = std::move(G);
  prob.sdp.F = std::move(fs);
  prob.sdp.c = Eigen::VectorXd::Zero(prob.open_parameters + 1);
  prob.sdp.c(0) = 1.0;
  return prob;
}

MinTResult min_t(const bell::BellDiagonalDistribution& state, SymmetryMode mode,
                 const sdp::SdpOptions& opts) {
  const SymextProblem prob = build(state, mode);
  sdp::SdpSolution sol = sdp::solve_inequality(prob.sdp, opts);
  if (sol.status != sdp::SdpStatus::OPTIMAL)
    throw std::runtime_error("min_t: solver did not reach optimality: " + sol.note);
  return MinTResult{sol.x(0), std::move(sol)};
}

DensityMatrix extract_extension(const SymextProblem& problem, const sdp::SdpSolution& solution,
                                double t_tol) {
  if (solution.x(0) > t_tol)
    throw std::invalid_argument("extract_extension: t above tolerance, no extension");
  const int n = problem.pairs;
  const Eigen::Index dim = Eigen::Index(1) << (3 * n);
  const PauliTermTable& table = pauli_term_table();
  const auto& full_ops =
      problem.mode == SymmetryMode::GENERIC_BELL_DIAG ? table.P : table.R;
  Matc rho = Matc::Zero(dim, dim);
  auto add_term = [&](const std::vector<int>& slots, double coeff) {
    if (coeff == 0.0) return;
    Matc m = Matc::Identity(1, 1);
    for (int i = 0; i < n; ++i) m = kron(m, full_ops[slots[i] - 1]).eval();
    rho += coeff * m;
  };
  for (size_t i = 0; i < problem.fixed_terms.size(); ++i)
    add_term(problem.fixed_terms[i].slots, problem.fixed_values[i]);
  for (size_t v = 0; v < problem.open_terms.size(); ++v)
    for (const Term& t : problem.open_terms[v])
      add_term(t.slots, t.sign * solution.x(static_cast<Eigen::Index>(v) + 1));
  rho /= static_cast<double>(Eigen::Index(1) << (3 * n));
  std::vector<int> dims(3 * n, 2);
  return DensityMatrix(dims, std::move(rho), 1.0, 1e-7);
}

}  // namespace symext::symext_sdp
