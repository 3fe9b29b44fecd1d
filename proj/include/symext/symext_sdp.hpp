// Symmetry-reduced symmetric-extension SDP for N-pair Bell-diagonal states:
// the projected Pauli term tables, the open/fixed coefficient bookkeeping,
// the t-augmented solve, and full-extension extraction.
#pragma once

#include <vector>

#include "symext/bell.hpp"
#include "symext/quantum_core.hpp"
#include "symext/sdp.hpp"

namespace symext::symext_sdp {

enum class SymmetryMode { GENERIC_BELL_DIAG, S_SYMMETRIC };

// The per-pair operator tables: the 16 Pauli triples P_i with their
// projections Q_i onto the positive parity eigenspace, and the 10 combined
// terms R_i with projections T_i used under the extra phase-gate symmetry.
// Projections are verified against the defining projector at load time.
struct PauliTermTable {
  std::vector<Matc> P;  // 16 on 8 dims
  std::vector<Matc> Q;  // 16 on 4 dims
  std::vector<Matc> R;  // 10 on 8 dims
  std::vector<Matc> T;  // 10 on 4 dims
  std::vector<int> swap_p;   // swap partner, 1-based over P indices
  std::vector<int> swap_r;   // swap partner over R indices; R10 flips sign
};
const PauliTermTable& pauli_term_table();

struct Term {
  std::vector<int> slots;  // 1-based per-pair operator indices
  double sign = 1.0;       // sign of the partner within a merged variable
};

struct SymextProblem {
  int pairs = 1;
  SymmetryMode mode = SymmetryMode::GENERIC_BELL_DIAG;
  sdp::SdpInequality sdp;     // variable 0 is t (F_0 = identity, c = e_0)
  int open_parameters = 0;    // open coefficient count, excluding t
  // One entry per open variable: the orbit members that share its value.
  std::vector<std::vector<Term>> open_terms;
  std::vector<Term> fixed_terms;
  std::vector<double> fixed_values;
};

SymextProblem build(const bell::BellDiagonalDistribution& state, SymmetryMode mode);

// Open coefficient count without building matrices.
long count_open_parameters(int pairs, SymmetryMode mode);

struct MinTResult {
  double t;
  sdp::SdpSolution solution;
};

// Minimal t with t*1/2^{3N} + rho^{ABB'} positive semidefinite; the state is
// normalized internally. Negative values mean the extendible set's interior.
MinTResult min_t(const bell::BellDiagonalDistribution& state, SymmetryMode mode,
                 const sdp::SdpOptions& opts = {});

// Dense extension on qubit triples (A1,B1,B'1,A2,...) with t clamped to 0;
// requires an OPTIMAL solution with t <= tolerance.
DensityMatrix extract_extension(const SymextProblem& problem, const sdp::SdpSolution& solution,
                                double t_tol = 1e-7);

}  // namespace symext::symext_sdp
