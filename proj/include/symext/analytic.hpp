// Closed-form symmetric-extension deciders for the proven two-qubit classes,
// the spectrum condition with a constructive pure extension, the random
// filter falsifier, and channel (anti)degradability checks.
#pragma once

#include <cstdint>
#include <string>

#include "symext/bell.hpp"
#include "symext/quantum_core.hpp"

namespace symext::analytic {

enum class Verdict { YES, NO, CONJECTURED_YES, CONJECTURED_NO };

struct Decision {
  Verdict verdict;
  double margin;     // signed distance to the governing inequality; >= 0 means YES
  std::string rule;  // identifier of the applied theorem
};

const char* verdict_name(Verdict v);

// Raised when no implemented decider applies.
struct UndecidedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deciders --------------------------------------------------------------

// Bell-diagonal N=1 state: YES iff one of the three positivity conditions on
// (alpha1, alpha2, alpha3) holds; margin = best minimal slack.
Decision decide_bell_diag(const bell::BellDiagonalDistribution& s);
double bell_diag_margin(const bell::BellDiagonalDistribution& s);

// Generic two-qubit state through the conjectured purity/determinant
// inequality; verdict is proven only inside a recognized class.
Decision decide_conjecture(const DensityMatrix& rho);

// Rank-2 states; necessary-and-sufficient for 2x2 and 2xN, necessary-only
// for the remaining shapes.
Decision decide_rank2(const DensityMatrix& rho);

// Two-qubit states supported on the symmetric subspace.
Decision decide_sym_subspace(const DensityMatrix& rho);

// Sigma_z (x) sigma_z invariant two-qubit states with vanishing y entry,
// given by their standard-form parameters (p1 >= p2,p3,p4, 0 <= x <= sqrt(p1 p4)).
Decision decide_zz_y0(double p1, double p2, double p3, double p4, double x);

// Pure extendibility ------------------------------------------------------

bool spectrum_condition(const DensityMatrix& rho, double tol = 1e-9);

// Pure symmetric extension of a two-qubit state with spec(rho^AB)=spec(rho^B).
PureState construct_pure_extension(const DensityMatrix& rho);

struct FilterReport {
  bool refuted = false;
  Matc witness_filter;
  double deviation = 0.0;  // spectra deviation of the refuting filter
};

// Applies filters M (x) 1 and tests the spectrum condition on the result.
// Explicit candidate filters are tried first, then random invertible ones.
FilterReport filter_falsify(const DensityMatrix& rho, int trials, std::uint64_t rng_seed,
                            const std::vector<Matc>& explicit_filters = {});

double spectra_deviation_after_filter(const DensityMatrix& rho, const Matc& filter);

// Channels ---------------------------------------------------------------

Decision is_antidegradable(const QuantumChannel& channel);
Decision is_degradable(const QuantumChannel& channel);

// Routes a bipartite state to the best applicable proven decider; throws
// UndecidedError when none applies.
Decision decide_state(const DensityMatrix& rho);

}  // namespace symext::analytic
