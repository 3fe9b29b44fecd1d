// Multi-qubit Bell-diagonal states as weight vectors over Pauli error
// strings, QBER parameter estimation, the alpha coordinates, D_C, the
// repetition-code recursion and the generic circuit-level announcement
// transform.
//
// Error strings are indexed base-4, pair index most significant, digit
// values I=0, x=1, y=2, z=3 (bit-error part = digit in {1,2}, phase part =
// digit in {2,3}).
#pragma once

#include <Eigen/Dense>

#include <vector>

#include "symext/gf2.hpp"
#include "symext/quantum_core.hpp"

namespace symext::bell {

struct BellDiagonalDistribution {
  int pairs = 1;
  Eigen::VectorXd weights;  // length 4^pairs, nonnegative
  double total = 1.0;       // trace = success probability

  BellDiagonalDistribution() = default;
  BellDiagonalDistribution(int pairs_, Eigen::VectorXd weights_);
  double operator[](Eigen::Index i) const { return weights(i); }
  BellDiagonalDistribution normalized() const;
};

struct AlphaCoords {
  double a0 = 1, a1 = 0, a2 = 0, a3 = 0;
};

struct ErrorRates {
  double qx = 0, qy = 0, qz = 0;
};

struct Thresholds {
  double six_state_two_way;       // (5 - sqrt 5)/10
  double bb84_two_way;            // 1/5
  double six_state_symext_oneway; // 1/6
};

enum class Basis { X, Y, Z };

// Construction ---------------------------------------------------------------

BellDiagonalDistribution isotropic(double p);                    // N=1, 0 <= p <= 1/3
BellDiagonalDistribution from_qber(const ErrorRates& rates);     // N=1
BellDiagonalDistribution bb84_family(double q, double r22);     // N=1
BellDiagonalDistribution rotate_basis(const BellDiagonalDistribution& s, Basis b);
BellDiagonalDistribution hadamard_frame(const BellDiagonalDistribution& s);  // swaps p_x, p_z

// Closed-form repetition-code output parametrized by an angle; with y_zero
// the p_y weight moves onto p_x.
BellDiagonalDistribution rcad_angle_state(double theta, bool y_zero = false);
// cos(theta) of the repetition-code output on `blocksize` threshold pairs.
double rcad_cos(int blocksize);

// Coordinates and diagnostics ------------------------------------------------

AlphaCoords alpha(const BellDiagonalDistribution& s);  // N=1
BellDiagonalDistribution from_alpha(const AlphaCoords& a);
double d_c(const BellDiagonalDistribution& s);  // extended real (+-inf allowed)

// Announcement transforms ----------------------------------------------------

BellDiagonalDistribution rcad(const BellDiagonalDistribution& s, int blocksize);
BellDiagonalDistribution lad_apply(const gf2::ParityCheckMatrix& h,
                                   const BellDiagonalDistribution& input);
BellDiagonalDistribution iid(const BellDiagonalDistribution& s, int pairs);

// Max deviation from x<->y weight symmetry over single pair flips.
double s_symmetry_defect(const BellDiagonalDistribution& s);

// Thresholds -------------------------------------------------------------

Thresholds thresholds();
// Minimal p such that the repetition-code output on blocksize n copies of
// isotropic(p) has a symmetric extension; bisected on [0, 1/4].
double threshold_p(int n);

// Dense state ------------------------------------------------------------

// Density matrix with per-pair qubit layout (A1, B1, A2, B2, ...).
DensityMatrix to_density_matrix(const BellDiagonalDistribution& s);

}  // namespace symext::bell
