// Explicit symmetric-extension witnesses for the two-encoded-bit
// announcement: the diagonal and equal-angle 4x4 blocks, the iterative 5x5
// block for the p_y = 0 family, and reconstruction of the full extended
// state from a block.
#pragma once

#include <map>
#include <string>

#include "symext/quantum_core.hpp"

namespace symext::witnesses {

enum class WitnessVariant { M4_DIAG, M4_EQUAL_ANGLE, M5_ITERATIVE };

struct WitnessBlock {
  WitnessVariant variant;
  Matd entries;                           // 4x4 or 5x5, includes the 1/32 scale
  double cos_theta, cos_phi, cos_alpha;   // construction angles
  std::map<std::string, double> auxiliary;
  bool psd = false;
  double min_eig = 0.0;
  int iterations = 0;      // 5x5 only
  double residual = 0.0;   // 5x5 fixed-point residual
  bool converged = true;
};

// Determinant factor controlling positivity of the diagonal 4x4 form.
double m4_positivity_f(double cos_theta, double cos_phi, double cos_alpha);

WitnessBlock m4_diag(double theta, double phi, double alpha);
WitnessBlock m4_diag_from_cos(double ct, double cp, double ca);

// Two unit subblocks (cos phi = cos alpha = 1/sqrt 5).
WitnessBlock m4_equal_angle(double theta);
WitnessBlock m4_equal_angle_from_cos(double ct);

// Iterative 5x5 block for the p_y = 0 family; reports divergence instead of
// guessing when the fixed point is not reached.
WitnessBlock m5_iterative(double theta, double phi, double alpha, int max_iter = 200,
                          double tol = 1e-14);
WitnessBlock m5_iterative_from_cos(double ct, double cp, double ca, int max_iter = 200,
                                   double tol = 1e-14);

// Residuals of the linear constraints the block must satisfy (equalities for
// the first four, saturation / modified diagonal constraints for the rest).
std::map<std::string, double> constraint_residuals(const WitnessBlock& block);

// The 16-dimensional positive-parity block of the extension.
Matd projected_block16(const WitnessBlock& block);

// Full (subnormalized) extension on A (x) B (x) B' with dims (4, 4, 4),
// reassembled from the projected block by the bit-flip symmetry.
DensityMatrix reconstruct_extension(const WitnessBlock& block);

// The state the reconstruction must reduce to: the three-pair parity
// announcement applied to three angle states (p_y = 0 for the 5x5 variant),
// as a dense matrix on (A1 A2) (x) (B1 B2).
Matc expected_reduction(const WitnessBlock& block);

}  // namespace symext::witnesses
