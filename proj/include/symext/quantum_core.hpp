// Dense finite-dimensional quantum-state primitives on top of Eigen:
// density matrices over explicit subsystem lists, partial trace,
// purification, Pauli/Bell conversions, swap symmetrization, Choi map.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace symext {

using cxd = std::complex<double>;
using Matc = Eigen::MatrixXcd;
using Matd = Eigen::MatrixXd;
using Vecc = Eigen::VectorXcd;
using Vecd = Eigen::VectorXd;

// Eigen-style free helpers -------------------------------------------------

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.derived();
  return out;
}

Matc kron_chain(const std::vector<Matc>& factors);

// Pauli matrices indexed I=0, x=1, y=2, z=3.
const Matc& pauli(int i);

// Hermitian eigendecomposition with deterministic ordering: eigenvalues
// descending, each eigenvector scaled so its first nonzero component is
// positive real.
struct EighResult {
  Vecd values;   // descending
  Matc vectors;  // columns matched to values
};
EighResult eigh_sorted(const Matc& hermitian);

// Domain types --------------------------------------------------------------

class DensityMatrix {
 public:
  // Validates hermiticity (1e-12), positivity (min eigenvalue >= -psd_tol)
  // and trace (declared_trace within 1e-10).
  DensityMatrix(std::vector<int> dims, Matc entries, double declared_trace = 1.0,
                double psd_tol = 1e-10);

  const std::vector<int>& dims() const { return dims_; }
  const Matc& entries() const { return entries_; }
  double declared_trace() const { return trace_; }
  int dim() const { return static_cast<int>(entries_.rows()); }

 private:
  std::vector<int> dims_;
  Matc entries_;
  double trace_;
};

struct PureState {
  std::vector<int> dims;
  Vecc amplitudes;  // unit norm

  PureState(std::vector<int> d, Vecc amps);
  DensityMatrix to_density() const;
};

struct QuantumChannel {
  std::vector<Matc> kraus_ops;
  int input_dim = 0;
  int output_dim = 0;

  QuantumChannel(std::vector<Matc> kraus);
  Matc apply(const Matc& rho) const;
  // Channel to the environment: Kraus operators C_j with (C_j)_{m,i} = (K_m)_{j,i}.
  QuantumChannel complementary() const;
  // Number of independent Kraus operators (rank of the Choi matrix).
  int kraus_rank(double tol = 1e-10) const;
};

struct RMatrix {
  Eigen::Matrix4d r;  // r(0,0) equals the trace of the underlying state
};

// Operations ----------------------------------------------------------------

// Trace out every subsystem not listed in `keep`; kept subsystems stay in
// their original order.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);
Matc partial_trace(const Matc& m, const std::vector<int>& dims, const std::vector<int>& keep);

// Reorder subsystems: subsystem i of the input becomes subsystem perm[i] of
// the output.
DensityMatrix permute_subsystems(const DensityMatrix& rho, const std::vector<int>& perm);
Matc permute_subsystems(const Matc& m, const std::vector<int>& dims, const std::vector<int>& perm);

// Nonincreasing vector of eigenvalues above 1e-12.
Vecd spectrum(const DensityMatrix& rho);
Vecd spectrum(const Matc& hermitian);

// Purification onto system (x) purifier with purifier dimension = rank.
PureState purify(const DensityMatrix& rho);

RMatrix r_matrix(const DensityMatrix& rho);        // dims must be (2,2)
DensityMatrix from_r_matrix(const RMatrix& r);

// Choi-Jamiolkowski state on input (x) output, first subsystem maximally mixed.
DensityMatrix choi_state(const QuantumChannel& channel);

// Average a state on A (x) B (x) B' with its image under swapping the last
// two subsystems (which must have equal dimension).
DensityMatrix symmetrize_swap(const DensityMatrix& rho);

// Unitary permutation matrix swapping the last two of `dims`.
Matc swap_last_two(const std::vector<int>& dims);

}  // namespace symext
