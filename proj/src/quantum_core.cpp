#include "symext/quantum_core.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace symext {

namespace {

int product(const std::vector<int>& dims) {
  int p = 1;
  for (int d : dims) p *= d;
  return p;
}

// Decompose a flat index into per-subsystem indices (first subsystem most
// significant).
void unflatten(int flat, const std::vector<int>& dims, std::vector<int>& out) {
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    out[k] = flat % dims[k];
    flat /= dims[k];
  }
}

int flatten(const std::vector<int>& idx, const std::vector<int>& dims) {
  int flat = 0;
  for (size_t k = 0; k < dims.size(); ++k) flat = flat * dims[k] + idx[k];
  return flat;
}

}  // namespace

Matc kron_chain(const std::vector<Matc>& factors) {
  Matc out = Matc::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f).eval();
  return out;
}

const Matc& pauli(int i) {
  static const std::array<Matc, 4> sigma = [] {
    std::array<Matc, 4> s;
    s[0] = Matc::Identity(2, 2);
    s[1] = (Matc(2, 2) << 0, 1, 1, 0).finished();
    s[2] = (Matc(2, 2) << 0, cxd(0, -1), cxd(0, 1), 0).finished();
    s[3] = (Matc(2, 2) << 1, 0, 0, -1).finished();
    return s;
  }();
  return sigma.at(i);
}

EighResult eigh_sorted(const Matc& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matc> es(hermitian);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh_sorted: solver failed");
  const Eigen::Index n = hermitian.rows();
  EighResult out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    Vecc v = es.eigenvectors().col(n - 1 - i);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(v(k)) > 1e-10) {
        v *= std::conj(v(k)) / std::abs(v(k));
        break;
      }
    }
    out.vectors.col(i) = v;
  }
  return out;
}

DensityMatrix::DensityMatrix(std::vector<int> dims, Matc entries, double declared_trace,
                             double psd_tol)
    : dims_(std::move(dims)), entries_(std::move(entries)), trace_(declared_trace) {
  const int d = product(dims_);
  if (entries_.rows() != d || entries_.cols() != d)
    throw std::invalid_argument("DensityMatrix: entries side does not match dims product");
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(entries_.trace().real() - trace_) > 1e-10 ||
      std::abs(entries_.trace().imag()) > 1e-10)
    throw std::invalid_argument("DensityMatrix: trace mismatch");
  Eigen::SelfAdjointEigenSolver<Matc> es(entries_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw std::invalid_argument("DensityMatrix: not positive semidefinite");
}

PureState::PureState(std::vector<int> d, Vecc amps) : dims(std::move(d)), amplitudes(std::move(amps)) {
  if (amplitudes.size() != product(dims))
    throw std::invalid_argument("PureState: amplitude length does not match dims");
  if (std::abs(amplitudes.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("PureState: not unit norm");
}

DensityMatrix PureState::to_density() const {
  return DensityMatrix(dims, amplitudes * amplitudes.adjoint(), 1.0);
}

QuantumChannel::QuantumChannel(std::vector<Matc> kraus) : kraus_ops(std::move(kraus)) {
  if (kraus_ops.empty()) throw std::invalid_argument("QuantumChannel: no Kraus operators");
  output_dim = static_cast<int>(kraus_ops[0].rows());
  input_dim = static_cast<int>(kraus_ops[0].cols());
  Matc acc = Matc::Zero(input_dim, input_dim);
  for (const auto& k : kraus_ops) {
    if (k.rows() != output_dim || k.cols() != input_dim)
      throw std::invalid_argument("QuantumChannel: Kraus operator dimension mismatch");
    acc += k.adjoint() * k;
  }
  if ((acc - Matc::Identity(input_dim, input_dim)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("QuantumChannel: Kraus operators not trace preserving");
}

Matc QuantumChannel::apply(const Matc& rho) const {
  Matc out = Matc::Zero(output_dim, output_dim);
  for (const auto& k : kraus_ops) out += k * rho * k.adjoint();
  return out;
}

QuantumChannel QuantumChannel::complementary() const {
  const int e = static_cast<int>(kraus_ops.size());
  std::vector<Matc> comp(output_dim, Matc::Zero(e, input_dim));
  for (int j = 0; j < output_dim; ++j)
    for (int m = 0; m < e; ++m) comp[j].row(m) = kraus_ops[m].row(j);
  return QuantumChannel(std::move(comp));
}

int QuantumChannel::kraus_rank(double tol) const {
  Matc gram(kraus_ops.size(), kraus_ops.size());
  for (size_t a = 0; a < kraus_ops.size(); ++a)
    for (size_t b = 0; b < kraus_ops.size(); ++b)
      gram(a, b) = (kraus_ops[a].adjoint() * kraus_ops[b]).trace();
  Eigen::SelfAdjointEigenSolver<Matc> es(gram, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > tol) ++rank;
  return rank;
}

Matc partial_trace(const Matc& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set empty");
  std::vector<bool> kept(dims.size(), false);
  for (int s : keep) {
    if (s < 0 || s >= static_cast<int>(dims.size()))
      throw std::out_of_range("partial_trace: subsystem index out of range");
    kept[s] = true;
  }
  std::vector<int> keep_sorted(keep);
  std::sort(keep_sorted.begin(), keep_sorted.end());
  std::vector<int> kdims, tdims, tsub;
  for (size_t s = 0; s < dims.size(); ++s)
    (kept[s] ? kdims : tdims).push_back(dims[s]);
  for (size_t s = 0; s < dims.size(); ++s)
    if (!kept[s]) tsub.push_back(static_cast<int>(s));
  const int dk = product(kdims), dt = product(tdims);
  Matc out = Matc::Zero(dk, dk);
  std::vector<int> ridx(dims.size()), cidx(dims.size());
  std::vector<int> kr(kdims.size()), kc(kdims.size()), tt(tdims.size());
  for (int r = 0; r < dk; ++r) {
    unflatten(r, kdims, kr);
    for (int c = 0; c < dk; ++c) {
      unflatten(c, kdims, kc);
      cxd acc = 0;
      for (int t = 0; t < dt; ++t) {
        unflatten(t, tdims, tt);
        int ik = 0, it = 0;
        for (size_t s = 0; s < dims.size(); ++s) {
          if (kept[s]) {
            ridx[s] = kr[ik];
            cidx[s] = kc[ik];
            ++ik;
          } else {
            ridx[s] = cidx[s] = tt[it];
            ++it;
          }
        }
        acc += m(flatten(ridx, dims), flatten(cidx, dims));
      }
      out(r, c) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  std::vector<int> kdims;
  for (size_t s = 0; s < rho.dims().size(); ++s)
    if (std::find(keep.begin(), keep.end(), static_cast<int>(s)) != keep.end())
      kdims.push_back(rho.dims()[s]);
  return DensityMatrix(kdims, partial_trace(rho.entries(), rho.dims(), keep),
                       rho.declared_trace());
}

Matc permute_subsystems(const Matc& m, const std::vector<int>& dims, const std::vector<int>& perm) {
  if (perm.size() != dims.size())
    throw std::invalid_argument("permute_subsystems: permutation length mismatch");
  std::vector<int> ndims(dims.size());
  for (size_t s = 0; s < dims.size(); ++s) ndims[perm[s]] = dims[s];
  const int d = product(dims);
  std::vector<int> map(d);
  std::vector<int> idx(dims.size()), nidx(dims.size());
  for (int f = 0; f < d; ++f) {
    unflatten(f, dims, idx);
    for (size_t s = 0; s < dims.size(); ++s) nidx[perm[s]] = idx[s];
    map[f] = flatten(nidx, ndims);
  }
  Matc out(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out(map[r], map[c]) = m(r, c);
  return out;
}

DensityMatrix permute_subsystems(const DensityMatrix& rho, const std::vector<int>& perm) {
  std::vector<int> ndims(rho.dims().size());
  for (size_t s = 0; s < rho.dims().size(); ++s) ndims[perm[s]] = rho.dims()[s];
  return DensityMatrix(ndims, permute_subsystems(rho.entries(), rho.dims(), perm),
                       rho.declared_trace());
}

Vecd spectrum(const Matc& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matc> es(hermitian, Eigen::EigenvaluesOnly);
  std::vector<double> vals;
  for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
    if (es.eigenvalues()(i) > 1e-12) vals.push_back(es.eigenvalues()(i));
  return Eigen::Map<Vecd>(vals.data(), vals.size());
}

Vecd spectrum(const DensityMatrix& rho) { return spectrum(rho.entries()); }

PureState purify(const DensityMatrix& rho) {
  EighResult eig = eigh_sorted(rho.entries());
  int rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > 1e-12) ++rank;
  rank = std::max(rank, 1);
  const int d = rho.dim();
  Vecc amps = Vecc::Zero(d * rank);
  for (int j = 0; j < rank; ++j) {
    const double lam = std::max(eig.values(j), 0.0);
    for (int i = 0; i < d; ++i) amps(i * rank + j) = std::sqrt(lam) * eig.vectors(i, j);
  }
  amps /= amps.norm();
  std::vector<int> dims = rho.dims();
  dims.push_back(rank);
  return PureState(dims, amps);
}

RMatrix r_matrix(const DensityMatrix& rho) {
  if (rho.dims() != std::vector<int>{2, 2})
    throw std::invalid_argument("r_matrix: dims must be (2,2)");
  RMatrix out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out.r(i, j) = (kron(pauli(i), pauli(j)) * rho.entries()).trace().real();
  return out;
}

DensityMatrix from_r_matrix(const RMatrix& rm) {
  Matc m = Matc::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m += rm.r(i, j) * kron(pauli(i), pauli(j));
  return DensityMatrix({2, 2}, m / 4.0, rm.r(0, 0));
}

DensityMatrix choi_state(const QuantumChannel& channel) {
  const int din = channel.input_dim, dout = channel.output_dim;
  Matc rho = Matc::Zero(din * dout, din * dout);
  Matc ejk(din, din);
  for (int j = 0; j < din; ++j)
    for (int k = 0; k < din; ++k) {
      ejk.setZero();
      ejk(j, k) = 1.0;
      const Matc block = channel.apply(ejk);
      rho.block(j * dout, k * dout, dout, dout) = block;
    }
  return DensityMatrix({din, dout}, rho / static_cast<double>(din));
}

Matc swap_last_two(const std::vector<int>& dims) {
  const size_t ns = dims.size();
  if (ns < 2 || dims[ns - 1] != dims[ns - 2])
    throw std::invalid_argument("swap_last_two: last two dims must match");
  std::vector<int> perm(ns);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[ns - 1], perm[ns - 2]);
  const int d = product(dims);
  Matc p = Matc::Zero(d, d);
  std::vector<int> idx(ns), nidx(ns);
  std::vector<int> ndims(dims);
  for (int f = 0; f < d; ++f) {
    unflatten(f, dims, idx);
    for (size_t s = 0; s < ns; ++s) nidx[perm[s]] = idx[s];
    p(flatten(nidx, ndims), f) = 1.0;
  }
  return p;
}

DensityMatrix symmetrize_swap(const DensityMatrix& rho) {
  const Matc p = swap_last_two(rho.dims());
  Matc sym = 0.5 * (rho.entries() + p * rho.entries() * p.adjoint());
  return DensityMatrix(rho.dims(), std::move(sym), rho.declared_trace());
}

}  // namespace symext
