#include "entver/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace entver {

namespace {

std::vector<int> strides_of(const Dims& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) {
    s[static_cast<size_t>(k)] = s[static_cast<size_t>(k) + 1] * dims[static_cast<size_t>(k) + 1];
  }
  return s;
}

void check_dims(const Dims& dims, int rows) {
  if (dims.empty()) throw Error("empty subsystem list");
  for (int d : dims) {
    if (d < 1) throw Error("subsystem dimension must be positive");
  }
  if (total_dim(dims) != rows) throw Error("subsystem dimensions do not match matrix size");
  if (rows > kMaxDim) throw Error("dimension exceeds dense limit of 256");
}

std::vector<int> complement(std::span<const int> keep, int n) {
  std::vector<bool> kept(static_cast<size_t>(n), false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw Error("subsystem index out of range");
    if (kept[static_cast<size_t>(k)]) throw Error("duplicate subsystem index");
    kept[static_cast<size_t>(k)] = true;
  }
  std::vector<int> rest;
  for (int k = 0; k < n; ++k) {
    if (!kept[static_cast<size_t>(k)]) rest.push_back(k);
  }
  return rest;
}

}  // namespace

int total_dim(const Dims& dims) {
  long long d = 1;
  for (int x : dims) {
    d *= x;
    if (d > (1 << 20)) throw Error("dimension overflow");
  }
  return static_cast<int>(d);
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix::DensityMatrix(Dims dims, CMatrix mat) : dims_(std::move(dims)), mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw Error("density matrix must be square");
  check_dims(dims_, static_cast<int>(mat_.rows()));
  if (!mat_.allFinite()) throw Error("density matrix has non-finite entries");
  if (!is_hermitian(mat_, kHermTol)) throw Error("density matrix is not Hermitian");
  mat_ = 0.5 * (mat_ + mat_.adjoint()).eval();
  const double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) throw Error("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) throw Error("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::normalized(Dims dims, const CMatrix& mat) {
  const double tr = mat.trace().real();
  if (!(tr > 0.0)) throw Error("cannot normalize matrix with nonpositive trace");
  return DensityMatrix(std::move(dims), mat / tr);
}

DensityMatrix DensityMatrix::maximally_mixed(Dims dims) {
  const int d = total_dim(dims);
  return DensityMatrix(std::move(dims), CMatrix::Identity(d, d) / static_cast<double>(d));
}

PureState::PureState(Dims dims, CVector amplitudes) : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
  check_dims(dims_, static_cast<int>(amps_.size()));
  if (!amps_.allFinite()) throw Error("pure state has non-finite amplitudes");
  if (std::abs(amps_.norm() - 1.0) > 1e-10) throw Error("pure state is not normalized");
}

PureState PureState::normalized(Dims dims, const CVector& amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw Error("cannot normalize zero vector");
  return PureState(std::move(dims), amplitudes / n);
}

Povm::Povm(std::vector<CMatrix> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw Error("POVM has no elements");
  const auto d = elements_.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& e : elements_) {
    if (e.rows() != d || e.cols() != d) throw Error("POVM elements differ in size");
    if (!is_hermitian(e, kPsdTol)) throw Error("POVM element is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (e + e.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol) throw Error("POVM element is not positive semidefinite");
    sum += e;
  }
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kPsdTol) {
    throw Error("POVM elements do not sum to identity");
  }
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CVector tensor(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix(std::move(dims), tensor(a.mat(), b.mat()));
}

CMatrix permute_subsystems(const CMatrix& m, const Dims& dims, std::span<const int> order) {
  const int n = static_cast<int>(dims.size());
  if (static_cast<int>(order.size()) != n) throw Error("permutation size mismatch");
  if (!complement(order, n).empty()) throw Error("not a permutation");
  bool identity = true;
  for (int p = 0; p < n; ++p) identity = identity && order[static_cast<size_t>(p)] == p;
  if (identity) return m;

  Dims new_dims(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) new_dims[static_cast<size_t>(p)] = dims[static_cast<size_t>(order[static_cast<size_t>(p)])];
  const auto old_strides = strides_of(dims);
  const auto new_strides = strides_of(new_dims);
  const int d = total_dim(dims);
  std::vector<int> map(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    int idx = 0;
    for (int p = 0; p < n; ++p) {
      const auto src = static_cast<size_t>(order[static_cast<size_t>(p)]);
      const int digit = (i / old_strides[src]) % dims[src];
      idx += digit * new_strides[static_cast<size_t>(p)];
    }
    map[static_cast<size_t>(i)] = idx;
  }
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]) = m(i, j);
  }
  return out;
}

CMatrix partial_trace(const CMatrix& m, const Dims& dims, std::span<const int> keep) {
  if (keep.empty()) throw Error("nothing kept");
  check_dims(dims, static_cast<int>(m.rows()));
  const int n = static_cast<int>(dims.size());
  const auto rest = complement(keep, n);
  std::vector<int> order(keep.begin(), keep.end());
  order.insert(order.end(), rest.begin(), rest.end());
  const CMatrix p = permute_subsystems(m, dims, order);
  int dk = 1;
  for (int k : keep) dk *= dims[static_cast<size_t>(k)];
  const int dt = static_cast<int>(m.rows()) / dk;
  CMatrix out = CMatrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i) {
    for (int j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (int t = 0; t < dt; ++t) s += p(i * dt + t, j * dt + t);
      out(i, j) = s;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  CMatrix red = partial_trace(rho.mat(), rho.dims(), keep);
  Dims dims;
  for (int k : keep) dims.push_back(rho.dims()[static_cast<size_t>(k)]);
  return DensityMatrix::normalized(std::move(dims), red);
}

CMatrix partial_transpose(const CMatrix& m, const Dims& dims, std::span<const int> transposed) {
  check_dims(dims, static_cast<int>(m.rows()));
  const int n = static_cast<int>(dims.size());
  std::vector<bool> flip(static_cast<size_t>(n), false);
  for (int k : transposed) {
    if (k < 0 || k >= n) throw Error("subsystem index out of range");
    flip[static_cast<size_t>(k)] = true;
  }
  const auto strides = strides_of(dims);
  const int d = static_cast<int>(m.rows());
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      int ni = 0;
      int nj = 0;
      for (int k = 0; k < n; ++k) {
        const auto ku = static_cast<size_t>(k);
        const int di = (i / strides[ku]) % dims[ku];
        const int dj = (j / strides[ku]) % dims[ku];
        ni += (flip[ku] ? dj : di) * strides[ku];
        nj += (flip[ku] ? di : dj) * strides[ku];
      }
      out(ni, nj) = m(i, j);
    }
  }
  return out;
}

CMatrix partial_transpose(const DensityMatrix& rho, int side) {
  if (rho.subsystems() != 2) throw Error("partial transpose needs a bipartition for more than two subsystems");
  if (side < 0 || side > 1) throw Error("side must be 0 or 1");
  const int t[1] = {side};
  return partial_transpose(rho.mat(), rho.dims(), t);
}

EigenSystem eigh(const CMatrix& m) {
  if (!is_hermitian(m, kHermTol)) throw Error("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  const auto n = m.rows();
  EigenSystem out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

RVector eig_hermitian(const CMatrix& m) {
  if (!is_hermitian(m, kHermTol)) throw Error("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

DensityMatrix project_to_physical(const CMatrix& m, Dims dims) {
  if (!(m.trace().real() > 0.0)) throw Error("unrecoverable estimate");
  const EigenSystem es = eigh(m);
  RVector lam = es.values.cwiseMax(0.0);
  const double s = lam.sum();
  if (!(s > 0.0)) throw Error("unrecoverable estimate");
  lam /= s;
  CMatrix out = es.vectors * lam.cast<cplx>().asDiagonal() * es.vectors.adjoint();
  return DensityMatrix(std::move(dims), out);
}

DensityMatrix project_to_physical(const CMatrix& m) {
  return project_to_physical(m, Dims{static_cast<int>(m.rows())});
}

CMatrix sqrtm_psd(const CMatrix& m) {
  const EigenSystem es = eigh(m);
  const RVector r = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * r.cast<cplx>().asDiagonal() * es.vectors.adjoint();
}

CMatrix embed_operator(const CMatrix& op, const Dims& dims, std::span<const int> targets) {
  const int n = static_cast<int>(dims.size());
  const auto rest = complement(targets, n);
  int dt = 1;
  for (int t : targets) dt *= dims[static_cast<size_t>(t)];
  if (op.rows() != dt || op.cols() != dt) throw Error("operator size does not match target subsystems");
  int dr = 1;
  for (int r : rest) dr *= dims[static_cast<size_t>(r)];
  const CMatrix big = tensor(op, CMatrix::Identity(dr, dr));

  std::vector<int> order(targets.begin(), targets.end());
  order.insert(order.end(), rest.begin(), rest.end());
  Dims permuted(static_cast<size_t>(n));
  std::vector<int> inverse(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    permuted[static_cast<size_t>(p)] = dims[static_cast<size_t>(order[static_cast<size_t>(p)])];
    inverse[static_cast<size_t>(order[static_cast<size_t>(p)])] = p;
  }
  return permute_subsystems(big, permuted, inverse);
}

CMatrix compress(const CMatrix& m, std::span<const int> basis) {
  const auto k = static_cast<Eigen::Index>(basis.size());
  CMatrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(basis[static_cast<size_t>(i)], basis[static_cast<size_t>(j)]);
  }
  return out;
}

namespace pauli {
CMatrix I() { return CMatrix::Identity(2, 2); }
CMatrix X() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
CMatrix Y() {
  CMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}
CMatrix Z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
CMatrix by_index(int k) {
  switch (k) {
    case 0: return I();
    case 1: return X();
    case 2: return Y();
    case 3: return Z();
    default: throw Error("Pauli index out of range");
  }
}
}  // namespace pauli

CVector bloch_ket(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (std::abs(r - 1.0) > 1e-9) throw Error("Bloch vector of a pure state must have unit length");
  const double theta = std::acos(std::clamp(z, -1.0, 1.0));
  const double phi = std::atan2(y, x);
  CVector v(2);
  v << std::cos(theta / 2.0), std::polar(1.0, phi) * std::sin(theta / 2.0);
  return v;
}

CMatrix bloch_density(double x, double y, double z) {
  if (x * x + y * y + z * z > 1.0 + 1e-12) throw Error("Bloch vector longer than 1");
  return 0.5 * (pauli::I() + x * pauli::X() + y * pauli::Y() + z * pauli::Z());
}

CVector basis_ket(int dim, int index) {
  if (index < 0 || index >= dim) throw Error("basis index out of range");
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

CVector singlet_ket() {
  CVector v = CVector::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  return v;
}

DensityMatrix singlet() {
  const CVector v = singlet_ket();
  return DensityMatrix({2, 2}, v * v.adjoint());
}

}  // namespace entver
