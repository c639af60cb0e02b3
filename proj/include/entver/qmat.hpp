#pragma once

// Dense complex linear algebra and quantum-state primitives for small
// Hilbert spaces (total dimension <= kMaxDim).

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace entver {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Dims = std::vector<int>;

inline constexpr double kHermTol = 1e-9;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr int kMaxDim = 256;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int total_dim(const Dims& dims);

bool is_hermitian(const CMatrix& m, double tol = kHermTol);

class PureState;

/// Hermitian, positive semidefinite, unit-trace matrix over a declared
/// tensor factorization. Construction validates; the stored matrix is
/// exactly Hermitian (symmetrized after the tolerance check).
class DensityMatrix {
 public:
  DensityMatrix(Dims dims, CMatrix mat);

  /// Divides by the trace before validating. For states produced by
  /// arithmetic (mixtures, filtering) whose trace drifted.
  static DensityMatrix normalized(Dims dims, const CMatrix& mat);
  static DensityMatrix maximally_mixed(Dims dims);

  const Dims& dims() const { return dims_; }
  const CMatrix& mat() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }
  int subsystems() const { return static_cast<int>(dims_.size()); }

 private:
  Dims dims_;
  CMatrix mat_;
};

class PureState {
 public:
  PureState(Dims dims, CVector amplitudes);
  static PureState normalized(Dims dims, const CVector& amplitudes);

  const Dims& dims() const { return dims_; }
  const CVector& amplitudes() const { return amps_; }
  CMatrix projector() const { return amps_ * amps_.adjoint(); }
  DensityMatrix density() const { return DensityMatrix(dims_, projector()); }

 private:
  Dims dims_;
  CVector amps_;
};

/// Positive operator-valued measure: PSD elements summing to the identity.
class Povm {
 public:
  explicit Povm(std::vector<CMatrix> elements);

  int size() const { return static_cast<int>(elements_.size()); }
  int dim() const { return static_cast<int>(elements_.front().rows()); }
  const CMatrix& operator[](int i) const { return elements_[static_cast<size_t>(i)]; }
  const std::vector<CMatrix>& elements() const { return elements_; }

 private:
  std::vector<CMatrix> elements_;
};

/// Kronecker product; the first argument is the most significant factor.
CMatrix tensor(const CMatrix& a, const CMatrix& b);
CVector tensor(const CVector& a, const CVector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state on `keep`, with the kept subsystems ordered as listed.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);
CMatrix partial_trace(const CMatrix& m, const Dims& dims, std::span<const int> keep);

/// Transpose on subsystem `side` of a two-subsystem state.
CMatrix partial_transpose(const DensityMatrix& rho, int side);
/// Transpose on every subsystem listed in `transposed` (any number of factors).
CMatrix partial_transpose(const CMatrix& m, const Dims& dims, std::span<const int> transposed);

/// Eigenvalues of a Hermitian matrix in nonincreasing order.
RVector eig_hermitian(const CMatrix& m);

struct EigenSystem {
  RVector values;   // nonincreasing
  CMatrix vectors;  // columns match `values`
};
EigenSystem eigh(const CMatrix& m);

/// Clips negative eigenvalues to zero and renormalizes to unit trace.
DensityMatrix project_to_physical(const CMatrix& m, Dims dims);
DensityMatrix project_to_physical(const CMatrix& m);

/// Square root of a PSD matrix (negative eigenvalues clipped).
CMatrix sqrtm_psd(const CMatrix& m);

/// Reorders subsystems: position p of the result holds subsystem order[p] of the input.
CMatrix permute_subsystems(const CMatrix& m, const Dims& dims, std::span<const int> order);

/// Lifts `op`, acting on `targets` (in that order), to the full space.
CMatrix embed_operator(const CMatrix& op, const Dims& dims, std::span<const int> targets);

/// Restriction of a state to the span of the given basis indices (no renormalization).
CMatrix compress(const CMatrix& m, std::span<const int> basis);

namespace pauli {
CMatrix I();
CMatrix X();
CMatrix Y();
CMatrix Z();
/// Index 0..3 -> I, X, Y, Z.
CMatrix by_index(int k);
}  // namespace pauli

/// Single-qubit pure state with Bloch vector (x, y, z) of unit length.
CVector bloch_ket(double x, double y, double z);
/// Single-qubit density matrix (I + r.sigma)/2, |r| <= 1.
CMatrix bloch_density(double x, double y, double z);

CVector basis_ket(int dim, int index);

/// (|01> - |10>)/sqrt(2).
CVector singlet_ket();
DensityMatrix singlet();

}  // namespace entver
