#include "entver/measures.hpp"

#include <algorithm>
#include <cmath>

namespace entver {

namespace {

void require_two_qubits(const DensityMatrix& rho) {
  if (rho.dims() != Dims{2, 2}) throw Error("expected a two-qubit state");
}

CMatrix sqrt_complement(const CMatrix& f) {
  const auto d = f.rows();
  return sqrtm_psd(CMatrix::Identity(d, d) - f.adjoint() * f);
}

}  // namespace

FilterPair FilterPair::identity(int dA, int dB) {
  return FilterPair{CMatrix::Identity(dA, dA), CMatrix::Identity(dB, dB)};
}

void FilterPair::validate() const {
  for (const CMatrix* f : {&fA, &fB}) {
    if (f->rows() != f->cols()) throw Error("filter operator must be square");
    const CMatrix ff = f->adjoint() * (*f);
    if (eig_hermitian(0.5 * (ff + ff.adjoint()))(0) > 1.0 + kPsdTol) throw Error("filter operator is not a contraction");
  }
}

CMatrix spin_flip(const CMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw Error("expected a two-qubit state");
  const CMatrix yy = tensor(pauli::Y(), pauli::Y());
  return yy * rho.conjugate() * yy;
}

CMatrix spin_flip(const DensityMatrix& rho) {
  require_two_qubits(rho);
  return spin_flip(rho.mat());
}

ConcurrenceBreakdown concurrence(const DensityMatrix& rho) {
  require_two_qubits(rho);
  const CMatrix s = sqrtm_psd(rho.mat());
  const CMatrix r = s * spin_flip(rho.mat()) * s;
  const RVector ev = eig_hermitian(0.5 * (r + r.adjoint()));
  ConcurrenceBreakdown out;
  for (int k = 0; k < 4; ++k) {
    double l = ev(k);
    if (l < -1e-8) throw Error("negative eigenvalue of rho * spin_flip(rho): non-physical input");
    out.lambdas[static_cast<size_t>(k)] = std::max(l, 0.0);
  }
  const auto& l = out.lambdas;
  const double c = std::sqrt(l[0]) - std::sqrt(l[1]) - std::sqrt(l[2]) - std::sqrt(l[3]);
  out.concurrence = std::clamp(c, 0.0, 1.0);
  return out;
}

double negativity(const CMatrix& rho, const Dims& dims) {
  if (dims.size() != 2) throw Error("negativity needs a bipartite state");
  const int t[1] = {1};
  const CMatrix pt = partial_transpose(rho, dims, t);
  const RVector ev = eig_hermitian(0.5 * (pt + pt.adjoint()));
  return std::max(0.0, (ev.cwiseAbs().sum() - 1.0) / 2.0);
}

double negativity(const DensityMatrix& rho) { return negativity(rho.mat(), rho.dims()); }

double entanglement(const DensityMatrix& rho, Measure m) {
  return m == Measure::concurrence ? concurrence(rho).concurrence : negativity(rho);
}

FilterOutcome apply_filter(const DensityMatrix& rho, const FilterPair& f) {
  if (rho.subsystems() != 2) throw Error("filtering needs a bipartite state");
  if (f.fA.rows() != rho.dims()[0] || f.fB.rows() != rho.dims()[1]) throw Error("filter dimensions do not match the state");
  f.validate();
  const CMatrix gA = sqrt_complement(f.fA);
  const CMatrix gB = sqrt_complement(f.fB);

  const CMatrix k_pass = tensor(f.fA, f.fB);
  const CMatrix pass = k_pass * rho.mat() * k_pass.adjoint();
  const double p_pass = pass.trace().real();
  if (p_pass < 1e-12) throw Error("filter annihilates state");

  CMatrix fail = CMatrix::Zero(rho.dim(), rho.dim());
  for (const CMatrix& k : {tensor(gA, f.fB), tensor(f.fA, gB), tensor(gA, gB)}) fail += k * rho.mat() * k.adjoint();
  const double p_fail = fail.trace().real();

  FilterOutcome out{p_pass, DensityMatrix::normalized(rho.dims(), pass), p_fail, std::nullopt};
  if (p_fail > 1e-12) out.rho_fail = DensityMatrix::normalized(rho.dims(), fail);
  if (std::abs(p_pass + p_fail - 1.0) > 1e-9) throw Error("filter branches do not sum to one");
  return out;
}

bool monotonicity_check(const DensityMatrix& rho, const FilterPair& f, Measure m) {
  const FilterOutcome o = apply_filter(rho, f);
  double after = o.p_pass * entanglement(o.rho_pass, m);
  if (o.rho_fail) after += o.p_fail * entanglement(*o.rho_fail, m);
  return entanglement(rho, m) >= after - kMonotonicityTol;
}

DensityMatrix werner_state(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("Werner parameter outside [0, 1]");
  const CVector s = singlet_ket();
  return DensityMatrix({2, 2}, alpha * s * s.adjoint() + (1.0 - alpha) * CMatrix::Identity(4, 4) / 4.0);
}

}  // namespace entver
