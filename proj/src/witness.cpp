#include "entver/protocols/witness.hpp"

#include <cmath>

#include "entver/protocols/single_run.hpp"
#include "entver/random.hpp"

namespace entver {

CMatrix WitnessDecomposition::reconstruct() const {
  if (coeffs.rows() != static_cast<Eigen::Index>(povm_a.size()) || coeffs.cols() != static_cast<Eigen::Index>(povm_b.size())) {
    throw Error("inconsistent decomposition: coefficient shape differs from the POVMs");
  }
  const auto d = povm_a.front().rows() * povm_b.front().rows();
  CMatrix out = CMatrix::Zero(d, d);
  for (size_t i = 0; i < povm_a.size(); ++i) {
    for (size_t j = 0; j < povm_b.size(); ++j) {
      const double c = coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (c != 0.0) out += c * tensor(povm_a[i], povm_b[j]);
    }
  }
  return out;
}

double decomposition_residual(const CMatrix& w, const WitnessDecomposition& d) {
  const CMatrix r = d.reconstruct();
  if (r.rows() != w.rows()) throw Error("inconsistent decomposition: size differs from the witness");
  return (r - w).cwiseAbs().maxCoeff();
}

std::vector<CMatrix> pauli6_povm() {
  std::vector<CMatrix> out;
  for (int k : {3, 1, 2}) {
    for (double s : {1.0, -1.0}) out.push_back((pauli::I() + s * pauli::by_index(k)) / 6.0);
  }
  return out;
}

WitnessDecomposition pauli6_decomposition(const CMatrix& w) {
  if (w.rows() != 4 || !is_hermitian(w)) throw Error("expected a Hermitian two-qubit witness");
  const auto povm = pauli6_povm();
  // Tr(F_i sigma_a) for each element and Pauli.
  Eigen::MatrixXd t(6, 4);
  for (int i = 0; i < 6; ++i) {
    for (int a = 0; a < 4; ++a) t(i, a) = (povm[static_cast<size_t>(i)] * pauli::by_index(a)).trace().real();
  }
  // Tr(W sigma_a x sigma_b) = sum_ij c_ij t_ia t_jb.
  Eigen::MatrixXd lhs(16, 36);
  Eigen::VectorXd rhs(16);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const int row = 4 * a + b;
      rhs(row) = (w * tensor(pauli::by_index(a), pauli::by_index(b))).trace().real();
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) lhs(row, 6 * i + j) = t(i, a) * t(j, b);
      }
    }
  }
  const Eigen::VectorXd c = lhs.completeOrthogonalDecomposition().solve(rhs);
  WitnessDecomposition d{povm, povm, Eigen::MatrixXd(6, 6)};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) d.coeffs(i, j) = c(6 * i + j);
  }
  if (decomposition_residual(w, d) > kDecompositionTol) throw Error("inconsistent decomposition: witness not reproduced");
  return d;
}

Witness singlet_witness() {
  const CVector s = singlet_ket();
  const CMatrix w = CMatrix::Identity(4, 4) / 2.0 - s * s.adjoint();
  return Witness{"singlet", w, pauli6_decomposition(w)};
}

VerifierReport witness_test(const SourceProcess& src, const Witness& w, const WitnessOptions& options) {
  const auto& dec = w.decomposition;
  if (decomposition_residual(w.op, dec) > kDecompositionTol) throw Error("inconsistent decomposition");
  if (src.run_dims() != Dims{2, 2}) throw Error("witness test needs two-qubit runs");

  VerifierReport rep;
  rep.protocol = "witness";
  rep.threshold = 0.0;
  rep.exact = options.exact;
  rep.notes.push_back("witness: " + w.name);

  const auto joint = product_povm(dec.povm_a, dec.povm_b);
  const auto nb = static_cast<int>(dec.povm_b.size());
  if (options.exact) {
    const CMatrix& rho = src.marginal().mat();
    double s = 0.0;
    for (size_t o = 0; o < joint.size(); ++o) {
      s += dec.coeffs(static_cast<int>(o) / nb, static_cast<int>(o) % nb) * (rho * joint[o]).trace().real();
    }
    rep.statistic = s;
    rep.se = 0.0;
    rep.shots = 0;
  } else {
    if (options.shots < 2) throw Error("witness test needs at least two shots");
    const RunSequence seq = src.sample_runs(static_cast<int>(options.shots), derive_seed(options.seed, 1));
    RunPlan plan;
    plan.povm = [&joint](int) -> const std::vector<CMatrix>& { return joint; };
    const auto outcomes = simulate_runs(seq, plan, derive_seed(options.seed, 2), options.exec);
    double sum = 0.0;
    double sum2 = 0.0;
    long long n = 0;
    for (int o : outcomes) {
      if (o == kSkipped) continue;
      const double x = dec.coeffs(o / nb, o % nb);
      sum += x;
      sum2 += x * x;
      ++n;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean) * static_cast<double>(n) / static_cast<double>(n - 1);
    rep.statistic = mean;
    rep.se = std::sqrt(var / static_cast<double>(n));
    rep.shots = n;
  }
  rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::below);
  return rep;
}

}  // namespace entver
