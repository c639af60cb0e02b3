#pragma once

#include <cstdint>

#include "entver/kernels.hpp"
#include "entver/protocols/report.hpp"
#include "entver/sources.hpp"

namespace entver {

/// W = sum_ij coeffs(i, j) A[i] x B[j] for local POVMs A and B.
struct WitnessDecomposition {
  std::vector<CMatrix> povm_a;
  std::vector<CMatrix> povm_b;
  Eigen::MatrixXd coeffs;

  CMatrix reconstruct() const;
};

struct Witness {
  std::string name;
  CMatrix op;
  WitnessDecomposition decomposition;
};

inline constexpr double kDecompositionTol = 1e-9;

/// Local POVM of the six Pauli eigenprojectors, each weighted 1/3:
/// (I + Z)/6, (I - Z)/6, (I + X)/6, (I - X)/6, (I + Y)/6, (I - Y)/6.
std::vector<CMatrix> pauli6_povm();

/// Minimum-norm real coefficients over the Pauli-6 POVM on both sides.
/// Throws when the reconstruction misses `w` by more than kDecompositionTol.
WitnessDecomposition pauli6_decomposition(const CMatrix& w);

/// Largest entrywise deviation between `w` and the decomposition.
double decomposition_residual(const CMatrix& w, const WitnessDecomposition& d);

/// I/2 - |psi-><psi-|; negative exactly on Werner states with alpha > 1/3.
Witness singlet_witness();

struct WitnessOptions {
  bool exact = false;
  long long shots = 10000;
  std::uint64_t seed = 1;
  Exec exec = Exec::parallel;
};

/// Statistic sum_ij c_ij p_ij, threshold 0, entangled iff below -3 se.
VerifierReport witness_test(const SourceProcess& src, const Witness& w, const WitnessOptions& options);

}  // namespace entver
