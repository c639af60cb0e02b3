#pragma once

// Entanglement quantifiers and the local-filtering monotonicity check.

#include <array>
#include <optional>

#include "entver/qmat.hpp"

namespace entver {

struct ConcurrenceBreakdown {
  std::array<double, 4> lambdas{};  // eigenvalues of rho * spin_flip(rho), nonincreasing
  double concurrence = 0.0;
};

/// Local filter operators, one per side. Each must be a contraction.
struct FilterPair {
  CMatrix fA;
  CMatrix fB;

  static FilterPair identity(int dA, int dB);
  void validate() const;
};

struct FilterOutcome {
  double p_pass = 0.0;
  DensityMatrix rho_pass;
  double p_fail = 0.0;
  std::optional<DensityMatrix> rho_fail;  // absent when p_fail is negligible
};

enum class Measure { concurrence, negativity };

/// (sigma_y x sigma_y) conj(rho) (sigma_y x sigma_y) for two qubits.
CMatrix spin_flip(const DensityMatrix& rho);
CMatrix spin_flip(const CMatrix& rho);

ConcurrenceBreakdown concurrence(const DensityMatrix& rho);

/// (||rho^{T_B}||_1 - 1) / 2 for a bipartite state.
double negativity(const DensityMatrix& rho);
double negativity(const CMatrix& rho, const Dims& dims);

double entanglement(const DensityMatrix& rho, Measure m);

/// Pass branch (fA x fB) rho (fA x fB)^dagger and the merged complement of the
/// three failing Kraus branches built from sqrt(I - f^dagger f) on each side.
FilterOutcome apply_filter(const DensityMatrix& rho, const FilterPair& f);

/// E(rho) >= p_pass E(rho_pass) + p_fail E(rho_fail), within kMonotonicityTol.
bool monotonicity_check(const DensityMatrix& rho, const FilterPair& f, Measure m);

inline constexpr double kMonotonicityTol = 1e-7;

/// Werner state alpha |psi-><psi-| + (1 - alpha) I/4.
DensityMatrix werner_state(double alpha);

}  // namespace entver
