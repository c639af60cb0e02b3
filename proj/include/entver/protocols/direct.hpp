#pragma once

#include <cstdint>

#include "entver/kernels.hpp"
#include "entver/protocols/report.hpp"
#include "entver/sources.hpp"

namespace entver {

enum class Pairing { fixed_consecutive, random };
enum class PairSides { a_only, both_with_correlations };

struct DirectOptions {
  Pairing pairing = Pairing::fixed_consecutive;
  PairSides sides = PairSides::a_only;
  /// Compliant pipeline: part of the runs paired consecutively and part at
  /// random, both sides measured, deletion stability and a tomography
  /// cross-check on a separate stretch of runs. `pairing` and `sides` are
  /// then ignored.
  bool compliant = false;
  bool exact = false;
  long long shots = 10000;
  std::uint64_t seed = 1;
  double deletion_fraction = 0.2;
  int deletion_trials = 20;
  int tomography_bootstrap = 200;
  Exec exec = Exec::parallel;

  CriteriaAudit audit() const;
};

/// Probabilities for one pair of runs, state ordered (A1, B1, A2, B2).
struct PairProbabilities {
  double anti_a = 0.0;     // A1 A2 found in the antisymmetric subspace
  double anti_b = 0.0;     // B1 B2 found in the antisymmetric subspace
  double anti_both = 0.0;  // both at once
};
PairProbabilities pair_probabilities(const CMatrix& pair_state);

/// Exact pair state for a pairing policy, averaged over pair positions. Random
/// pairing is taken in the long-sequence limit (partners from different blocks).
CMatrix exact_pair_state(const SourceProcess& src, Pairing pairing);

/// Concurrence from the antisymmetric-subspace probability of two copies,
/// C = 2 sqrt(P_a). Exact only for two identical pure copies.
VerifierReport direct_concurrence_2copy(const SourceProcess& src, const DirectOptions& options);

}  // namespace entver
