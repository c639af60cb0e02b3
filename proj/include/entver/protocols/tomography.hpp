#pragma once

#include <array>
#include <cstdint>

#include "entver/protocols/report.hpp"
#include "entver/kernels.hpp"
#include "entver/sources.hpp"

namespace entver {

enum class PhasePolicy { independent, shared_path };

/// How runs of a source with more than two levels per side are reduced to qubits.
enum class SubspaceSelection {
  none,           // two-qubit sources only
  local,          // keep runs with levels {0,1} on each side (local filter)
  one_excitation  // keep runs with exactly one excitation in total (nonlocal)
};

struct TomographyOptions {
  bool exact = false;
  long long shots_per_setting = 1000;
  PhasePolicy phase_policy = PhasePolicy::independent;
  SubspaceSelection subspace = SubspaceSelection::none;
  int bootstrap = 200;
  std::uint64_t seed = 1;
  Exec exec = Exec::parallel;

  CriteriaAudit audit() const;
};

/// Counts per setting pair (A basis i, B basis j), setting index 3 i + j with
/// bases X, Y, Z; outcome order (+,+), (+,-), (-,+), (-,-).
using PauliCounts = std::array<std::array<double, 4>, 9>;

/// Linear inversion; the result is Hermitian with unit trace but may be non-PSD.
CMatrix linear_inversion(const PauliCounts& counts);

/// Exact outcome probabilities of the nine setting pairs for a two-qubit state.
PauliCounts pauli_probabilities(const CMatrix& rho);

struct TomographyResult {
  DensityMatrix rho_hat;
  VerifierReport report;
};

/// Nine Pauli setting pairs in random order, linear inversion, projection to
/// a physical state and concurrence with a parametric-bootstrap error. A
/// sampled verdict also needs a held-out PPT witness: built on the first half
/// of the runs and evaluated on the second half.
TomographyResult tomography_test(const SourceProcess& src, const TomographyOptions& options);

}  // namespace entver
