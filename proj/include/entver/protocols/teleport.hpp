#pragma once

#include <cstdint>
#include <optional>

#include "entver/measures.hpp"
#include "entver/protocols/ensembles.hpp"
#include "entver/protocols/threshold.hpp"
#include "entver/protocols/witness.hpp"

namespace entver {

/// Bell basis on (input, A): |B_k> = (sigma_k x I)|psi->, k = I, X, Y, Z.
/// Outcome k is corrected by sigma_k on B.
CVector bell_basis_ket(int k);

/// Teleported output on B for input |psi> and resource rho_AB.
CMatrix teleport_output(const CMatrix& rho_ab, const CVector& psi);

/// Effect on the resource whose expectation is the probability that the
/// corrected output passes a projective test onto |psi>.
CMatrix teleport_success_effect(const CVector& psi);

/// Ensemble-averaged effect; Tr(rho Omega) is the average teleportation fidelity.
CMatrix teleport_fidelity_operator(const TestEnsemble& ensemble);

double teleport_fidelity(const CMatrix& rho_ab, const TestEnsemble& ensemble);

struct TeleportOptions {
  bool exact = false;
  long long shots = 10000;
  std::uint64_t seed = 1;
  /// A fixed threshold instead of the optimized one for this ensemble.
  std::optional<double> assumed_threshold;
  /// Local filter on the resource before use; failing runs are not used.
  std::optional<FilterPair> filter;
  Exec exec = Exec::parallel;

  CriteriaAudit audit() const;
};

VerifierReport teleport_test(const SourceProcess& src, const TestEnsemble& ensemble, const TeleportOptions& options);

/// f_tilde I - Omega: Tr(rho W) = f_tilde - F_avg(rho).
Witness teleportation_witness(const TestEnsemble& ensemble, double f_tilde);

}  // namespace entver
