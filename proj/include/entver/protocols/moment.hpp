#pragma once

// Concurrence from the four moments m_k = Tr[(rho rho~)^k], estimated on
// groups of copies. Within a group, the k-th moment uses 2k runs and a +-1
// outcome whose mean is the chain Re Tr[rho_1 rho~_2 rho_3 rho~_4 ...] over
// the realized per-run states; for IID runs that chain is m_k. This stands in
// for a collective measurement on twenty copies.

#include <array>
#include <cstdint>
#include <string>

#include "entver/kernels.hpp"
#include "entver/protocols/report.hpp"
#include "entver/sources.hpp"

namespace entver {

enum class GroupingPolicy { fixed_consecutive, random };

struct MomentOptions {
  GroupingPolicy grouping = GroupingPolicy::random;
  int group_size = 20;
  bool deletion_check = true;
  bool exact = false;
  long long shots = 20000;
  std::uint64_t seed = 1;
  int bootstrap = 200;
  double deletion_fraction = 0.5;
  int deletion_trials = 20;
  Exec exec = Exec::parallel;

  CriteriaAudit audit() const;
};

inline constexpr int kMomentRuns = 20;          // 2 + 4 + 6 + 8 runs for k = 1..4
inline constexpr double kRootImagTol = 1e-6;
inline constexpr double kRootClusterTol = 1e-4;

struct MomentInversion {
  bool ok = false;
  std::array<double, 4> lambdas{};  // descending
  double concurrence = 0.0;
  double max_imag = 0.0;
  std::string failure;
};

/// Eigenvalues of rho rho~ from its power sums via Newton's identities and
/// the roots of the quartic characteristic polynomial.
MomentInversion invert_moments(const std::array<double, 4>& moments);

/// Tr[(rho rho~)^k] for k = 1..4.
std::array<double, 4> exact_moments(const CMatrix& rho);

VerifierReport moment_concurrence(const SourceProcess& src, const MomentOptions& options);

}  // namespace entver
