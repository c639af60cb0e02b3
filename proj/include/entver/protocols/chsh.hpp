#pragma once

#include <cstdint>

#include "entver/protocols/witness.hpp"

namespace entver {

/// Two +-1-valued qubit observables per side.
struct ChshSettings {
  CMatrix a1, a2, b1, b2;

  /// A1 = Z, A2 = X, B1 = -(Z + X)/sqrt2, B2 = -(Z - X)/sqrt2: Tsirelson value on |psi->.
  static ChshSettings optimal();
  void validate() const;
  /// A1B1 + A1B2 + A2B1 - A2B2.
  CMatrix bell_operator() const;
};

struct ChshOptions {
  ChshSettings settings = ChshSettings::optimal();
  bool exact = false;
  long long shots = 10000;
  double detection_eta = 1.0;    // per-side click probability
  bool postselect = false;       // drop runs where either side did not click
  bool condition_on_herald = false;
  std::uint64_t seed = 1;
  Exec exec = Exec::parallel;

  CriteriaAudit audit() const;
};

/// Statistic S with a random setting pair per run, threshold 2.
VerifierReport chsh_test(const SourceProcess& src, const ChshOptions& options);

/// 2 I - B, decomposed over the POVMs {Pi(x, a)/2} on each side with
/// coefficients 2 - 4 s_xy a b.
Witness bell_operator_witness(const ChshSettings& settings);

}  // namespace entver
