#pragma once

// Best average fidelity reachable without entanglement: measure the input,
// then prepare a state from the outcome. Found by a see-saw between the
// optimal resend states for a fixed POVM and a pattern search over rank-one
// POVMs for fixed resend states.

#include <cstdint>
#include <vector>

#include "entver/protocols/ensembles.hpp"

namespace entver {

struct ThresholdOptions {
  int restarts = 20;
  int max_iter = 200;
  int outcomes = 4;  // POVM elements per strategy
  std::uint64_t seed = 0x7e1e5eedULL;
  double tol = 1e-12;
};

struct ThresholdResult {
  double f_tilde = 0.0;
  double baseline = 0.0;  // best single fixed guess, no measurement
  int iterations = 0;     // see-saw iterations of the winning restart
  bool converged = false;
  std::vector<CMatrix> povm;
  std::vector<CVector> resend;
  std::vector<double> trace;  // fidelity after each iteration of the winning restart
};

/// Average fidelity of a measure-and-prepare strategy on the ensemble.
double measure_prepare_fidelity(const TestEnsemble& ensemble, const std::vector<CMatrix>& povm, const std::vector<CVector>& resend);

ThresholdResult classical_threshold(const TestEnsemble& ensemble, const ThresholdOptions& options = {});

/// Memoized classical_threshold with default options, keyed by ensemble name. Thread-safe.
const ThresholdResult& cached_threshold(const TestEnsemble& ensemble);

}  // namespace entver
