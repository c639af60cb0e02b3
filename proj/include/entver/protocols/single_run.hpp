#pragma once

// Shared machinery for protocols that measure each run on its own: optional
// herald conditioning, a pass/fail filter on the run, and one joint POVM on
// the run's (A, B) slots. Blocks are simulated independently, each from its
// own random substream.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "entver/kernels.hpp"
#include "entver/sources.hpp"

namespace entver {

struct RunPlan {
  /// Joint POVM on (A_r, B_r) for run r.
  std::function<const std::vector<CMatrix>&(int run)> povm;
  /// Required herald label; runs with another label are skipped. -1 disables.
  int herald = -1;
  /// Pass Kraus operator on (A_r, B_r); runs that fail are skipped.
  std::optional<CMatrix> filter;
  /// Rotate A's analyzer with the run's leaked phase (shared optical path).
  bool co_rotate = false;
};

inline constexpr int kSkipped = -1;

/// Outcome index per run, kSkipped for runs removed by herald or filter.
std::vector<int> simulate_runs(const RunSequence& seq, const RunPlan& plan, std::uint64_t seed, Exec exec);

/// Analyzer rotation on A that undoes the phase e^{i phi} on A's |1>.
CMatrix co_rotation(double phi);

/// Exact per-run state seen by a plan (herald conditioning, co-rotation, filter).
struct ExactRun {
  DensityMatrix rho;
  double pass_probability = 1.0;
};
ExactRun exact_run_state(const SourceProcess& src, const RunPlan& plan);

/// Product POVM of per-side element lists, A index most significant.
std::vector<CMatrix> product_povm(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b);

/// Embeds a qubit effect into levels {0, 1} of a d-level system.
CMatrix embed_qubit_effect(const CMatrix& e, int d);

/// Qubit-basis projectors for a d-level side plus, if d > 2, the null effect on the remaining levels.
std::vector<CMatrix> side_effects(const std::vector<CMatrix>& qubit_effects, int d);

/// Local projector onto levels {0, 1} on both sides (one photon or none per mode).
CMatrix local_qubit_filter(int dA, int dB);
/// Nonlocal projector onto exactly one excitation in total, span{|01>, |10>}.
CMatrix one_excitation_filter(int dA, int dB);

/// Restricts a state supported on levels {0,1} x {0,1} to a two-qubit state.
DensityMatrix compress_to_qubits(const DensityMatrix& rho);

}  // namespace entver
