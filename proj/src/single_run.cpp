#include "entver/protocols/single_run.hpp"

#include "entver/sequence_state.hpp"

namespace entver {

CMatrix co_rotation(double phi) {
  CMatrix u = CMatrix::Identity(2, 2);
  u(1, 1) = std::polar(1.0, -phi);
  return u;
}

std::vector<int> simulate_runs(const RunSequence& seq, const RunPlan& plan, std::uint64_t seed, Exec exec) {
  std::vector<int> out(static_cast<size_t>(seq.n_runs), kSkipped);
  const int dB = seq.run_dims[1];
  for_each_index(static_cast<std::int64_t>(seq.blocks.size()), exec, [&](std::int64_t b) {
    const auto& blk = seq.blocks[static_cast<size_t>(b)];
    SequenceState st = SequenceState::block(seq, static_cast<int>(b));
    Rng rng = substream(seed, static_cast<std::uint64_t>(b));
    for (int k = 0; k < blk.length; ++k) {
      const int run = blk.first_run + k;
      const std::vector<int> slots = {slot_id(run, kSideA), slot_id(run, kSideB)};
      if (plan.herald >= 0 && (blk.herald.empty() || blk.herald[static_cast<size_t>(k)] != plan.herald)) {
        st.discard(slots);
        continue;
      }
      if (plan.filter && !st.filter(slots, *plan.filter, rng)) continue;
      const auto& povm = plan.povm(run);
      if (plan.co_rotate && seq.phase_leaked && !blk.phase.empty()) {
        const CMatrix u = tensor(co_rotation(blk.phase[static_cast<size_t>(k)]), CMatrix::Identity(dB, dB));
        std::vector<CMatrix> rotated;
        rotated.reserve(povm.size());
        for (const auto& e : povm) rotated.push_back(u.adjoint() * e * u);
        out[static_cast<size_t>(run)] = st.measure(slots, rotated, rng);
      } else {
        out[static_cast<size_t>(run)] = st.measure(slots, povm, rng);
      }
    }
  });
  return out;
}

ExactRun exact_run_state(const SourceProcess& src, const RunPlan& plan) {
  DensityMatrix rho = plan.co_rotate ? src.co_rotating_marginal() : src.marginal();
  double p = 1.0;
  if (plan.herald >= 0) {
    p = src.herald_probability(plan.herald);
    rho = src.conditional_marginal(plan.herald);
  }
  if (plan.filter) {
    const CMatrix m = (*plan.filter) * rho.mat() * plan.filter->adjoint();
    const double pf = m.trace().real();
    if (pf < 1e-12) throw Error("filter annihilates state");
    p *= pf;
    rho = DensityMatrix::normalized(rho.dims(), m);
  }
  return ExactRun{rho, p};
}

std::vector<CMatrix> product_povm(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  std::vector<CMatrix> out;
  out.reserve(a.size() * b.size());
  for (const auto& ea : a) {
    for (const auto& eb : b) out.push_back(tensor(ea, eb));
  }
  return out;
}

CMatrix embed_qubit_effect(const CMatrix& e, int d) {
  if (d < 2) throw Error("side dimension below 2");
  CMatrix out = CMatrix::Zero(d, d);
  out.topLeftCorner(2, 2) = e;
  return out;
}

std::vector<CMatrix> side_effects(const std::vector<CMatrix>& qubit_effects, int d) {
  std::vector<CMatrix> out;
  for (const auto& e : qubit_effects) out.push_back(embed_qubit_effect(e, d));
  if (d > 2) {
    CMatrix null = CMatrix::Identity(d, d);
    null.topLeftCorner(2, 2).setZero();
    out.push_back(null);
  }
  return out;
}

CMatrix local_qubit_filter(int dA, int dB) {
  return tensor(embed_qubit_effect(CMatrix::Identity(2, 2), dA), embed_qubit_effect(CMatrix::Identity(2, 2), dB));
}

CMatrix one_excitation_filter(int dA, int dB) {
  CMatrix p = CMatrix::Zero(dA * dB, dA * dB);
  p(0 * dB + 1, 0 * dB + 1) = 1.0;
  p(1 * dB + 0, 1 * dB + 0) = 1.0;
  return p;
}

DensityMatrix compress_to_qubits(const DensityMatrix& rho) {
  if (rho.subsystems() != 2) throw Error("expected a bipartite state");
  const int dB = rho.dims()[1];
  if (rho.dims() == Dims{2, 2}) return rho;
  const int idx[4] = {0, 1, dB, dB + 1};
  const CMatrix m = compress(rho.mat(), idx);
  const double kept = m.trace().real();
  if (std::abs(kept - 1.0) > 1e-9) throw Error("state has weight outside the qubit subspace");
  return DensityMatrix::normalized({2, 2}, m);
}

}  // namespace entver
