#include "entver/protocols/teleport.hpp"

#include <cmath>

#include "entver/protocols/single_run.hpp"
#include "entver/random.hpp"
#include "entver/statproc.hpp"

namespace entver {

CVector bell_basis_ket(int k) { return tensor(pauli::by_index(k), CMatrix(pauli::I())) * singlet_ket(); }

CMatrix teleport_output(const CMatrix& rho_ab, const CVector& psi) {
  if (rho_ab.rows() != 4) throw Error("teleportation needs a two-qubit resource");
  const CMatrix joint = tensor(CMatrix(psi * psi.adjoint()), rho_ab);  // input, A, B
  CMatrix out = CMatrix::Zero(2, 2);
  const Dims dims = {2, 2, 2};
  const int keep_b[1] = {2};
  for (int k = 0; k < 4; ++k) {
    const CVector bk = bell_basis_ket(k);
    const CMatrix proj = tensor(CMatrix(bk * bk.adjoint()), CMatrix(pauli::I()));
    const CMatrix branch = partial_trace(CMatrix(proj * joint * proj), dims, keep_b);
    const CMatrix s = pauli::by_index(k);
    out += s * branch * s.adjoint();
  }
  return out;
}

CMatrix teleport_success_effect(const CVector& psi) {
  const CMatrix in = psi * psi.adjoint();
  CMatrix m = CMatrix::Zero(8, 8);
  for (int k = 0; k < 4; ++k) {
    const CVector bk = bell_basis_ket(k);
    const CMatrix s = pauli::by_index(k);
    m += tensor(CMatrix(bk * bk.adjoint()), CMatrix(s.adjoint() * in * s));
  }
  // Tr[(in x rho) M] = Tr_AB[rho Tr_in[(in x I) M]].
  const CMatrix lhs = tensor(in, CMatrix::Identity(4, 4)) * m;
  const int keep_ab[2] = {1, 2};
  CMatrix e = partial_trace(lhs, {2, 2, 2}, keep_ab);
  return 0.5 * (e + e.adjoint());
}

CMatrix teleport_fidelity_operator(const TestEnsemble& ensemble) {
  ensemble.validate();
  CMatrix omega = CMatrix::Zero(4, 4);
  for (int i = 0; i < ensemble.size(); ++i) {
    omega += ensemble.probs[static_cast<size_t>(i)] * teleport_success_effect(ensemble.states[static_cast<size_t>(i)]);
  }
  return omega;
}

double teleport_fidelity(const CMatrix& rho_ab, const TestEnsemble& ensemble) {
  return (rho_ab * teleport_fidelity_operator(ensemble)).trace().real();
}

CriteriaAudit TeleportOptions::audit() const {
  CriteriaAudit a;
  if (assumed_threshold) a.violate(2, "threshold assumed from a symmetric ensemble instead of optimized for the ensemble used");
  if (filter) a.notes.push_back("conditional teleportation through a local filter");
  return a;
}

VerifierReport teleport_test(const SourceProcess& src, const TestEnsemble& ensemble, const TeleportOptions& options) {
  ensemble.validate();
  if (src.run_dims() != Dims{2, 2}) throw Error("teleportation needs two-qubit resource runs");

  VerifierReport rep;
  rep.protocol = "teleport";
  rep.exact = options.exact;
  rep.audit = options.audit();
  const ThresholdResult& thr = cached_threshold(ensemble);
  rep.diagnostics["optimized_threshold"] = thr.f_tilde;
  rep.threshold = options.assumed_threshold.value_or(thr.f_tilde);
  rep.notes.push_back("ensemble: " + ensemble.name);

  RunPlan plan;
  if (options.filter) {
    options.filter->validate();
    plan.filter = tensor(options.filter->fA, options.filter->fB);
  }

  if (options.exact) {
    const ExactRun er = exact_run_state(src, plan);
    rep.statistic = teleport_fidelity(er.rho.mat(), ensemble);
    rep.se = 0.0;
    rep.diagnostics["pass_probability"] = er.pass_probability;
  } else {
    if (options.shots < ensemble.size()) throw Error("fewer shots than ensemble states");
    const RunSequence seq = src.sample_runs(static_cast<int>(options.shots), derive_seed(options.seed, 1));
    const auto quotas = proportional_quotas(ensemble.probs, seq.n_runs);
    const std::vector<int> input = randomized_order(quotas, derive_seed(options.seed, 2));
    std::vector<std::vector<CMatrix>> povms;
    for (const auto& psi : ensemble.states) {
      const CMatrix e = teleport_success_effect(psi);
      povms.push_back({e, CMatrix::Identity(4, 4) - e});
    }
    plan.povm = [&](int run) -> const std::vector<CMatrix>& { return povms[static_cast<size_t>(input[static_cast<size_t>(run)])]; };
    const auto outcomes = simulate_runs(seq, plan, derive_seed(options.seed, 3), options.exec);
    // Weight each input by p_i over its own usable runs so that filtering cannot skew the mix.
    std::vector<double> hits(static_cast<size_t>(ensemble.size()), 0.0);
    std::vector<double> used(static_cast<size_t>(ensemble.size()), 0.0);
    long long total = 0;
    for (int r = 0; r < seq.n_runs; ++r) {
      const int o = outcomes[static_cast<size_t>(r)];
      if (o == kSkipped) continue;
      const auto i = static_cast<size_t>(input[static_cast<size_t>(r)]);
      used[i] += 1.0;
      hits[i] += o == 0 ? 1.0 : 0.0;
      ++total;
    }
    double f = 0.0;
    double var = 0.0;
    for (size_t i = 0; i < used.size(); ++i) {
      if (used[i] < 1.0) throw Error("an ensemble state received no usable runs");
      const double fi = hits[i] / used[i];
      const double p = ensemble.probs[i];
      f += p * fi;
      var += p * p * std::max(fi * (1.0 - fi), 1.0 / used[i]) / used[i];
    }
    rep.statistic = f;
    rep.se = std::sqrt(var);
    rep.shots = total;
    rep.diagnostics["pass_fraction"] = static_cast<double>(total) / static_cast<double>(seq.n_runs);
  }
  rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
  return rep;
}

Witness teleportation_witness(const TestEnsemble& ensemble, double f_tilde) {
  const CMatrix w = f_tilde * CMatrix::Identity(4, 4) - teleport_fidelity_operator(ensemble);
  return Witness{"teleportation:" + ensemble.name, w, pauli6_decomposition(w)};
}

}  // namespace entver
