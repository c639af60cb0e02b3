#include "entver/protocols/tomography.hpp"

#include <cmath>
#include <limits>

#include "entver/measures.hpp"
#include "entver/protocols/single_run.hpp"
#include "entver/random.hpp"
#include "entver/statproc.hpp"

namespace entver {

namespace {

constexpr int kBasis[3] = {1, 2, 3};  // X, Y, Z

CMatrix basis_projector(int basis, int sign_index) {
  const double s = sign_index == 0 ? 1.0 : -1.0;
  return (pauli::I() + s * pauli::by_index(kBasis[basis])) / 2.0;
}

double outcome_sign(int k) { return k == 0 ? 1.0 : -1.0; }

/// Correlators T_ab with T_00 = 1, marginals pooled over the other side's settings.
Eigen::Matrix4d correlators(const PauliCounts& c) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  t(0, 0) = 1.0;
  std::array<double, 3> a_sum{}, a_n{}, b_sum{}, b_n{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto& n = c[static_cast<size_t>(3 * i + j)];
      const double tot = n[0] + n[1] + n[2] + n[3];
      if (tot <= 0.0) continue;
      t(i + 1, j + 1) = (n[0] - n[1] - n[2] + n[3]) / tot;
      a_sum[static_cast<size_t>(i)] += n[0] + n[1] - n[2] - n[3];
      a_n[static_cast<size_t>(i)] += tot;
      b_sum[static_cast<size_t>(j)] += n[0] - n[1] + n[2] - n[3];
      b_n[static_cast<size_t>(j)] += tot;
    }
  }
  for (size_t k = 0; k < 3; ++k) {
    if (a_n[k] > 0.0) t(static_cast<int>(k) + 1, 0) = a_sum[k] / a_n[k];
    if (b_n[k] > 0.0) t(0, static_cast<int>(k) + 1) = b_sum[k] / b_n[k];
  }
  return t;
}

PauliCounts multinomial_resample(const PauliCounts& c, Rng& rng) {
  PauliCounts out{};
  for (size_t s = 0; s < 9; ++s) {
    const auto& n = c[s];
    const double tot = n[0] + n[1] + n[2] + n[3];
    auto remaining = static_cast<long long>(std::llround(tot));
    double mass = 1.0;
    for (size_t k = 0; k < 3; ++k) {
      const double p = tot > 0.0 ? n[k] / tot : 0.0;
      const double q = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<long long> bin(remaining, q);
      const long long draw = remaining > 0 ? bin(rng) : 0;
      out[s][k] = static_cast<double>(draw);
      remaining -= draw;
      mass -= p;
    }
    out[s][3] = static_cast<double>(remaining);
  }
  return out;
}

double concurrence_of_estimate(const PauliCounts& c) {
  return concurrence(project_to_physical(linear_inversion(c), {2, 2})).concurrence;
}

}  // namespace

CriteriaAudit TomographyOptions::audit() const {
  CriteriaAudit a;
  if (phase_policy == PhasePolicy::shared_path) a.violate(4, "analyzer reuses the generation path and co-rotates with the source phase");
  if (subspace == SubspaceSelection::one_excitation) {
    a.violate(5, "postselection on one excitation in total is a nonlocal filter");
    a.violate(1, "assumes a single excitation was generated, excluding |00> and |11> by fiat");
  }
  if (subspace == SubspaceSelection::local) a.notes.push_back("qubit subspace selected by a local filter on each side");
  return a;
}

CMatrix linear_inversion(const PauliCounts& counts) {
  const Eigen::Matrix4d t = correlators(counts);
  CMatrix rho = CMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (t(a, b) != 0.0) rho += t(a, b) * tensor(pauli::by_index(a), pauli::by_index(b));
    }
  }
  rho /= 4.0;
  return 0.5 * (rho + rho.adjoint());
}

PauliCounts pauli_probabilities(const CMatrix& rho) {
  PauliCounts p{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 4; ++k) {
        const CMatrix e = tensor(basis_projector(i, k / 2), basis_projector(j, k % 2));
        p[static_cast<size_t>(3 * i + j)][static_cast<size_t>(k)] = std::max(0.0, (rho * e).trace().real());
      }
    }
  }
  return p;
}

TomographyResult tomography_test(const SourceProcess& src, const TomographyOptions& options) {
  const int dA = src.run_dims()[0];
  const int dB = src.run_dims()[1];
  const bool qubits = dA == 2 && dB == 2;
  if (!qubits && options.subspace == SubspaceSelection::none) throw Error("tomography on more than two levels needs a subspace selection");
  if (!options.exact && options.shots_per_setting < 100) throw Error("insufficient shots: at least 100 per setting");
  if (dA < 2 || dB < 2) throw Error("tomography needs at least two levels per side");

  RunPlan plan;
  plan.co_rotate = options.phase_policy == PhasePolicy::shared_path;
  if (options.subspace == SubspaceSelection::local && !qubits) plan.filter = local_qubit_filter(dA, dB);
  if (options.subspace == SubspaceSelection::one_excitation) plan.filter = one_excitation_filter(dA, dB);

  VerifierReport rep;
  rep.protocol = "tomography";
  rep.threshold = 0.0;
  rep.exact = options.exact;
  rep.audit = options.audit();

  if (options.exact) {
    const ExactRun er = exact_run_state(src, plan);
    DensityMatrix rho = compress_to_qubits(er.rho);
    rep.statistic = concurrence(rho).concurrence;
    rep.se = 0.0;
    rep.diagnostics["pass_fraction"] = er.pass_probability;
    rep.diagnostics["entanglement_lower_bound"] = er.pass_probability * rep.statistic;
    rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
    return TomographyResult{rho, rep};
  }

  const int n_runs = static_cast<int>(9 * options.shots_per_setting);
  const RunSequence seq = src.sample_runs(n_runs, derive_seed(options.seed, 1));
  const std::vector<int> setting = randomized_order(9, n_runs, derive_seed(options.seed, 2));
  std::vector<std::vector<CMatrix>> povms;
  for (int s = 0; s < 9; ++s) {
    const int i = s / 3;
    const int j = s % 3;
    povms.push_back(product_povm(side_effects({basis_projector(i, 0), basis_projector(i, 1)}, dA),
                                 side_effects({basis_projector(j, 0), basis_projector(j, 1)}, dB)));
  }
  const int per_b = dB > 2 ? 3 : 2;
  plan.povm = [&](int run) -> const std::vector<CMatrix>& { return povms[static_cast<size_t>(setting[static_cast<size_t>(run)])]; };
  const auto outcomes = simulate_runs(seq, plan, derive_seed(options.seed, 3), options.exec);

  // Outcome per run as (a, b) in {0 (+), 1 (-)}; -1 for skipped or null.
  std::vector<int> ka(static_cast<size_t>(n_runs), -1), kb(static_cast<size_t>(n_runs), -1);
  PauliCounts counts{}, half0{};
  long long used = 0;
  for (int r = 0; r < n_runs; ++r) {
    const int o = outcomes[static_cast<size_t>(r)];
    if (o == kSkipped) continue;
    const int a = o / per_b;
    const int b = o % per_b;
    if (a > 1 || b > 1) continue;  // null outcome outside the qubit levels
    ka[static_cast<size_t>(r)] = a;
    kb[static_cast<size_t>(r)] = b;
    const auto s = static_cast<size_t>(setting[static_cast<size_t>(r)]);
    counts[s][static_cast<size_t>(2 * a + b)] += 1.0;
    if (r < n_runs / 2) half0[s][static_cast<size_t>(2 * a + b)] += 1.0;
    ++used;
  }
  for (const auto& c : counts) {
    if (c[0] + c[1] + c[2] + c[3] < 1.0) throw Error("a tomography setting received no usable runs");
  }
  const DensityMatrix rho_hat = project_to_physical(linear_inversion(counts), {2, 2});
  rep.statistic = concurrence(rho_hat).concurrence;
  rep.shots = used;

  // Parametric bootstrap of the concurrence.
  const int n_boot = std::max(options.bootstrap, 2);
  std::vector<double> boot(static_cast<size_t>(n_boot));
  const std::uint64_t boot_seed = derive_seed(options.seed, 4);
  for_each_index(n_boot, options.exec, [&](std::int64_t b) {
    Rng rng = substream(boot_seed, static_cast<std::uint64_t>(b));
    boot[static_cast<size_t>(b)] = concurrence_of_estimate(multinomial_resample(counts, rng));
  });
  double mean = 0.0;
  for (double v : boot) mean += v;
  mean /= n_boot;
  double var = 0.0;
  for (double v : boot) var += (v - mean) * (v - mean);
  rep.se = std::sqrt(var / (n_boot - 1));
  rep.diagnostics["bootstrap_se"] = rep.se;

  // Held-out PPT witness: direction from the first half, value from the second.
  bool witness_pass = false;
  {
    const DensityMatrix rho0 = project_to_physical(linear_inversion(half0), {2, 2});
    const int t[1] = {1};
    const EigenSystem es = eigh(partial_transpose(rho0.mat(), {2, 2}, t));
    const double min_eig = es.values(3);
    rep.diagnostics["witness_min_eig"] = min_eig;
    if (min_eig < 0.0) {
      const CVector e = es.vectors.col(3);
      const CMatrix w = partial_transpose(CMatrix(e * e.adjoint()), {2, 2}, t);
      Eigen::Matrix4d wc;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) wc(a, b) = (w * tensor(pauli::by_index(a), pauli::by_index(b))).trace().real() / 4.0;
      }
      double sum = 0.0, sum2 = 0.0;
      long long n = 0;
      for (int r = n_runs / 2; r < n_runs; ++r) {
        if (ka[static_cast<size_t>(r)] < 0) continue;
        const int s = setting[static_cast<size_t>(r)];
        const int i = s / 3 + 1;
        const int j = s % 3 + 1;
        const double a = outcome_sign(ka[static_cast<size_t>(r)]);
        const double b = outcome_sign(kb[static_cast<size_t>(r)]);
        const double x = wc(0, 0) + 3.0 * a * wc(i, 0) + 3.0 * b * wc(0, j) + 9.0 * a * b * wc(i, j);
        sum += x;
        sum2 += x * x;
        ++n;
      }
      if (n > 1) {
        const double m = sum / static_cast<double>(n);
        const double v = std::max(0.0, sum2 / static_cast<double>(n) - m * m) * static_cast<double>(n) / static_cast<double>(n - 1);
        const double se = std::sqrt(v / static_cast<double>(n));
        rep.diagnostics["witness_mean"] = m;
        rep.diagnostics["witness_se"] = se;
        witness_pass = m < -kSigmaRule * se;
      }
    }
  }
  rep.diagnostics["witness_pass"] = witness_pass ? 1.0 : 0.0;
  const double pass_fraction = static_cast<double>(used) / static_cast<double>(n_runs);
  rep.diagnostics["pass_fraction"] = pass_fraction;
  rep.diagnostics["entanglement_lower_bound"] = pass_fraction * rep.statistic;

  rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
  if (rep.verdict == Verdict::entangled && !witness_pass) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("held-out PPT witness did not confirm the estimate");
  }
  return TomographyResult{rho_hat, rep};
}

}  // namespace entver
