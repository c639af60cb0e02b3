#include "entver/protocols/chsh.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "entver/protocols/single_run.hpp"
#include "entver/random.hpp"
#include "entver/statproc.hpp"

namespace entver {

namespace {

constexpr double kSign[2][2] = {{1.0, 1.0}, {1.0, -1.0}};

void check_observable(const CMatrix& o) {
  if (o.rows() != 2 || o.cols() != 2 || !is_hermitian(o)) throw Error("non-+-1 observable: expected a Hermitian qubit operator");
  if ((o * o - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-9) throw Error("non-+-1 observable: O^2 != I");
}

CMatrix projector(const CMatrix& o, double sign) { return (CMatrix::Identity(2, 2) + sign * o) / 2.0; }

std::vector<CMatrix> side_povm(const CMatrix& o, double eta) {
  std::vector<CMatrix> out = {eta * projector(o, 1.0), eta * projector(o, -1.0)};
  if (eta < 1.0) out.push_back((1.0 - eta) * CMatrix::Identity(2, 2));
  return out;
}

}  // namespace

ChshSettings ChshSettings::optimal() {
  const CMatrix z = pauli::Z();
  const CMatrix x = pauli::X();
  return ChshSettings{z, x, -(z + x) / std::numbers::sqrt2, -(z - x) / std::numbers::sqrt2};
}

void ChshSettings::validate() const {
  for (const CMatrix* o : {&a1, &a2, &b1, &b2}) check_observable(*o);
}

CMatrix ChshSettings::bell_operator() const {
  return tensor(a1, b1) + tensor(a1, b2) + tensor(a2, b1) - tensor(a2, b2);
}

CriteriaAudit ChshOptions::audit() const {
  CriteriaAudit a;
  if (postselect) a.notes.push_back("postselection on clicks at each side is a local filter (fair sampling)");
  if (condition_on_herald) a.notes.push_back("conditioning on a herald is a local classical filter");
  return a;
}

VerifierReport chsh_test(const SourceProcess& src, const ChshOptions& options) {
  options.settings.validate();
  if (!(options.detection_eta > 0.0 && options.detection_eta <= 1.0)) throw Error("detection efficiency must lie in (0, 1]");
  if (src.run_dims() != Dims{2, 2}) throw Error("CHSH test needs two-qubit runs");
  const double eta = options.detection_eta;
  const std::array<CMatrix, 2> obs_a = {options.settings.a1, options.settings.a2};
  const std::array<CMatrix, 2> obs_b = {options.settings.b1, options.settings.b2};
  std::array<std::vector<CMatrix>, 4> povms;
  for (int s = 0; s < 4; ++s) povms[static_cast<size_t>(s)] = product_povm(side_povm(obs_a[static_cast<size_t>(s / 2)], eta), side_povm(obs_b[static_cast<size_t>(s % 2)], eta));
  const int per_side = eta < 1.0 ? 3 : 2;

  // Outcome index -> (a, b) with 0 meaning no click.
  auto value = [](int i) { return i == 0 ? 1 : (i == 1 ? -1 : 0); };

  VerifierReport rep;
  rep.protocol = "chsh";
  rep.threshold = 2.0;
  rep.exact = options.exact;
  rep.audit = options.audit();

  RunPlan plan;
  plan.herald = options.condition_on_herald ? 1 : -1;

  std::array<double, 4> corr{};
  std::array<double, 4> used{};
  if (options.exact) {
    const ExactRun er = exact_run_state(src, plan);
    for (int s = 0; s < 4; ++s) {
      double num = 0.0;
      double den = 0.0;
      const auto& pv = povms[static_cast<size_t>(s)];
      for (int o = 0; o < static_cast<int>(pv.size()); ++o) {
        int a = value(o / per_side);
        int b = value(o % per_side);
        const double p = (er.rho.mat() * pv[static_cast<size_t>(o)]).trace().real();
        if (a == 0 || b == 0) {
          if (options.postselect) continue;
          a = a == 0 ? 1 : a;
          b = b == 0 ? 1 : b;
        }
        num += p * a * b;
        den += p;
      }
      corr[static_cast<size_t>(s)] = num / den;
    }
    double s_val = 0.0;
    for (int s = 0; s < 4; ++s) s_val += kSign[s / 2][s % 2] * corr[static_cast<size_t>(s)];
    rep.statistic = s_val;
    rep.se = 0.0;
    rep.diagnostics["pass_probability"] = er.pass_probability;
  } else {
    if (options.shots < 4) throw Error("CHSH test needs at least four shots");
    const RunSequence seq = src.sample_runs(static_cast<int>(options.shots), derive_seed(options.seed, 1));
    const std::vector<int> setting = randomized_order(4, seq.n_runs, derive_seed(options.seed, 2));
    plan.povm = [&](int run) -> const std::vector<CMatrix>& { return povms[static_cast<size_t>(setting[static_cast<size_t>(run)])]; };
    const auto outcomes = simulate_runs(seq, plan, derive_seed(options.seed, 3), options.exec);
    std::array<double, 4> sum{};
    long long total = 0;
    for (int r = 0; r < seq.n_runs; ++r) {
      const int o = outcomes[static_cast<size_t>(r)];
      if (o == kSkipped) continue;
      int a = value(o / per_side);
      int b = value(o % per_side);
      if (a == 0 || b == 0) {
        if (options.postselect) continue;
        a = a == 0 ? 1 : a;
        b = b == 0 ? 1 : b;
      }
      const auto s = static_cast<size_t>(setting[static_cast<size_t>(r)]);
      sum[s] += a * b;
      used[s] += 1.0;
      ++total;
    }
    double s_val = 0.0;
    double var = 0.0;
    for (size_t s = 0; s < 4; ++s) {
      if (used[s] < 1.0) throw Error("a CHSH setting pair received no usable runs");
      corr[s] = sum[s] / used[s];
      s_val += kSign[s / 2][s % 2] * corr[s];
      var += std::max(1.0 - corr[s] * corr[s], 1.0 / used[s]) / used[s];
    }
    rep.statistic = s_val;
    rep.se = std::sqrt(var);
    rep.shots = total;
  }
  const char* names[4] = {"E_a1b1", "E_a1b2", "E_a2b1", "E_a2b2"};
  for (int s = 0; s < 4; ++s) rep.diagnostics[names[s]] = corr[static_cast<size_t>(s)];
  rep.verdict = decide(rep.statistic, rep.threshold, rep.se, Direction::above);
  return rep;
}

Witness bell_operator_witness(const ChshSettings& settings) {
  settings.validate();
  const std::array<CMatrix, 2> obs_a = {settings.a1, settings.a2};
  const std::array<CMatrix, 2> obs_b = {settings.b1, settings.b2};
  WitnessDecomposition d;
  for (int x = 0; x < 2; ++x) {
    for (double a : {1.0, -1.0}) {
      d.povm_a.push_back(projector(obs_a[static_cast<size_t>(x)], a) / 2.0);
      d.povm_b.push_back(projector(obs_b[static_cast<size_t>(x)], a) / 2.0);
    }
  }
  d.coeffs.resize(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double a = i % 2 == 0 ? 1.0 : -1.0;
      const double b = j % 2 == 0 ? 1.0 : -1.0;
      d.coeffs(i, j) = 2.0 - 4.0 * kSign[i / 2][j / 2] * a * b;
    }
  }
  const CMatrix w = 2.0 * CMatrix::Identity(4, 4) - settings.bell_operator();
  if (decomposition_residual(w, d) > kDecompositionTol) throw Error("inconsistent decomposition for the Bell witness");
  return Witness{"bell", w, d};
}

}  // namespace entver
