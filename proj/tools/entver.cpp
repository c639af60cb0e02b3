// entver: run scenario suites and print classical teleportation thresholds.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "entver/harness.hpp"
#include "entver/protocols/ensembles.hpp"
#include "entver/protocols/threshold.hpp"

namespace {

void print_threshold(const entver::TestEnsemble& ens, const entver::ThresholdOptions& opt, bool verbose) {
  const entver::ThresholdResult r = entver::classical_threshold(ens, opt);
  std::printf("%-24s f_tilde=%.10f baseline=%.10f iterations=%d converged=%s\n", ens.name.c_str(), r.f_tilde, r.baseline, r.iterations,
              r.converged ? "yes" : "no");
  if (!verbose) return;
  for (std::size_t k = 0; k < r.povm.size(); ++k) {
    const auto& e = r.povm[k];
    const auto& v = r.resend[k];
    std::printf("  outcome %zu: weight=%.6f resend=(%.6f%+.6fi, %.6f%+.6fi)\n", k, e.trace().real(), v(0).real(), v(0).imag(), v(1).real(),
                v(1).imag());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement verification toolkit: scenario runner and threshold optimizer"};
  app.require_subcommand(1);

  entver::harness::RunOptions run_opts;
  std::string config;
  std::uint64_t seed = 0;
  std::string format;
  auto* run = app.add_subcommand("run", "Run a scenario suite and write report.jsonl / report.csv");
  run->add_option("--config", config, "Suite JSON (default: bundled suite)");
  run->add_option("--out", run_opts.out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--format", format, "Only this output: jsonl, csv or table")->check(CLI::IsMember({"jsonl", "csv", "table"}));
  run->add_option("--jobs", run_opts.jobs, "Worker threads (fallback: ENTVER_JOBS)");

  std::string list_config;
  auto* list = app.add_subcommand("list-scenarios", "List the scenarios of a suite");
  list->add_option("--config", list_config, "Suite JSON (default: bundled suite)");

  std::string ensemble = "M";
  entver::ThresholdOptions topt;
  bool verbose = false;
  auto* thr = app.add_subcommand("thresholds", "Classical measure-and-prepare threshold of a test ensemble");
  thr->add_option("--ensemble", ensemble, "T, M, subset:<labels> or subsets (all 4-subsets of M)")->capture_default_str();
  thr->add_option("--restarts", topt.restarts, "Random restarts")->capture_default_str();
  thr->add_option("--seed", topt.seed, "Optimizer seed");
  thr->add_flag("--verbose", verbose, "Print the optimal strategy");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!config.empty()) run_opts.config_path = config;
      if (*seed_opt) run_opts.master_seed = seed;
      if (!format.empty()) run_opts.format = format;
      return entver::harness::run_scenarios(run_opts, std::cout, std::cerr);
    }
    if (*list) {
      entver::harness::Suite suite;
      try {
        suite = list_config.empty() ? entver::harness::default_suite() : entver::harness::load_suite(list_config);
      } catch (const entver::harness::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return 2;
      }
      for (const auto& s : suite.scenarios) {
        std::printf("%-40s %-22s %-11s %-10s %s\n", s.name.c_str(), s.source.value("kind", "").c_str(), s.protocol.value("kind", "").c_str(),
                    s.protocol.value("mode", "").c_str(), entver::harness::to_string(s.expected));
      }
      return 0;
    }
    if (*thr) {
      if (ensemble == "subsets") {
        for (const auto& ens : entver::ensembles::mub_four_subsets()) print_threshold(ens, topt, verbose);
      } else {
        print_threshold(entver::ensembles::parse(ensemble), topt, verbose);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
