#pragma once

// Scenario runner: sources x protocols x expected outcome, from a JSON suite,
// with JSONL / CSV / table reports.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entver/kernels.hpp"
#include "entver/protocols/report.hpp"
#include "entver/sources.hpp"

namespace entver::harness {

enum class Expected { certify, refuse, fooled };
enum class Classification { true_positive, true_negative, fooled, missed, error };

/// Ground-truth values above this count as entangled.
inline constexpr double kEntangledGroundTruth = 1e-9;

/// The suite does not match the config schema (exit code 2).
class SchemaError : public Error {
 public:
  using Error::Error;
};

struct Scenario {
  std::string name;
  nlohmann::json source;
  nlohmann::json protocol;
  long long shots = 0;
  Expected expected = Expected::refuse;
  std::optional<std::uint64_t> seed;
};

struct Suite {
  std::vector<Scenario> scenarios;
  std::uint64_t master_seed = 0;
};

/// Parses and validates a suite: types, unique names, known kinds and
/// parameters, compliant scenarios free of criteria violations, "fooled"
/// only where a violation is declared.
Suite parse_suite(const nlohmann::json& doc);
Suite load_suite(const std::string& path);
std::string_view default_suite_json();
Suite default_suite();

SourceProcess make_source(const nlohmann::json& spec);

struct PreparedProtocol {
  std::string kind;
  std::string mode;  // "compliant" or "naive"
  CriteriaAudit audit;
  std::function<VerifierReport(const SourceProcess&)> run;
};
PreparedProtocol prepare_protocol(const nlohmann::json& spec, long long shots, std::uint64_t seed, Exec exec);

/// Explicit scenario seed, else derive_seed(master_seed, fnv1a(name)).
std::uint64_t scenario_seed(const Suite& suite, const Scenario& s);

Classification classify(Verdict v, double ground_truth);
bool matches(Expected expected, Classification c);

struct RunReport {
  std::string scenario;
  std::string source_kind;
  std::string mode;
  VerifierReport report;
  double ground_truth = 0.0;
  Classification classification = Classification::error;
  Expected expected = Expected::refuse;
  bool matches = false;
  std::uint64_t seed = 0;
  std::string error;         // empty unless the scenario threw
  double wall_seconds = 0.0;  // not serialized: reports stay byte-identical across runs
};

RunReport run_scenario(const Scenario& s, std::uint64_t seed, Exec inner = Exec::parallel);
/// Scenarios run concurrently under Exec::parallel; reports keep suite order.
std::vector<RunReport> run_suite(const Suite& suite, Exec outer = Exec::parallel);

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

std::string to_jsonl(const std::vector<RunReport>& reports);
std::string to_csv(const std::vector<RunReport>& reports);
std::string to_table(const std::vector<RunReport>& reports);

/// 3 if any scenario threw, else 1 if any classification misses its expectation, else 0.
int exit_code(const std::vector<RunReport>& reports);

const char* to_string(Expected e);
const char* to_string(Classification c);

struct RunOptions {
  std::optional<std::string> config_path;  // bundled suite when empty
  std::string out_dir = ".";
  std::optional<std::uint64_t> master_seed;
  std::optional<std::string> format;  // jsonl, csv or table; all three when empty
  int jobs = 0;                       // 0: ENTVER_JOBS or the OpenMP default
};

/// Full `entver run`: load, validate, run, write reports, return the exit code.
int run_scenarios(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace entver::harness
