#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "entver/harness.hpp"
#include "entver/random.hpp"

using namespace entver;
using namespace entver::harness;
using nlohmann::json;

namespace {

json one_scenario(json source, json protocol, long long shots, const std::string& expected) {
  return json{{"master_seed", 7},
              {"scenarios", json::array({json{{"name", "s"}, {"source", source}, {"protocol", protocol}, {"shots", shots}, {"expected", expected}}})}};
}

json werner_exact_teleport() {
  return one_scenario({{"kind", "werner"}, {"alpha", 0.5}}, {{"kind", "teleport"}, {"mode", "compliant"}, {"ensemble", "T"}, {"exact", true}}, 1,
                      "certify");
}

int line_count(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Classify, Table) {
  EXPECT_EQ(classify(Verdict::entangled, 0.5), Classification::true_positive);
  EXPECT_EQ(classify(Verdict::entangled, 0.0), Classification::fooled);
  EXPECT_EQ(classify(Verdict::inconclusive, 0.0), Classification::true_negative);
  EXPECT_EQ(classify(Verdict::inconclusive, 0.5), Classification::missed);
  EXPECT_EQ(classify(Verdict::entangled, 1e-12), Classification::fooled);
  EXPECT_TRUE(matches(Expected::certify, Classification::true_positive));
  EXPECT_TRUE(matches(Expected::refuse, Classification::true_negative));
  EXPECT_TRUE(matches(Expected::refuse, Classification::missed));
  EXPECT_TRUE(matches(Expected::fooled, Classification::fooled));
  EXPECT_FALSE(matches(Expected::refuse, Classification::fooled));
  EXPECT_FALSE(matches(Expected::certify, Classification::missed));
}

TEST(ParseSuite, DefaultSuiteIsValid) {
  const Suite s = default_suite();
  EXPECT_GE(s.scenarios.size(), 20u);
  int fooled = 0;
  for (const auto& sc : s.scenarios) fooled += sc.expected == Expected::fooled;
  EXPECT_GE(fooled, 5);
}

TEST(ParseSuite, SchemaErrors) {
  EXPECT_THROW(parse_suite(json{{"master_seed", 1}, {"scenarios", json::array()}}), SchemaError);
  json unknown = werner_exact_teleport();
  unknown["scenarios"][0]["colour"] = "red";
  EXPECT_THROW(parse_suite(unknown), SchemaError);
  json dup = werner_exact_teleport();
  dup["scenarios"].push_back(dup["scenarios"][0]);
  EXPECT_THROW(parse_suite(dup), SchemaError);
  json zero = werner_exact_teleport();
  zero["scenarios"][0]["shots"] = 0;
  EXPECT_THROW(parse_suite(zero), SchemaError);
  json kind = werner_exact_teleport();
  kind["scenarios"][0]["source"]["kind"] = "laser";
  EXPECT_THROW(parse_suite(kind), SchemaError);
  json bad_param = werner_exact_teleport();
  bad_param["scenarios"][0]["source"]["alpha"] = 1.5;
  EXPECT_THROW(parse_suite(bad_param), SchemaError);
}

TEST(ParseSuite, FooledNeedsDeclaredViolation) {
  json honest = werner_exact_teleport();
  honest["scenarios"][0]["expected"] = "fooled";
  EXPECT_THROW(parse_suite(honest), SchemaError);
  json assumed = werner_exact_teleport();
  assumed["scenarios"][0]["protocol"]["mode"] = "naive";
  assumed["scenarios"][0]["protocol"]["assumed_threshold"] = 0.6;
  assumed["scenarios"][0]["expected"] = "fooled";
  EXPECT_NO_THROW(parse_suite(assumed));
}

TEST(ParseSuite, CompliantRejectsViolations) {
  const json doc = one_scenario({{"kind", "phase_mixed"}, {"law", "uniform"}, {"leak", true}},
                                {{"kind", "tomography"}, {"mode", "compliant"}, {"phase_policy", "shared_path"}}, 9000, "refuse");
  EXPECT_THROW(parse_suite(doc), SchemaError);
}

TEST(RunScenario, ExactTeleport) {
  const Suite s = parse_suite(werner_exact_teleport());
  const RunReport r = run_scenario(s.scenarios[0], scenario_seed(s, s.scenarios[0]));
  EXPECT_TRUE(r.error.empty());
  EXPECT_NEAR(r.report.statistic, 0.75, 1e-12);
  EXPECT_NEAR(r.ground_truth, 0.25, 1e-9);
  EXPECT_EQ(r.classification, Classification::true_positive);
  EXPECT_TRUE(r.matches);
  EXPECT_EQ(exit_code({r}), 0);
}

TEST(RunScenario, SeedDerivation) {
  Suite s = parse_suite(werner_exact_teleport());
  const std::uint64_t derived = scenario_seed(s, s.scenarios[0]);
  EXPECT_EQ(derived, derive_seed(7, fnv1a("s")));
  s.scenarios[0].seed = 99;
  EXPECT_EQ(scenario_seed(s, s.scenarios[0]), 99u);
}

TEST(Reports, JsonRoundTripAndFormats) {
  const Suite s = parse_suite(werner_exact_teleport());
  RunReport r = run_scenario(s.scenarios[0], 5);
  r.report.diagnostics["not_finite"] = std::numeric_limits<double>::infinity();
  const json j = to_json(r);
  EXPECT_TRUE(j.at("diagnostics").at("not_finite").is_null());
  EXPECT_FALSE(j.contains("wall_seconds"));
  const RunReport back = report_from_json(j);
  EXPECT_EQ(back.scenario, r.scenario);
  EXPECT_EQ(back.report.statistic, r.report.statistic);
  EXPECT_EQ(back.classification, r.classification);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(to_json(back).dump(), j.dump());

  const std::vector<RunReport> three = {r, r, r};
  const std::string csv = to_csv(three);
  EXPECT_EQ(line_count(csv), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scenario,verdict,statistic,threshold,stderr,ground_truth_C,classification,c1,c2,c3,c4,c5,seed,shots");
  EXPECT_EQ(line_count(to_jsonl(three)), 3);
  const std::string table = to_table(three);
  EXPECT_NE(table.find("SCENARIOS"), std::string::npos);
  EXPECT_NE(table.find("CRITERIA VIOLATION DEMOS"), std::string::npos);
  EXPECT_NE(table.find("3/3 scenarios match"), std::string::npos);
}

TEST(Reports, ExitCodes) {
  RunReport ok;
  ok.matches = true;
  RunReport miss;
  RunReport err;
  err.error = "boom";
  EXPECT_EQ(exit_code({ok}), 0);
  EXPECT_EQ(exit_code({ok, miss}), 1);
  EXPECT_EQ(exit_code({ok, miss, err}), 3);
}

TEST(RunScenarios, EmptyConfigExitsTwo) {
  const auto dir = std::filesystem::temp_directory_path() / "entver_harness_empty";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "empty.json";
  std::ofstream(cfg) << R"({"master_seed": 1, "scenarios": []})";
  RunOptions o;
  o.config_path = cfg.string();
  o.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_scenarios(o, out, err), 2);
  EXPECT_NE(err.str().find("empty"), std::string::npos);
}

TEST(RunScenarios, WritesReports) {
  const auto dir = std::filesystem::temp_directory_path() / "entver_harness_run";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "suite.json";
  std::ofstream(cfg) << werner_exact_teleport().dump();
  RunOptions o;
  o.config_path = cfg.string();
  o.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_scenarios(o, out, err), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.csv"));
  EXPECT_NE(out.str().find("1/1 scenarios match"), std::string::npos);
}

TEST(RunSuite, DeterministicAndScheduleIndependent) {
  json doc = one_scenario({{"kind", "singlet_fraction"}}, {{"kind", "direct"}, {"mode", "naive"}, {"pairing", "fixed_consecutive"}}, 4000,
                          "fooled");
  doc["scenarios"].push_back(json{{"name", "w"},
                                  {"source", {{"kind", "werner"}, {"alpha", 0.9}}},
                                  {"protocol", {{"kind", "chsh"}, {"mode", "compliant"}}},
                                  {"shots", 4000},
                                  {"expected", "certify"}});
  const Suite s = parse_suite(doc);
  const auto a = run_suite(s, Exec::serial);
  const auto b = run_suite(s, Exec::parallel);
  EXPECT_EQ(to_jsonl(a), to_jsonl(b));
  EXPECT_EQ(a[0].classification, Classification::fooled);
  EXPECT_EQ(exit_code(a), 0);
}
