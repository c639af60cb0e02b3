#include "entver/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "entver/measures.hpp"
#include "entver/protocols/chsh.hpp"
#include "entver/protocols/direct.hpp"
#include "entver/protocols/ensembles.hpp"
#include "entver/protocols/moment.hpp"
#include "entver/protocols/teleport.hpp"
#include "entver/protocols/tomography.hpp"
#include "entver/protocols/witness.hpp"
#include "entver/random.hpp"

namespace entver::harness {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw SchemaError(what + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError("unknown field '" + key + "' in " + what);
  }
}

template <class T>
T required(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw SchemaError("missing field '" + std::string(key) + "' in " + what);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("field '" + std::string(key) + "' in " + what + " has the wrong type");
  }
}

template <class T>
T optional_field(const json& j, const char* key, T fallback, const std::string& what) {
  return j.contains(key) ? required<T>(j, key, what) : fallback;
}

DensityMatrix named_state(const std::string& name) {
  if (name == "singlet") return singlet();
  if (name == "maximally_mixed") return DensityMatrix::maximally_mixed({2, 2});
  if (name == "product01") {
    const CVector v = tensor(basis_ket(2, 0), basis_ket(2, 1));
    return DensityMatrix({2, 2}, v * v.adjoint());
  }
  if (name.rfind("werner:", 0) == 0) {
    try {
      return werner_state(std::stod(name.substr(7)));
    } catch (const std::logic_error&) {
      throw SchemaError("bad Werner parameter in state '" + name + "'");
    }
  }
  throw SchemaError("unknown state '" + name + "'");
}

CMatrix bloch_from(const json& j, const std::string& what) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw SchemaError(what + " must be a list of three numbers");
  }
  if (v.size() != 3) throw SchemaError(what + " must be a list of three numbers");
  return bloch_density(v[0], v[1], v[2]);
}

CMatrix diagonal_filter(const json& j, const std::string& what) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw SchemaError(what + " must be a list of two amplitudes");
  }
  if (v.size() != 2) throw SchemaError(what + " must be a list of two amplitudes");
  CMatrix f = CMatrix::Zero(2, 2);
  f(0, 0) = v[0];
  f(1, 1) = v[1];
  return f;
}

double finite_or_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

Expected parse_expected(const std::string& s) {
  if (s == "certify") return Expected::certify;
  if (s == "refuse") return Expected::refuse;
  if (s == "fooled") return Expected::fooled;
  throw SchemaError("expected must be certify, refuse or fooled, got '" + s + "'");
}

Classification parse_classification(const std::string& s) {
  for (auto c : {Classification::true_positive, Classification::true_negative, Classification::fooled, Classification::missed, Classification::error}) {
    if (s == to_string(c)) return c;
  }
  throw Error("unknown classification '" + s + "'");
}

}  // namespace

const char* to_string(Expected e) {
  switch (e) {
    case Expected::certify: return "certify";
    case Expected::refuse: return "refuse";
    case Expected::fooled: return "fooled";
  }
  return "?";
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::true_positive: return "true-positive";
    case Classification::true_negative: return "true-negative";
    case Classification::fooled: return "fooled";
    case Classification::missed: return "missed";
    case Classification::error: return "error";
  }
  return "?";
}

SourceProcess make_source(const json& spec) {
  const std::string what = "source";
  const auto kind = required<std::string>(spec, "kind", what);
  if (kind == "werner") {
    check_keys(spec, {"kind", "alpha"}, what);
    return sources::werner(required<double>(spec, "alpha", what));
  }
  if (kind == "a_priori") {
    check_keys(spec, {"kind", "state"}, what);
    return sources::a_priori(named_state(required<std::string>(spec, "state", what)));
  }
  if (kind == "product") {
    check_keys(spec, {"kind", "a", "b"}, what);
    if (!spec.contains("a") || !spec.contains("b")) throw SchemaError("product source needs Bloch vectors a and b");
    return sources::a_priori(DensityMatrix({2, 2}, tensor(bloch_from(spec["a"], "a"), bloch_from(spec["b"], "b"))));
  }
  if (kind == "heralded") {
    check_keys(spec, {"kind", "p_yes", "entangled", "unentangled"}, what);
    return sources::heralded(required<double>(spec, "p_yes", what), named_state(optional_field<std::string>(spec, "entangled", "singlet", what)),
                             named_state(optional_field<std::string>(spec, "unentangled", "maximally_mixed", what)));
  }
  if (kind == "a_posteriori") {
    check_keys(spec, {"kind", "p", "state"}, what);
    return sources::a_posteriori(required<double>(spec, "p", what), named_state(optional_field<std::string>(spec, "state", "singlet", what)));
  }
  if (kind == "phase_mixed") {
    check_keys(spec, {"kind", "law", "step_sigma", "leak"}, what);
    PhaseDrift d;
    const auto law = optional_field<std::string>(spec, "law", "uniform", what);
    if (law == "uniform") {
      d.law = PhaseLaw::uniform;
    } else if (law == "random_walk") {
      d.law = PhaseLaw::random_walk;
    } else {
      throw SchemaError("phase law must be uniform or random_walk");
    }
    d.step_sigma = optional_field<double>(spec, "step_sigma", 0.0, what);
    d.leak_phase_to_verifier = optional_field<bool>(spec, "leak", false, what);
    return sources::phase_mixed(d);
  }
  if (kind == "dual_rail") {
    check_keys(spec, {"kind", "variant", "epsilon", "phi"}, what);
    const auto variant = required<std::string>(spec, "variant", what);
    DualRailVariant v;
    if (variant == "entangled") {
      v = DualRailVariant::entangled;
    } else if (variant == "product") {
      v = DualRailVariant::product;
    } else {
      throw SchemaError("dual_rail variant must be entangled or product");
    }
    return sources::dual_rail(v, optional_field<double>(spec, "epsilon", 0.1, what), optional_field<double>(spec, "phi", 0.0, what));
  }
  if (kind == "definetti") {
    check_keys(spec, {"kind", "weights", "alphas"}, what);
    const auto weights = required<std::vector<double>>(spec, "weights", what);
    const auto alphas = required<std::vector<double>>(spec, "alphas", what);
    if (weights.size() != alphas.size() || weights.empty()) throw SchemaError("definetti needs matching nonempty weights and alphas");
    std::vector<DensityMatrix> states;
    for (double a : alphas) states.push_back(werner_state(a));
    return sources::definetti(weights, states);
  }
  if (kind == "singlet_fraction") {
    check_keys(spec, {"kind"}, what);
    return sources::singlet_fraction();
  }
  if (kind == "cross_side_correlated") {
    check_keys(spec, {"kind"}, what);
    return sources::cross_side_correlated();
  }
  if (kind == "anti_grouping") {
    check_keys(spec, {"kind", "m"}, what);
    return sources::anti_grouping(optional_field<int>(spec, "m", 20, what));
  }
  throw SchemaError("unknown source kind '" + kind + "'");
}

PreparedProtocol prepare_protocol(const json& spec, long long shots, std::uint64_t seed, Exec exec) {
  const std::string what = "protocol";
  PreparedProtocol p;
  p.kind = required<std::string>(spec, "kind", what);
  p.mode = required<std::string>(spec, "mode", what);
  if (p.mode != "compliant" && p.mode != "naive") throw SchemaError("mode must be compliant or naive");
  const bool exact = optional_field<bool>(spec, "exact", false, what);

  if (p.kind == "chsh") {
    check_keys(spec, {"kind", "mode", "exact", "detection_eta", "postselect", "condition_on_herald"}, what);
    ChshOptions o;
    o.exact = exact;
    o.shots = shots;
    o.seed = seed;
    o.exec = exec;
    o.detection_eta = optional_field<double>(spec, "detection_eta", 1.0, what);
    o.postselect = optional_field<bool>(spec, "postselect", false, what);
    o.condition_on_herald = optional_field<bool>(spec, "condition_on_herald", false, what);
    p.audit = o.audit();
    p.run = [o](const SourceProcess& src) { return chsh_test(src, o); };
  } else if (p.kind == "witness") {
    check_keys(spec, {"kind", "mode", "exact", "witness", "ensemble"}, what);
    const auto which = optional_field<std::string>(spec, "witness", "optimal", what);
    const auto ens_name = optional_field<std::string>(spec, "ensemble", "M", what);
    if (which != "optimal" && which != "bell" && which != "teleportation") throw SchemaError("witness must be optimal, bell or teleportation");
    std::optional<TestEnsemble> ens;
    if (which == "teleportation") {
      try {
        ens = ensembles::parse(ens_name);
      } catch (const Error& e) {
        throw SchemaError(e.what());
      }
    }
    WitnessOptions o{exact, shots, seed, exec};
    p.audit = CriteriaAudit{};
    p.run = [o, which, ens](const SourceProcess& src) {
      Witness w = which == "optimal" ? singlet_witness()
                  : which == "bell"  ? bell_operator_witness(ChshSettings::optimal())
                                     : teleportation_witness(*ens, cached_threshold(*ens).f_tilde);
      return witness_test(src, w, o);
    };
  } else if (p.kind == "tomography") {
    check_keys(spec, {"kind", "mode", "exact", "phase_policy", "postselect", "bootstrap"}, what);
    TomographyOptions o;
    o.exact = exact;
    o.shots_per_setting = shots / 9;
    o.seed = seed;
    o.exec = exec;
    o.bootstrap = optional_field<int>(spec, "bootstrap", 200, what);
    const auto policy = optional_field<std::string>(spec, "phase_policy", "independent", what);
    if (policy == "independent") {
      o.phase_policy = PhasePolicy::independent;
    } else if (policy == "shared_path") {
      o.phase_policy = PhasePolicy::shared_path;
    } else {
      throw SchemaError("phase_policy must be independent or shared_path");
    }
    const auto post = optional_field<std::string>(spec, "postselect", "none", what);
    if (post == "none") {
      o.subspace = SubspaceSelection::none;
    } else if (post == "local_subspace") {
      o.subspace = SubspaceSelection::local;
    } else if (post == "one_photon_total") {
      o.subspace = SubspaceSelection::one_excitation;
    } else {
      throw SchemaError("postselect must be none, local_subspace or one_photon_total");
    }
    p.audit = o.audit();
    p.run = [o](const SourceProcess& src) { return tomography_test(src, o).report; };
  } else if (p.kind == "teleport") {
    check_keys(spec, {"kind", "mode", "exact", "ensemble", "assumed_threshold", "filter"}, what);
    TestEnsemble ens = [&] {
      try {
        return ensembles::parse(optional_field<std::string>(spec, "ensemble", "M", what));
      } catch (const Error& e) {
        throw SchemaError(e.what());
      }
    }();
    TeleportOptions o;
    o.exact = exact;
    o.shots = shots;
    o.seed = seed;
    o.exec = exec;
    if (spec.contains("assumed_threshold")) o.assumed_threshold = required<double>(spec, "assumed_threshold", what);
    if (spec.contains("filter")) {
      const json& f = spec["filter"];
      check_keys(f, {"a", "b"}, "teleport filter");
      if (!f.contains("a") || !f.contains("b")) throw SchemaError("teleport filter needs a and b");
      o.filter = FilterPair{diagonal_filter(f["a"], "filter a"), diagonal_filter(f["b"], "filter b")};
    }
    p.audit = o.audit();
    p.run = [o, ens](const SourceProcess& src) { return teleport_test(src, ens, o); };
  } else if (p.kind == "direct") {
    check_keys(spec, {"kind", "mode", "exact", "pairing", "sides"}, what);
    DirectOptions o;
    o.compliant = p.mode == "compliant";
    o.exact = exact;
    o.shots = shots;
    o.seed = seed;
    o.exec = exec;
    const auto pairing = optional_field<std::string>(spec, "pairing", "fixed_consecutive", what);
    if (pairing == "fixed_consecutive") {
      o.pairing = Pairing::fixed_consecutive;
    } else if (pairing == "random") {
      o.pairing = Pairing::random;
    } else {
      throw SchemaError("pairing must be fixed_consecutive or random");
    }
    const auto sides = optional_field<std::string>(spec, "sides", "A_only", what);
    if (sides == "A_only") {
      o.sides = PairSides::a_only;
    } else if (sides == "both_with_correlations") {
      o.sides = PairSides::both_with_correlations;
    } else {
      throw SchemaError("sides must be A_only or both_with_correlations");
    }
    p.audit = o.audit();
    p.run = [o](const SourceProcess& src) { return direct_concurrence_2copy(src, o); };
  } else if (p.kind == "moment") {
    check_keys(spec, {"kind", "mode", "exact", "grouping", "group_size", "deletion"}, what);
    MomentOptions o;
    o.exact = exact;
    o.shots = shots;
    o.seed = seed;
    o.exec = exec;
    const auto grouping = optional_field<std::string>(spec, "grouping", "random", what);
    if (grouping == "fixed_consecutive") {
      o.grouping = GroupingPolicy::fixed_consecutive;
    } else if (grouping == "random") {
      o.grouping = GroupingPolicy::random;
    } else {
      throw SchemaError("grouping must be fixed_consecutive or random");
    }
    o.group_size = optional_field<int>(spec, "group_size", 20, what);
    o.deletion_check = optional_field<bool>(spec, "deletion", true, what);
    p.audit = o.audit();
    p.run = [o](const SourceProcess& src) { return moment_concurrence(src, o); };
  } else {
    throw SchemaError("unknown protocol kind '" + p.kind + "'");
  }
  return p;
}

Suite parse_suite(const json& doc) {
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  check_keys(doc, {"scenarios", "master_seed"}, "config");
  Suite suite;
  suite.master_seed = required<std::uint64_t>(doc, "master_seed", "config");
  if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) throw SchemaError("config needs a scenarios list");
  if (doc["scenarios"].empty()) throw SchemaError("scenario list is empty");
  std::set<std::string> names;
  for (const auto& sj : doc["scenarios"]) {
    const std::string what = "scenario";
    check_keys(sj, {"name", "source", "protocol", "shots", "expected", "seed"}, what);
    Scenario s;
    s.name = required<std::string>(sj, "name", what);
    if (s.name.empty()) throw SchemaError("scenario name is empty");
    if (!names.insert(s.name).second) throw SchemaError("duplicate scenario name '" + s.name + "'");
    const std::string where = "scenario '" + s.name + "'";
    if (!sj.contains("source") || !sj.contains("protocol")) throw SchemaError(where + " needs source and protocol");
    s.source = sj["source"];
    s.protocol = sj["protocol"];
    s.shots = required<long long>(sj, "shots", where);
    if (s.shots < 1) throw SchemaError(where + ": shots must be positive");
    s.expected = parse_expected(required<std::string>(sj, "expected", where));
    if (sj.contains("seed")) s.seed = required<std::uint64_t>(sj, "seed", where);

    PreparedProtocol p;
    try {
      (void)make_source(s.source);
      p = prepare_protocol(s.protocol, s.shots, 0, Exec::serial);
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    } catch (const Error& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (p.mode == "compliant" && !p.audit.all_respected()) {
      throw SchemaError(where + ": compliant mode with a criteria violation (" + (p.audit.notes.empty() ? "" : p.audit.notes.front()) + ")");
    }
    if (s.expected == Expected::fooled && p.audit.violations() == 0) {
      throw SchemaError(where + ": expected 'fooled' needs a protocol that declares a criteria violation");
    }
    suite.scenarios.push_back(std::move(s));
  }
  return suite;
}

Suite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_suite(doc);
}

Suite default_suite() { return parse_suite(json::parse(default_suite_json())); }

std::uint64_t scenario_seed(const Suite& suite, const Scenario& s) {
  return s.seed ? *s.seed : derive_seed(suite.master_seed, fnv1a(s.name));
}

Classification classify(Verdict v, double ground_truth) {
  const bool entangled = ground_truth > kEntangledGroundTruth;
  if (v == Verdict::entangled) return entangled ? Classification::true_positive : Classification::fooled;
  return entangled ? Classification::missed : Classification::true_negative;
}

bool matches(Expected expected, Classification c) {
  switch (expected) {
    case Expected::certify: return c == Classification::true_positive;
    case Expected::refuse: return c == Classification::true_negative || c == Classification::missed;
    case Expected::fooled: return c == Classification::fooled;
  }
  return false;
}

RunReport run_scenario(const Scenario& s, std::uint64_t seed, Exec inner) {
  RunReport r;
  r.scenario = s.name;
  r.expected = s.expected;
  r.seed = seed;
  r.report.protocol = s.protocol.value("kind", "");
  r.mode = s.protocol.value("mode", "");
  r.source_kind = s.source.value("kind", "");
  const auto start = std::chrono::steady_clock::now();
  try {
    const SourceProcess src = make_source(s.source);
    const PreparedProtocol p = prepare_protocol(s.protocol, s.shots, seed, inner);
    r.source_kind = src.kind();
    r.ground_truth = src.ground_truth_entanglement();
    r.report = p.run(src);
    r.classification = classify(r.report.verdict, r.ground_truth);
    r.matches = matches(r.expected, r.classification);
  } catch (const std::exception& e) {
    r.error = e.what();
    r.classification = Classification::error;
    r.matches = false;
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<RunReport> run_suite(const Suite& suite, Exec outer) {
  std::vector<RunReport> out(suite.scenarios.size());
  for_each_index(static_cast<std::int64_t>(suite.scenarios.size()), outer, [&](std::int64_t i) {
    const Scenario& s = suite.scenarios[static_cast<size_t>(i)];
    out[static_cast<size_t>(i)] = run_scenario(s, scenario_seed(suite, s));
  });
  return out;
}

json to_json(const RunReport& r) {
  const VerifierReport& v = r.report;
  json diag = json::object();
  for (const auto& [k, x] : v.diagnostics) diag[k] = number(x);
  json j;
  j["scenario"] = r.scenario;
  j["source"] = r.source_kind;
  j["protocol"] = v.protocol;
  j["mode"] = r.mode;
  j["exact"] = v.exact;
  j["verdict"] = to_string(v.verdict);
  j["statistic"] = number(v.statistic);
  j["threshold"] = number(v.threshold);
  j["stderr"] = number(v.se);
  j["shots"] = v.shots;
  j["ground_truth_C"] = number(r.ground_truth);
  j["classification"] = to_string(r.classification);
  j["expected"] = to_string(r.expected);
  j["matches"] = r.matches;
  j["seed"] = r.seed;
  j["criteria"] = {{"c1", v.audit.c1}, {"c2", v.audit.c2}, {"c3", v.audit.c3}, {"c4", v.audit.c4}, {"c5", v.audit.c5}, {"notes", v.audit.notes}};
  j["diagnostics"] = diag;
  j["notes"] = v.notes;
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  VerifierReport& v = r.report;
  r.scenario = j.at("scenario").get<std::string>();
  r.source_kind = j.at("source").get<std::string>();
  v.protocol = j.at("protocol").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  v.exact = j.at("exact").get<bool>();
  v.verdict = j.at("verdict").get<std::string>() == to_string(Verdict::entangled) ? Verdict::entangled : Verdict::inconclusive;
  v.statistic = finite_or_nan(j.at("statistic"));
  v.threshold = finite_or_nan(j.at("threshold"));
  v.se = finite_or_nan(j.at("stderr"));
  v.shots = j.at("shots").get<long long>();
  r.ground_truth = finite_or_nan(j.at("ground_truth_C"));
  r.classification = parse_classification(j.at("classification").get<std::string>());
  r.expected = parse_expected(j.at("expected").get<std::string>());
  r.matches = j.at("matches").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const json& c = j.at("criteria");
  v.audit.c1 = c.at("c1").get<bool>();
  v.audit.c2 = c.at("c2").get<bool>();
  v.audit.c3 = c.at("c3").get<bool>();
  v.audit.c4 = c.at("c4").get<bool>();
  v.audit.c5 = c.at("c5").get<bool>();
  v.audit.notes = c.at("notes").get<std::vector<std::string>>();
  for (const auto& [k, x] : j.at("diagnostics").items()) v.diagnostics[k] = finite_or_nan(x);
  v.notes = j.at("notes").get<std::vector<std::string>>();
  r.error = j.at("error").is_null() ? "" : j.at("error").get<std::string>();
  return r;
}

std::string to_jsonl(const std::vector<RunReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += to_json(r).dump() + "\n";
  return out;
}

std::string to_csv(const std::vector<RunReport>& reports) {
  std::ostringstream os;
  os << "scenario,verdict,statistic,threshold,stderr,ground_truth_C,classification,c1,c2,c3,c4,c5,seed,shots\n";
  for (const auto& r : reports) {
    const auto& v = r.report;
    os << r.scenario << ',' << to_string(v.verdict) << ',' << csv_number(v.statistic) << ',' << csv_number(v.threshold) << ','
       << csv_number(v.se) << ',' << csv_number(r.ground_truth) << ',' << to_string(r.classification) << ',' << v.audit.c1 << ','
       << v.audit.c2 << ',' << v.audit.c3 << ',' << v.audit.c4 << ',' << v.audit.c5 << ',' << r.seed << ',' << v.shots << '\n';
  }
  return os.str();
}

std::string to_table(const std::vector<RunReport>& reports) {
  std::ostringstream os;
  auto row = [&](const RunReport& r) {
    const auto& v = r.report;
    std::string flags;
    for (bool c : {v.audit.c1, v.audit.c2, v.audit.c3, v.audit.c4, v.audit.c5}) flags += c ? '.' : 'x';
    os << std::left << std::setw(38) << r.scenario << std::setw(11) << v.protocol << std::setw(10) << r.mode << std::setw(13)
       << to_string(v.verdict) << std::right << std::setw(9) << fixed(v.statistic, 4) << std::setw(9) << fixed(v.threshold, 4)
       << std::setw(9) << fixed(v.se, 4) << std::setw(8) << fixed(r.ground_truth, 3) << "  " << std::left << std::setw(14)
       << to_string(r.classification) << std::setw(8) << to_string(r.expected) << std::setw(6) << flags
       << (r.matches ? "ok  " : "FAIL") << std::right << std::setw(8) << fixed(r.wall_seconds, 2) << "s\n";
    if (!r.error.empty()) os << "    error: " << r.error << '\n';
  };
  auto header = [&] {
    os << std::left << std::setw(38) << "scenario" << std::setw(11) << "protocol" << std::setw(10) << "mode" << std::setw(13) << "verdict"
       << std::right << std::setw(9) << "stat" << std::setw(9) << "thresh" << std::setw(9) << "stderr" << std::setw(8) << "GT C"
       << "  " << std::left << std::setw(14) << "class" << std::setw(8) << "expect" << std::setw(6) << "c1-5" << "match" << '\n';
  };
  os << "SCENARIOS\n";
  header();
  for (const auto& r : reports) {
    if (r.classification != Classification::fooled) row(r);
  }
  os << "\nCRITERIA VIOLATION DEMOS\n";
  header();
  for (const auto& r : reports) {
    if (r.classification != Classification::fooled) continue;
    row(r);
    for (const auto& n : r.report.audit.notes) os << "    - " << n << '\n';
  }
  int ok = 0;
  for (const auto& r : reports) ok += r.matches;
  os << '\n' << ok << '/' << reports.size() << " scenarios match their expected outcome\n";
  return os.str();
}

int exit_code(const std::vector<RunReport>& reports) {
  bool mismatch = false;
  for (const auto& r : reports) {
    if (!r.error.empty()) return 3;
    mismatch = mismatch || !r.matches;
  }
  return mismatch ? 1 : 0;
}

int run_scenarios(const RunOptions& options, std::ostream& out, std::ostream& err) {
  if (options.format && *options.format != "jsonl" && *options.format != "csv" && *options.format != "table") {
    err << "unknown format '" << *options.format << "' (jsonl, csv or table)\n";
    return 2;
  }
  Suite suite;
  try {
    suite = options.config_path ? load_suite(*options.config_path) : default_suite();
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return 2;
  }
  if (options.master_seed) suite.master_seed = *options.master_seed;

  int jobs = options.jobs;
  if (jobs <= 0) {
    if (const char* env = std::getenv("ENTVER_JOBS")) jobs = std::atoi(env);
  }
  if (jobs > 0) set_threads(jobs);

  const auto reports = run_suite(suite);
  const bool all = !options.format;
  try {
    std::filesystem::create_directories(options.out_dir);
    auto write = [&](const std::string& name, const std::string& text) {
      const auto path = std::filesystem::path(options.out_dir) / name;
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error("cannot write '" + path.string() + "'");
      f << text;
      if (!f) throw Error("cannot write '" + path.string() + "'");
    };
    if (all || *options.format == "jsonl") write("report.jsonl", to_jsonl(reports));
    if (all || *options.format == "csv") write("report.csv", to_csv(reports));
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return 3;
  }
  if (all || *options.format == "table") out << to_table(reports);
  for (const auto& r : reports) {
    if (!r.error.empty()) err << "scenario '" << r.scenario << "' failed: " << r.error << '\n';
  }
  return exit_code(reports);
}

}  // namespace entver::harness
