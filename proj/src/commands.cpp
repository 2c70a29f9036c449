#include "aeq/commands.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "aeq/coverage.hpp"
#include "aeq/format.hpp"
#include "aeq/io.hpp"
#include "aeq/metric.hpp"
#include "aeq/mutation.hpp"
#include "aeq/policy.hpp"
#include "aeq/search.hpp"

namespace aeq {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Parse:
    case ErrorCategory::Structural:
    case ErrorCategory::Precondition:
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Constraint: return 3;
    case ErrorCategory::Capacity: return 4;
    case ErrorCategory::Internal: return 5;
  }
  return 5;
}

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects inputs and outputs of one command and writes the manifest last.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}

  void input(const fs::path& p, const std::string& bytes) { inputs_[p.generic_string()] = fnv1a_hex(bytes); }

  void output(const fs::path& root, const fs::path& rel, const std::string& bytes) {
    write_text_file(root / rel, bytes);
    outputs_[rel.generic_string()] = fnv1a_hex(bytes);
  }

  ordered_json& config() { return config_; }

  void write(const fs::path& root, std::uint64_t seed) const {
    ordered_json j;
    j["command"] = command_;
    j["tool_version"] = kToolVersion;
    j["seed"] = seed;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    write_text_file(root / "manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string started_;
  ordered_json config_ = ordered_json::object();
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

/// The config file, loaded once per command.
struct Loaded {
  RunConfig run;
  std::optional<fs::path> config_path;
};

Loaded load_config(const CommonOptions& o, Manifest& m) {
  Loaded l;
  if (o.config) {
    const std::string text = read_text_file(*o.config);
    m.input(*o.config, text);
    try {
      l.run = parse_run_config(text, o.config->parent_path());
    } catch (const ParseError& e) {
      throw ParseError(o.config->string() + ": " + e.what());
    }
    l.config_path = o.config;
  }
  return l;
}

SchemaDocument load_schema(const CommonOptions& o, const Loaded& l, Manifest& m) {
  const std::optional<fs::path> path = o.schema ? o.schema : l.run.schema_path;
  if (!path) throw Error(ErrorCategory::Config, "no schema given (use --schema or the config 'schema' key)");
  const std::string text = read_text_file(*path);
  m.input(*path, text);
  try {
    return parse_schema_document(text);
  } catch (const ParseError& e) {
    throw ParseError(path->string() + ": " + e.what());
  }
}

// Precedence: flags, then the config file, then the schema file, then defaults.
EpConfig resolve_ep(const CommonOptions& o, const Loaded& l, const SchemaDocument& doc) {
  EpConfig ep = l.run.ep ? *l.run.ep : doc.ep.value_or(EpConfig{});
  if (o.rho) ep.violence_ratio = *o.rho;
  if (o.epsilon) ep.min_violent_distance = *o.epsilon;
  if (o.window_max) ep.window_max = *o.window_max;
  ep.check(max_distance(doc.schema));
  return ep;
}

AdaptationPolicy load_policy(const std::optional<fs::path>& flag, const Loaded& l, const ContextSchema& schema,
                             Manifest& m) {
  const std::optional<fs::path> path = flag ? flag : l.run.policy_path;
  if (!path) throw Error(ErrorCategory::Config, "no policy given (use --policy or the config 'policy' key)");
  const std::string text = read_text_file(*path);
  m.input(*path, text);
  try {
    return parse_policy(text, schema);
  } catch (const ParseError& e) {
    throw ParseError(path->string() + ": " + e.what());
  }
}

Variant resolve_variant(const std::optional<std::string>& flag, const Loaded& l) {
  if (!flag) return l.run.initial_variant;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*flag);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("--initial: ") + e.what());
  }
  return parse_variant(j);
}

std::string pct(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << 100.0 * x << '%';
  return os.str();
}

}  // namespace

std::string cmd_generate(const GenerateOptions& o) {
  Manifest m("generate");
  const Loaded l = load_config(o, m);
  const SchemaDocument doc = load_schema(o, l, m);

  SearchConfig cfg = l.run.search;
  if (o.seed) cfg.seed = *o.seed;
  if (o.flow_length) cfg.flow_length = *o.flow_length;
  if (o.no_aspiration) cfg.aspiration = false;
  cfg.ep = resolve_ep(o, l, doc);
  cfg = cfg.resolved();
  cfg.check(doc.schema);
  const std::size_t count = o.count.value_or(l.run.suite_size);

  const auto& sample_map = l.run.coverage_samples.empty() ? doc.coverage_samples : l.run.coverage_samples;
  const CoverageUniverse universe = build_pairwise_universe(doc.schema, samples_from_map(doc.schema, sample_map));
  const auto rounds = generate_suite(doc.schema, universe, cfg, count);

  std::vector<ContextFlow> flows;
  for (const auto& r : rounds) flows.insert(flows.end(), r.solution.begin(), r.solution.end());
  const CoverageUniverse covered = mark_covered(universe, flows);

  m.config() = {{"search", search_config_to_json(cfg)}, {"suite_size", count}, {"coverage_samples", sample_map}};

  ordered_json index;
  index["criterion"] = universe.criterion_id();
  index["universe_size"] = universe.size();
  index["pairs_covered"] = covered.covered_count();
  index["rounds"] = rounds.size();
  auto entries = ordered_json::array();
  for (std::size_t ri = 0; ri < rounds.size(); ++ri) {
    const auto& r = rounds[ri];
    for (std::size_t i = 0; i < r.solution.size(); ++i) {
      const auto& f = r.solution[i];
      m.output(o.out, fs::path("flows") / (f.id + ".csv"), flows_to_csv(doc.schema, {f}));
      m.output(o.out, fs::path("profiles") / (f.id + "_profile.csv"),
               profile_series_csv(origin_distance_series(doc.schema, f)));
      entries.push_back({{"id", f.id},
                         {"file", "flows/" + f.id + ".csv"},
                         {"round", ri},
                         {"l_value", r.per_flow[i].l_value},
                         {"ep_count", r.per_flow[i].ep_count},
                         {"shape", to_string(r.per_flow[i].shape)}});
    }
  }
  index["flows"] = std::move(entries);
  m.output(o.out, "suite_index.json", index.dump(2) + "\n");
  m.output(o.out, "suite.csv", flows_to_csv(doc.schema, flows));

  ordered_json result;
  auto rj = ordered_json::array();
  for (const auto& r : rounds) rj.push_back(search_result_to_json(r));
  result["rounds"] = std::move(rj);
  m.output(o.out, "search_result.json", result.dump(2) + "\n");
  m.output(o.out, "universe.csv", universe_to_csv(doc.schema, covered));
  if (o.trace) {
    std::string trace;
    for (std::size_t ri = 0; ri < rounds.size(); ++ri) {
      for (const auto& e : rounds[ri].trace) {
        ordered_json j;
        j["round"] = ri;
        j["iter"] = e.iter;
        j["action"] = to_string(e.action);
        j["flow"] = e.flow;
        j["age"] = e.age;
        j["g_before"] = e.g_before;
        j["g_after"] = e.g_after;
        trace += j.dump() + "\n";
      }
    }
    m.output(o.out, "trace.jsonl", trace);
  }
  m.write(o.out, cfg.seed);

  std::ostringstream os;
  os << "generated " << flows.size() << " AEQs in " << rounds.size() << " round(s); pairwise coverage "
     << covered.covered_count() << "/" << universe.size() << " ("
     << pct(universe.size() ? static_cast<double>(covered.covered_count()) / static_cast<double>(universe.size()) : 1.0)
     << ")\n";
  return os.str();
}

std::string cmd_profile(const ProfileOptions& o) {
  Manifest m("profile");
  const Loaded l = load_config(o, m);
  const SchemaDocument doc = load_schema(o, l, m);
  const EpConfig ep = resolve_ep(o, l, doc);
  const std::string text = read_text_file(o.flow);
  m.input(o.flow, text);
  std::vector<ContextFlow> flows;
  try {
    flows = parse_flows_csv(doc.schema, text);
  } catch (const ParseError& e) {
    throw ParseError(o.flow.string() + ": " + e.what());
  }
  std::ostringstream os;
  for (const auto& f : flows) {
    const auto rep = detect_ep(doc.schema, f, ep);
    m.output(o.out, f.id + "_profile.json", profile_json(rep));
    m.output(o.out, f.id + "_profile.csv", profile_series_csv(rep.origin_distance_series));
    os << f.id << ": ep_count " << format_number(rep.ep_count) << ", shape " << to_string(rep.shape)
       << ", oscillation " << (rep.oscillation_satisfied ? "yes" : "no") << '\n';
  }
  m.config() = {{"ep", {{"rho", ep.violence_ratio}, {"epsilon", ep.min_violent_distance}, {"window_max", ep.window_max}}}};
  m.write(o.out, 0);
  return os.str();
}

std::string cmd_simulate(const SimulateOptions& o) {
  Manifest m("simulate");
  const Loaded l = load_config(o, m);
  const SchemaDocument doc = load_schema(o, l, m);
  const AdaptationPolicy policy = load_policy(o.policy, l, doc.schema, m);
  const Variant initial = resolve_variant(o.initial_variant, l);
  const FuzzySets sets = FuzzySets::defaults(doc.schema);
  const std::string text = read_text_file(o.flow);
  m.input(o.flow, text);
  const auto flows = parse_flows_csv(doc.schema, text);
  std::ostringstream os;
  for (const auto& f : flows) {
    const auto trace = run(policy, sets, initial, f);
    m.output(o.out, f.id + "_trace.jsonl", trace_to_jsonl(trace));
    std::size_t actions = 0;
    for (const auto& e : trace) actions += e.actions.size();
    const Variant& last = trace.empty() ? initial : trace.back().variant;
    os << f.id << ": " << trace.size() << " steps, " << actions << " actions; final cache "
       << (last.cache_exists ? std::to_string(last.cache_size) + "/" + std::to_string(last.cache_validity_s) + "s"
                             : std::string("none"))
       << ", servers " << last.data_servers << '\n';
  }
  m.config() = {{"initial_variant", variant_to_json(initial)}, {"rules", policy.rules.size()}};
  m.write(o.out, 0);
  return os.str();
}

std::string cmd_mutate(const MutateOptions& o) {
  Manifest m("mutate");
  const Loaded l = load_config(o, m);
  const SchemaDocument doc = load_schema(o, l, m);
  const AdaptationPolicy policy = load_policy(o.policy, l, doc.schema, m);
  const Variant initial = resolve_variant(o.initial_variant, l);
  const FuzzySets sets = FuzzySets::defaults(doc.schema);

  MutantPlan plan = MutantPlan::desk_scale();
  if (o.plan) {
    const std::string text = read_text_file(*o.plan);
    m.input(*o.plan, text);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(o.plan->string() + ": " + e.what());
    }
    plan = parse_mutant_plan(j, doc.schema);
  } else if (l.run.mutation_plan) {
    plan = parse_mutant_plan(*l.run.mutation_plan, doc.schema);
  }
  const auto mutants = generate_mutants(policy, doc.schema, plan);

  if (o.suites.empty()) throw Error(ErrorCategory::Config, "mutate needs at least one --suite directory");
  std::vector<NamedSuite> suites;
  for (const auto& dir : o.suites) {
    const fs::path csv = fs::is_directory(dir) ? dir / "suite.csv" : dir;
    const std::string text = read_text_file(csv);
    m.input(csv, text);
    std::string name = (fs::is_directory(dir) ? dir : dir.parent_path()).filename().string();
    if (name.empty() || name == ".") name = "suite" + std::to_string(suites.size());
    for (const auto& s : suites)
      if (s.name == name) name += "_" + std::to_string(suites.size());
    suites.push_back({name, parse_flows_csv(doc.schema, text)});
  }

  const KillMatrix km = run_experiment(doc.schema, policy, sets, mutants, suites, initial, std::max<std::size_t>(1, o.jobs));
  const KillReport rep = report(km);

  ordered_json mj = ordered_json::array();
  for (std::size_t i = 0; i < mutants.size(); ++i)
    mj.push_back({{"id", mutants[i].id}, {"group", to_string(mutants[i].group)}, {"description", km.descriptions[i]}});
  m.output(o.out, "mutants.json", mj.dump(2) + "\n");
  m.output(o.out, "kill_matrix.csv", matrix_to_csv(km));
  m.output(o.out, "kill_summary.csv", report_csv(km));
  m.output(o.out, "kill_report.json", report_json(rep));
  const std::string text = report_text(km, rep);
  m.output(o.out, "kill_report.txt", text);
  m.config() = {{"initial_variant", variant_to_json(initial)}, {"mutants", mutants.size()}};
  m.write(o.out, 0);

  std::ostringstream os;
  os << "mutants " << rep.mutants << ", AEQs " << rep.aeqs << ", raw kill score " << pct(rep.raw_kill_score)
     << ", killed by >60% of AEQs " << pct(rep.killed_by_over_60) << ", possibly equivalent "
     << rep.possibly_equivalent.size() << '\n';
  for (const auto& id : rep.possibly_equivalent) {
    const auto i = static_cast<std::size_t>(std::find(km.mutant_ids.begin(), km.mutant_ids.end(), id) - km.mutant_ids.begin());
    os << "  survivor " << id << ": " << km.descriptions[i] << '\n';
  }
  return os.str();
}

std::string cmd_report(const ReportOptions& o) {
  const KillMatrix km = matrix_from_csv(read_text_file(o.matrix));
  const KillReport rep = report(km);
  if (o.format == "json") return report_json(rep);
  if (o.format == "csv") return report_csv(km);
  if (o.format == "text") return report_text(km, rep);
  throw Error(ErrorCategory::Config, "unknown report format '" + o.format + "' (text, json or csv)");
}

}  // namespace aeq
