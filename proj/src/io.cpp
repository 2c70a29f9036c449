#include "aeq/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aeq/error.hpp"
#include "aeq/format.hpp"

namespace aeq {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::Internal, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCategory::Internal, "short write to " + path.string());
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column pair.
    int line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ParseError(msg, line, col);
  }
}

[[noreturn]] void bad_key(const std::string& where, const std::string& why) {
  throw Error(ErrorCategory::Config, where + ": " + why);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad_key(where, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) bad_key(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

const json& object(const json& j, const std::string& where) {
  if (!j.is_object()) bad_key(where, "expected an object");
  return j;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [k, _] : j.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
      bad_key(where, "unknown key '" + k + "'");
}

std::map<std::string, std::vector<double>> parse_samples(const json& j) {
  object(j, "coverage_samples");
  std::map<std::string, std::vector<double>> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_array()) bad_key("coverage_samples." + k, "expected an array of numbers");
    auto& dst = out[k];
    for (const auto& x : v) dst.push_back(number(x, "coverage_samples." + k));
  }
  return out;
}

OriginSpec parse_origin(const json& j) {
  OriginSpec o;
  if (j.is_string()) {
    const auto m = j.get<std::string>();
    if (m == "lower_corner") o.mode = OriginSpec::Mode::LowerCorner;
    else if (m == "midpoint") o.mode = OriginSpec::Mode::Midpoint;
    else bad_key("origin", "unknown mode '" + m + "'");
    return o;
  }
  object(j, "origin");
  reject_unknown(j, {"mode", "values"}, "origin");
  const std::string mode = j.value("mode", std::string("lower_corner"));
  if (mode == "lower_corner") o.mode = OriginSpec::Mode::LowerCorner;
  else if (mode == "midpoint") o.mode = OriginSpec::Mode::Midpoint;
  else if (mode == "explicit") o.mode = OriginSpec::Mode::Explicit;
  else bad_key("origin.mode", "unknown mode '" + mode + "'");
  if (auto it = j.find("values"); it != j.end()) {
    if (!it->is_array()) bad_key("origin.values", "expected an array");
    for (const auto& x : *it) o.explicit_values.push_back(number(x, "origin.values"));
  }
  return o;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& s, int line, int col) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ParseError("malformed number '" + s + "'", line, col);
  return v;
}

}  // namespace

SchemaDocument parse_schema_document(std::string_view json_text) {
  const json doc = parse_json(json_text);
  object(doc, "schema");
  reject_unknown(doc, {"properties", "constraints", "origin", "ep", "coverage_samples"}, "schema");
  auto props_it = doc.find("properties");
  if (props_it == doc.end() || !props_it->is_array()) bad_key("schema", "missing 'properties' array");
  std::vector<PropertySpec> props;
  for (const auto& p : *props_it) {
    object(p, "properties[]");
    reject_unknown(p, {"name", "kind", "lower", "upper", "step"}, "properties[]");
    PropertySpec s;
    if (!p.contains("name") || !p["name"].is_string()) bad_key("properties[]", "missing name");
    s.name = p["name"].get<std::string>();
    const std::string where = "properties." + s.name;
    const std::string kind = p.value("kind", std::string("integer"));
    if (kind == "integer") s.kind = PropertyKind::Integer;
    else if (kind == "real") s.kind = PropertyKind::Real;
    else bad_key(where + ".kind", "expected 'integer' or 'real'");
    if (!p.contains("lower") || !p.contains("upper")) bad_key(where, "lower and upper are required");
    s.lower = number(p["lower"], where + ".lower");
    s.upper = number(p["upper"], where + ".upper");
    s.step = p.contains("step") ? number(p["step"], where + ".step") : 1.0;
    props.push_back(std::move(s));
  }
  std::vector<std::string> constraints;
  if (auto it = doc.find("constraints"); it != doc.end()) {
    if (!it->is_array()) bad_key("constraints", "expected an array of strings");
    for (const auto& c : *it) {
      if (!c.is_string()) bad_key("constraints", "expected an array of strings");
      constraints.push_back(c.get<std::string>());
    }
  }
  OriginSpec origin;
  if (auto it = doc.find("origin"); it != doc.end()) origin = parse_origin(*it);

  SchemaDocument out{ContextSchema(std::move(props), constraints, origin), std::nullopt, {}};
  if (auto it = doc.find("ep"); it != doc.end()) {
    out.ep = parse_ep_section(*it);
    out.ep->check(max_distance(out.schema));
  }
  if (auto it = doc.find("coverage_samples"); it != doc.end()) out.coverage_samples = parse_samples(*it);
  return out;
}

SchemaDocument load_schema_document(const std::filesystem::path& path) {
  try {
    return parse_schema_document(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<ContextFlow> parse_flows_csv(const ContextSchema& schema, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::vector<std::size_t> column_of;  // csv column -> property index
  struct Row {
    std::int64_t seq;
    ContextInstance inst;
    int line;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto f = split_csv(line);
    if (column_of.empty()) {
      if (f.size() < 2 || f[0] != "flow_id" || f[1] != "seq")
        throw ParseError("header must start with flow_id,seq", lineno, 1);
      if (f.size() - 2 != schema.arity())
        throw Error(ErrorCategory::Structural, "line " + std::to_string(lineno) + ": header has " +
                                                   std::to_string(f.size() - 2) + " properties, schema has " +
                                                   std::to_string(schema.arity()));
      std::vector<bool> seen(schema.arity(), false);
      for (std::size_t c = 2; c < f.size(); ++c) {
        auto idx = schema.index_of(f[c]);
        if (!idx) throw ParseError("unknown property '" + f[c] + "'", lineno, 1);
        if (seen[*idx]) throw ParseError("duplicate property '" + f[c] + "'", lineno, 1);
        seen[*idx] = true;
        column_of.push_back(*idx);
      }
      continue;
    }
    if (f.size() != column_of.size() + 2)
      throw ParseError("expected " + std::to_string(column_of.size() + 2) + " fields, got " +
                           std::to_string(f.size()),
                       lineno, 1);
    if (f[0].empty()) throw ParseError("empty flow_id", lineno, 1);
    Row r{0, ContextInstance{std::vector<double>(schema.arity())}, lineno};
    const double seq = parse_double(f[1], lineno, 2);
    if (seq < 0 || seq != static_cast<double>(static_cast<std::int64_t>(seq)))
      throw ParseError("seq must be a non-negative integer", lineno, 2);
    r.seq = static_cast<std::int64_t>(seq);
    for (std::size_t c = 0; c < column_of.size(); ++c)
      r.inst.values[column_of[c]] = parse_double(f[c + 2], lineno, static_cast<int>(c + 3));
    if (!rows.count(f[0])) order.push_back(f[0]);
    rows[f[0]].push_back(std::move(r));
  }
  if (column_of.empty()) throw ParseError("flow file has no header");
  std::vector<ContextFlow> flows;
  for (const auto& id : order) {
    auto& rs = rows[id];
    std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.seq < b.seq; });
    for (std::size_t i = 1; i < rs.size(); ++i)
      if (rs[i].seq == rs[i - 1].seq)
        throw ParseError("duplicate seq " + std::to_string(rs[i].seq) + " in flow " + id, rs[i].line, 2);
    std::vector<ContextInstance> insts;
    for (const auto& r : rs) {
      auto v = schema.validate(r.inst);
      if (!v.valid) {
        std::string msg = "line " + std::to_string(r.line) + ": invalid instance in flow " + id + ":";
        for (const auto& s : v.violations) msg += " " + s + ";";
        msg.pop_back();
        throw Error(ErrorCategory::Constraint, msg);
      }
      insts.push_back(r.inst);
    }
    flows.push_back(make_flow(schema, id, std::move(insts)));
  }
  return flows;
}

std::vector<ContextFlow> load_flows(const ContextSchema& schema, const std::filesystem::path& path) {
  try {
    return parse_flows_csv(schema, read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string flows_to_csv(const ContextSchema& schema, const std::vector<ContextFlow>& flows) {
  std::string out = "flow_id,seq";
  for (const auto& n : schema.names()) out += "," + n;
  out += '\n';
  for (const auto& f : flows)
    for (std::size_t i = 0; i < f.size(); ++i) {
      out += f.id + "," + std::to_string(i);
      for (double v : f.instances[i].values) out += "," + format_number(v);
      out += '\n';
    }
  return out;
}

std::string profile_series_csv(const std::vector<double>& series) {
  std::string out = "seq,origin_distance\n";
  for (std::size_t i = 0; i < series.size(); ++i) out += std::to_string(i) + "," + format_number(series[i]) + "\n";
  return out;
}

std::string profile_json(const EarthquakeProfileReport& report) {
  ordered_json j;
  j["ep_count"] = report.ep_count;
  j["shape"] = to_string(report.shape);
  j["oscillation_satisfied"] = report.oscillation_satisfied;
  auto windows = ordered_json::array();
  for (const auto& w : report.windows)
    windows.push_back({{"start", w.start}, {"end", w.end}, {"direction", to_string(w.direction)}});
  j["windows"] = std::move(windows);
  j["origin_distance_series"] = report.origin_distance_series;
  return j.dump(2) + "\n";
}

EpConfig parse_ep_section(const json& section, EpConfig base) {
  object(section, "ep");
  reject_unknown(section, {"rho", "epsilon", "window_max"}, "ep");
  if (section.contains("rho")) base.violence_ratio = number(section["rho"], "ep.rho");
  if (section.contains("epsilon")) base.min_violent_distance = number(section["epsilon"], "ep.epsilon");
  if (section.contains("window_max")) base.window_max = count(section["window_max"], "ep.window_max");
  return base;
}

void apply_search_section(const json& s, SearchConfig& c) {
  object(s, "search");
  reject_unknown(s,
                 {"flow_length", "tabu_tenure", "mem_max_age", "stale_limit", "hard_limit", "local_iterations",
                  "neighborhood", "lambda_size", "seed", "weights"},
                 "search");
  auto size_key = [&](const char* k, std::size_t& dst) {
    if (s.contains(k)) dst = count(s[k], std::string("search.") + k);
  };
  size_key("flow_length", c.flow_length);
  size_key("tabu_tenure", c.tabu_tenure);
  size_key("mem_max_age", c.mem_max_age);
  size_key("stale_limit", c.stale_limit);
  size_key("hard_limit", c.hard_limit);
  size_key("local_iterations", c.local_iterations);
  size_key("neighborhood", c.neighborhood);
  if (s.contains("lambda_size")) c.lambda_size = number(s["lambda_size"], "search.lambda_size");
  if (s.contains("seed")) {
    if (!s["seed"].is_number_unsigned()) bad_key("search.seed", "expected a non-negative integer");
    c.seed = s["seed"].get<std::uint64_t>();
  }
  if (s.contains("weights")) {
    const auto& w = object(s["weights"], "search.weights");
    reject_unknown(w, {"w_cov_local", "w_ep", "w_re", "w_cov_global", "w_shape"}, "search.weights");
    auto weight = [&](const char* k, double& dst) {
      if (w.contains(k)) dst = number(w[k], std::string("search.weights.") + k);
    };
    weight("w_cov_local", c.local.w_cov);
    weight("w_ep", c.local.w_ep);
    weight("w_re", c.local.w_re);
    weight("w_cov_global", c.global.w_cov);
    weight("w_shape", c.global.w_shape);
  }
}

Variant parse_variant(const json& j) {
  object(j, "initial_variant");
  reject_unknown(j, {"cache_exists", "cache_size", "cache_validity_s", "data_servers"}, "initial_variant");
  Variant v;
  if (j.contains("cache_exists")) {
    if (!j["cache_exists"].is_boolean()) bad_key("initial_variant.cache_exists", "expected a boolean");
    v.cache_exists = j["cache_exists"].get<bool>();
  }
  auto integer = [&](const char* k, int& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_number_integer()) bad_key(std::string("initial_variant.") + k, "expected an integer");
    dst = j[k].get<int>();
  };
  integer("cache_size", v.cache_size);
  integer("cache_validity_s", v.cache_validity_s);
  integer("data_servers", v.data_servers);
  if (!v.valid()) bad_key("initial_variant", "not a valid variant");
  return v;
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = parse_json(json_text);
  object(doc, "config");
  reject_unknown(doc,
                 {"schema", "policy", "search", "ep", "coverage_samples", "mutation_plan", "suite_size",
                  "initial_variant"},
                 "config");
  RunConfig rc;
  auto path_key = [&](const char* k) -> std::optional<std::filesystem::path> {
    if (!doc.contains(k)) return std::nullopt;
    if (!doc[k].is_string()) bad_key(k, "expected a path string");
    std::filesystem::path p = doc[k].get<std::string>();
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  rc.schema_path = path_key("schema");
  rc.policy_path = path_key("policy");
  if (doc.contains("search")) apply_search_section(doc["search"], rc.search);
  if (doc.contains("ep")) rc.ep = parse_ep_section(doc["ep"]);
  if (doc.contains("coverage_samples")) rc.coverage_samples = parse_samples(doc["coverage_samples"]);
  if (doc.contains("mutation_plan")) {
    const auto& mp = doc["mutation_plan"];
    if (mp.is_string()) {
      std::filesystem::path p = mp.get<std::string>();
      if (!p.is_absolute() && !base_dir.empty()) p = base_dir / p;
      rc.mutation_plan = parse_json(read_text_file(p));
    } else {
      rc.mutation_plan = mp;
    }
  }
  if (doc.contains("suite_size")) rc.suite_size = count(doc["suite_size"], "suite_size");
  if (doc.contains("initial_variant")) rc.initial_variant = parse_variant(doc["initial_variant"]);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(read_text_file(path), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

std::size_t property_ref(const json& j, const ContextSchema& schema, const std::string& where) {
  if (j.is_string()) {
    auto idx = schema.index_of(j.get<std::string>());
    if (!idx) bad_key(where, "unknown property '" + j.get<std::string>() + "'");
    return *idx;
  }
  return count(j, where);
}

Adjective adjective_ref(const json& j, const std::string& where) {
  if (!j.is_string()) bad_key(where, "expected low, medium or high");
  std::string s = j.get<std::string>();
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "low") return Adjective::Low;
  if (s == "medium") return Adjective::Medium;
  if (s == "high") return Adjective::High;
  bad_key(where, "expected low, medium or high");
}

// Rules are numbered from 1 in plan files, as in the policy source.
RuleSlot slot_ref(const json& j, const std::string& where) {
  object(j, where);
  RuleSlot s;
  const std::size_t rule = count(j.value("rule", json(0)), where + ".rule");
  if (rule == 0) bad_key(where + ".rule", "rules are numbered from 1");
  s.rule = rule - 1;
  const std::string part = j.value("part", std::string("then"));
  if (part == "then") s.then_slot = true;
  else if (part == "when") s.then_slot = false;
  else bad_key(where + ".part", "expected 'when' or 'then'");
  if (j.contains("index")) s.index = count(j["index"], where + ".index");
  return s;
}

MutantSpec explicit_mutant(const json& j, const ContextSchema& schema, std::size_t n) {
  const std::string where = "mutants[" + std::to_string(n) + "]";
  object(j, where);
  MutantSpec m;
  m.id = j.value("id", "X_" + std::to_string(n + 1));
  m.description = j.value("description", std::string());
  const std::string kind = j.value("kind", std::string());
  if (kind == "identity") {
    m.group = FaultGroup::Identity;
  } else if (kind == "swap_values" || kind == "scale_value") {
    m.group = FaultGroup::F1;
    InstanceRewrite r;
    if (kind == "swap_values") {
      r.kind = InstanceRewrite::Kind::Swap;
      r.prop_a = property_ref(j.value("a", json()), schema, where + ".a");
      r.prop_b = property_ref(j.value("b", json()), schema, where + ".b");
    } else {
      r.kind = InstanceRewrite::Kind::Scale;
      r.prop_a = property_ref(j.value("property", json()), schema, where + ".property");
      r.factor = number(j.value("factor", json()), where + ".factor");
    }
    m.transform = r;
  } else if (kind == "adjective_map") {
    m.group = FaultGroup::F2;
    AdjectiveMap a;
    a.property = property_ref(j.value("property", json()), schema, where + ".property");
    const json map = j.value("map", json());
    if (!map.is_array() || map.size() != 3) bad_key(where + ".map", "expected three adjectives");
    for (std::size_t i = 0; i < 3; ++i) a.map[i] = adjective_ref(map[i], where + ".map");
    m.transform = a;
  } else if (kind == "replace_slot") {
    m.group = FaultGroup::F3;
    m.transform = SlotReplacement{slot_ref(j.value("slot", json()), where + ".slot"),
                                  adjective_ref(j.value("adjective", json()), where + ".adjective")};
  } else if (kind == "swap_slots") {
    m.group = FaultGroup::F4;
    m.transform = SlotSwap{slot_ref(j.value("a", json()), where + ".a"), slot_ref(j.value("b", json()), where + ".b")};
  } else {
    bad_key(where + ".kind",
            "expected identity, swap_values, scale_value, adjective_map, replace_slot or swap_slots");
  }
  if (j.contains("group")) m.group = fault_group_from_string(j["group"].get<std::string>());
  return m;
}

}  // namespace

MutantPlan parse_mutant_plan(const json& doc, const ContextSchema& schema) {
  MutantPlan plan;
  const json* mutants = nullptr;
  if (doc.is_array()) {
    mutants = &doc;
  } else {
    object(doc, "mutation_plan");
    reject_unknown(doc, {"F1", "F2", "F3", "F4", "identity", "mutants"}, "mutation_plan");
    for (auto g : {FaultGroup::F1, FaultGroup::F2, FaultGroup::F3, FaultGroup::F4}) {
      const char* k = to_string(g);
      if (!doc.contains(k)) continue;
      const auto& v = doc[k];
      if (v.is_string() && v.get<std::string>() == "all") plan.counts[g] = std::nullopt;
      else plan.counts[g] = count(v, std::string("mutation_plan.") + k);
    }
    if (doc.contains("identity")) {
      if (!doc["identity"].is_boolean()) bad_key("mutation_plan.identity", "expected a boolean");
      plan.include_identity = doc["identity"].get<bool>();
    }
    if (doc.contains("mutants")) mutants = &doc["mutants"];
  }
  if (mutants) {
    if (!mutants->is_array()) bad_key("mutation_plan.mutants", "expected an array");
    for (std::size_t i = 0; i < mutants->size(); ++i)
      plan.explicit_mutants.push_back(explicit_mutant((*mutants)[i], schema, i));
  }
  return plan;
}

ordered_json search_config_to_json(const SearchConfig& c) {
  ordered_json j;
  j["flow_length"] = c.flow_length;
  j["tabu_tenure"] = c.tabu_tenure;
  j["mem_max_age"] = c.mem_max_age;
  j["stale_limit"] = c.stale_limit;
  j["hard_limit"] = c.hard_limit;
  j["local_iterations"] = c.local_iterations;
  j["neighborhood"] = c.neighborhood;
  j["lambda_size"] = c.lambda_size;
  j["seed"] = c.seed;
  j["aspiration"] = c.aspiration;
  j["weights"] = {{"w_cov_local", c.local.w_cov},
                  {"w_ep", c.local.w_ep},
                  {"w_re", c.local.w_re},
                  {"w_cov_global", c.global.w_cov},
                  {"w_shape", c.global.w_shape}};
  j["ep"] = {{"rho", c.ep.violence_ratio}, {"epsilon", c.ep.min_violent_distance}, {"window_max", c.ep.window_max}};
  return j;
}

ordered_json search_result_to_json(const SearchResult& r) {
  ordered_json j;
  j["g_value"] = r.g_value;
  j["iterations_used"] = r.iterations_used;
  j["tabu_tenure"] = r.tabu_tenure;
  j["acceptance_g"] = r.acceptance_g;
  auto flows = ordered_json::array();
  for (std::size_t i = 0; i < r.solution.size(); ++i) {
    const auto& s = r.per_flow[i];
    flows.push_back({{"id", r.solution[i].id},
                     {"l_value", s.l_value},
                     {"ep_count", s.ep_count},
                     {"shape", to_string(s.shape)},
                     {"pairs_covered", s.pairs_covered}});
  }
  j["per_flow"] = std::move(flows);
  return j;
}

ordered_json variant_to_json(const Variant& v) {
  return {{"cache_exists", v.cache_exists},
          {"cache_size", v.cache_size},
          {"cache_validity_s", v.cache_validity_s},
          {"data_servers", v.data_servers}};
}

std::string search_trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const auto& e : trace) {
    ordered_json j;
    j["iter"] = e.iter;
    j["action"] = to_string(e.action);
    j["flow"] = e.flow;
    j["age"] = e.age;
    j["g_before"] = e.g_before;
    j["g_after"] = e.g_after;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace aeq
