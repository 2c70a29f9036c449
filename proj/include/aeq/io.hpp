#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aeq/context.hpp"
#include "aeq/metric.hpp"
#include "aeq/mutation.hpp"
#include "aeq/policy.hpp"
#include "aeq/search.hpp"

namespace aeq {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// A schema file: the schema itself plus the optional `ep` and
/// `coverage_samples` keys.
struct SchemaDocument {
  ContextSchema schema;
  std::optional<EpConfig> ep;
  std::map<std::string, std::vector<double>> coverage_samples;
};

SchemaDocument parse_schema_document(std::string_view json_text);
SchemaDocument load_schema_document(const std::filesystem::path& path);

/// Flow CSV: `flow_id,seq,<property names>`. Rows are grouped by flow_id in
/// order of first appearance and sorted by seq. Every flow is validated.
std::vector<ContextFlow> parse_flows_csv(const ContextSchema& schema, std::string_view text);
std::vector<ContextFlow> load_flows(const ContextSchema& schema, const std::filesystem::path& path);
std::string flows_to_csv(const ContextSchema& schema, const std::vector<ContextFlow>& flows);

/// seq,origin_distance
std::string profile_series_csv(const std::vector<double>& series);
std::string profile_json(const EarthquakeProfileReport& report);

/// Everything one run needs. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  std::optional<std::filesystem::path> schema_path;
  std::optional<std::filesystem::path> policy_path;
  SearchConfig search;
  std::optional<EpConfig> ep;  // overrides the schema file's ep key
  std::map<std::string, std::vector<double>> coverage_samples;
  std::optional<nlohmann::json> mutation_plan;  // inline plan document
  std::size_t suite_size = 20;
  Variant initial_variant;
};

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Search parameters and weights parsed from a `search` object; keys not
/// present keep their values in `into`.
void apply_search_section(const nlohmann::json& section, SearchConfig& into);
EpConfig parse_ep_section(const nlohmann::json& section, EpConfig base = {});
Variant parse_variant(const nlohmann::json& j);

/// Plan document: {"F1": n | "all", ..., "identity": bool, "mutants": [...]}
/// or a bare array of explicit mutants.
MutantPlan parse_mutant_plan(const nlohmann::json& doc, const ContextSchema& schema);

nlohmann::ordered_json search_config_to_json(const SearchConfig& cfg);
nlohmann::ordered_json search_result_to_json(const SearchResult& r);
nlohmann::ordered_json variant_to_json(const Variant& v);

/// JSON lines {iter, action, g_before, g_after} for every trace event.
std::string search_trace_to_jsonl(const std::vector<TraceEvent>& trace);

}  // namespace aeq
