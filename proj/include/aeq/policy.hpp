#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeq/context.hpp"

namespace aeq {

enum class Adjective { Low = 0, Medium = 1, High = 2 };
enum class Action { AddCache, RemoveCache, AddServer, RemoveServer, GrowCache, ShrinkCache };
enum class Guard { CachePresent, CacheAbsent, ServersAtMax, ServersAtMin };

const char* to_string(Adjective a);
const char* to_string(Action a);
const char* to_string(Guard g);

/// A system configuration of the adaptive web server.
struct Variant {
  bool cache_exists = false;
  int cache_size = 0;        // 0, or 10..1024 when a cache exists
  int cache_validity_s = 0;  // 0, or >= 1 when a cache exists
  int data_servers = 1;      // 1..100

  static constexpr int kMinCache = 10;
  static constexpr int kMaxCache = 1024;
  static constexpr int kMinServers = 1;
  static constexpr int kMaxServers = 100;

  /// The cache fields agree with cache_exists and servers are in range.
  bool valid() const;

  friend bool operator==(const Variant&, const Variant&) = default;
};

/// Triangular membership with breakpoints over a normalized [0, 1] axis.
/// left == peak (or peak == right) gives a shoulder with degree 1 at the peak.
struct Triangle {
  double left = 0.0;
  double peak = 0.0;
  double right = 0.0;

  double operator()(double x) const;
};

/// Low/medium/high memberships for every property, plus each property's raw
/// domain so values can be normalized before evaluation.
struct FuzzySets {
  struct Property {
    double lower = 0.0;
    double upper = 1.0;
    std::array<Triangle, 3> terms;  // indexed by Adjective
  };
  std::vector<Property> properties;

  /// low = (0, 0, 0.5), medium = (0.25, 0.5, 0.75), high = (0.5, 1, 1).
  static FuzzySets defaults(const ContextSchema& schema);

  /// Throws Error(Config) when peaks are not ordered low < medium < high or
  /// some point of [0, 1] has no nonzero membership.
  void check() const;
};

struct FuzzyValue {
  Adjective adjective = Adjective::Low;
  double degree = 0.0;

  friend bool operator==(const FuzzyValue&, const FuzzyValue&) = default;
};

using Fuzzified = std::vector<FuzzyValue>;

/// Argmax adjective per property; ties (degrees within 1e-9) go to the adjective
/// with the lower peak.
/// Normalized values are clamped into [0, 1].
Fuzzified fuzzify(const FuzzySets& sets, const ContextInstance& inst);

struct Rule {
  std::size_t when_property = 0;
  std::string property_label;  // spelling used in the source
  std::vector<Adjective> when_adjectives;
  std::optional<Guard> guard;
  Action action = Action::AddCache;
  Adjective utility = Adjective::Low;
  int line = 0;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct AdaptationPolicy {
  std::vector<Rule> rules;
  double utility_threshold = 0.5;
  std::array<double, 3> utility_values{0.25, 0.5, 0.75};  // indexed by Adjective
  int default_cache_size = 128;
  int default_cache_validity_s = 5;

  friend bool operator==(const AdaptationPolicy&, const AdaptationPolicy&) = default;
};

/// Parses the rule language:
///
///   rule := WHEN IDENT IS ADJ (OR ADJ)* [IF GUARD] THEN UTILITY OF ACTION IS ADJ
///
/// Keywords are case-insensitive, adjectives are single-quoted, `#` starts a
/// comment. Header directives: THRESHOLD x, DEFAULT CACHESIZE n,
/// DEFAULT CACHEVALIDITY n. Property names match schema names ignoring case
/// and underscores. Guards: CACHE_PRESENT, CACHE_ABSENT (alias
/// CACHEHANDLER.ISEMPTY), SERVERS_AT_MAX, SERVERS_AT_MIN.
AdaptationPolicy parse_policy(std::string_view text, const ContextSchema& schema);

/// Canonical source text; parse_policy(format_policy(p)) == p up to line numbers.
std::string format_policy(const AdaptationPolicy& policy);

/// Mutation seams: the instance before fuzzification and the adjectives after.
struct Instrumentation {
  std::function<ContextInstance(const ContextInstance&)> rewrite_instance;
  std::function<void(Fuzzified&)> rewrite_adjectives;
};

struct StepResult {
  Variant state;
  std::vector<Action> fired;
};

/// Applies every rule in source order; a rule fires when enabled and
/// utility_value(adjective) * degree reaches the threshold. Actions clamp at
/// their bounds instead of failing.
StepResult step(const AdaptationPolicy& policy, const FuzzySets& sets, const Variant& state,
                const ContextInstance& inst, const Instrumentation* hooks = nullptr);

Variant apply_action(const AdaptationPolicy& policy, const Variant& state, Action action);

struct TraceEntry {
  std::size_t step = 0;  // 1-based: the first injected instance is step 1
  ContextInstance instance;  // as injected, before any instrumentation
  Variant variant;           // after adaptation
  std::vector<Action> actions;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

using VariantFlow = std::vector<TraceEntry>;

VariantFlow run(const AdaptationPolicy& policy, const FuzzySets& sets, const Variant& initial,
                const ContextFlow& flow, const Instrumentation* hooks = nullptr);

struct TraceComparison {
  bool equal = true;
  std::optional<std::size_t> first_divergence;  // 1-based step number
};

/// Compares post-adaptation variants step by step; fired actions are ignored.
TraceComparison trace_equal(const VariantFlow& a, const VariantFlow& b);

/// One JSON object per line: {step, instance, variant, actions}.
std::string trace_to_jsonl(const VariantFlow& trace);

}  // namespace aeq
