#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aeq/context.hpp"
#include "aeq/policy.hpp"

namespace aeq {

enum class FaultGroup { F1, F2, F3, F4, Identity };

const char* to_string(FaultGroup g);
FaultGroup fault_group_from_string(const std::string& s);

/// Sensor fault: the instance is rewritten before fuzzification.
struct InstanceRewrite {
  enum class Kind { Swap, Scale } kind = Kind::Swap;
  std::size_t prop_a = 0;
  std::size_t prop_b = 0;  // Swap only
  double factor = 1.0;     // Scale only
};

/// Fuzzy-engine fault: adjectives of one property are substituted.
struct AdjectiveMap {
  std::size_t property = 0;
  std::array<Adjective, 3> map{Adjective::Low, Adjective::Medium, Adjective::High};
};

/// One adjective occurrence in a rule: a WHEN alternative or the THEN utility.
struct RuleSlot {
  std::size_t rule = 0;
  bool then_slot = false;
  std::size_t index = 0;  // position in when_adjectives (WHEN slots)

  friend bool operator==(const RuleSlot&, const RuleSlot&) = default;
};

struct SlotReplacement {
  RuleSlot slot;
  Adjective replacement = Adjective::Low;
};

struct SlotSwap {
  RuleSlot a;
  RuleSlot b;
};

using MutantTransform = std::variant<std::monostate, InstanceRewrite, AdjectiveMap, SlotReplacement, SlotSwap>;

struct MutantSpec {
  std::string id;
  FaultGroup group = FaultGroup::Identity;
  std::string description;
  MutantTransform transform;
};

/// Requested mutants per group; nullopt = every enumerable mutant.
struct MutantPlan {
  std::map<FaultGroup, std::optional<std::size_t>> counts;
  bool include_identity = false;
  std::vector<MutantSpec> explicit_mutants;

  /// The default desk-scale plan: F1 3, F2 14, F3 14, F4 14.
  static MutantPlan desk_scale();
};

/// Every enumerable mutant of one group, in deterministic order.
std::vector<MutantSpec> enumerate_mutants(const AdaptationPolicy& policy, const ContextSchema& schema, FaultGroup group);

/// Mutants per plan: the first n of each group's enumeration. Throws
/// Error(Config) naming the maximum when a group cannot supply n.
std::vector<MutantSpec> generate_mutants(const AdaptationPolicy& policy, const ContextSchema& schema,
                                         const MutantPlan& plan);

/// Throws Error(Config) when the transform references missing properties,
/// rules or slots.
void check_mutant(const MutantSpec& m, const AdaptationPolicy& policy, const ContextSchema& schema);

/// The mutated realization: an edited policy plus instrumentation hooks.
struct MutantProgram {
  AdaptationPolicy policy;
  Instrumentation hooks;
};

MutantProgram realize(const MutantSpec& m, const AdaptationPolicy& policy);

struct KillCell {
  bool killed = false;
  std::optional<std::size_t> divergence_step;
  std::optional<std::string> error;
};

struct KillMatrix {
  std::vector<std::string> mutant_ids;
  std::vector<FaultGroup> groups;
  std::vector<std::string> descriptions;  // optional, parallel to mutant_ids
  std::vector<std::string> aeq_ids;
  std::vector<std::vector<KillCell>> cells;  // [mutant][aeq]

  std::size_t kills(std::size_t mutant) const;
  double kill_fraction(std::size_t mutant) const;
  bool possibly_equivalent(std::size_t mutant) const { return kills(mutant) == 0; }
};

struct NamedSuite {
  std::string name;
  std::vector<ContextFlow> flows;
};

/// Runs original and every mutant over every AEQ from `initial`; a cell is
/// killed when the traces differ. Cells run on `jobs` threads; the result is
/// independent of the thread count.
KillMatrix run_experiment(const ContextSchema& schema, const AdaptationPolicy& policy, const FuzzySets& sets,
                          const std::vector<MutantSpec>& mutants, const std::vector<NamedSuite>& suites,
                          const Variant& initial, std::size_t jobs = 1);

struct GroupStats {
  std::size_t mutants = 0;
  std::size_t killed_by_any = 0;
  std::size_t killed_by_all = 0;
  std::size_t killed_by_over_60 = 0;
  double mean_kill_fraction = 0.0;
};

struct KillReport {
  std::size_t mutants = 0;
  std::size_t aeqs = 0;
  double raw_kill_score = 0.0;       // mutants killed by at least one AEQ
  double killed_by_all = 0.0;        // fraction of mutants killed by every AEQ
  double killed_by_over_60 = 0.0;    // fraction killed by more than 60% of AEQs
  double non_equivalent_kill = 0.0;  // union kill fraction over non-possibly-equivalent mutants
  std::map<FaultGroup, GroupStats> per_group;
  std::vector<std::string> possibly_equivalent;
  std::vector<std::size_t> failed_cells;  // per mutant: cells with an error
};

KillReport report(const KillMatrix& matrix);

std::string report_text(const KillMatrix& matrix, const KillReport& r);
std::string report_csv(const KillMatrix& matrix);
std::string report_json(const KillReport& r);

/// mutant_id,group,aeq_id,killed,divergence_step
std::string matrix_to_csv(const KillMatrix& matrix);
KillMatrix matrix_from_csv(const std::string& text);

std::string describe(const MutantSpec& m, const AdaptationPolicy& policy, const ContextSchema& schema);

}  // namespace aeq
