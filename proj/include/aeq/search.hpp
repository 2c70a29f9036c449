#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "aeq/context.hpp"
#include "aeq/coverage.hpp"
#include "aeq/metric.hpp"
#include "aeq/rng.hpp"

namespace aeq {

/// Weights of the per-flow objective. Must be >= 0 and sum to 1.
struct LocalObjectiveWeights {
  double w_cov = 0.4;
  double w_ep = 0.6;
  double w_re = 0.0;

  void check() const;
};

/// Weights of the suite objective. Must be >= 0 and sum to 1.
struct GlobalObjectiveWeights {
  double w_cov = 0.5;
  double w_shape = 0.5;

  void check() const;
};

/// Reference probability mass per property over its full grid.
struct RealityDistribution {
  std::vector<std::vector<double>> mass;
};

struct SearchConfig {
  std::size_t flow_length = 60;
  std::size_t tabu_tenure = 0;  // 0 resolves to flow_length / 2
  std::size_t mem_max_age = 10;
  std::size_t stale_limit = 100;
  std::size_t hard_limit = 1000;
  std::size_t local_iterations = 500;
  std::size_t neighborhood = 20;
  std::size_t max_memory_overlap = 3;  // instances a flow may share with T
  double lambda_size = 0.01;
  bool aspiration = true;
  std::uint64_t seed = 42;
  EpConfig ep;
  ShapeConfig shape;
  LocalObjectiveWeights local;
  GlobalObjectiveWeights global;
  std::optional<RealityDistribution> reality;

  /// Copy with defaults filled in (tabu_tenure).
  SearchConfig resolved() const;

  /// Throws Error(Config) when an invariant fails.
  void check(const ContextSchema& schema) const;
};

/// Search memory T: pairs already covered by the suite and the instances it
/// already contains.
struct SearchMemory {
  CoverageUniverse universe;
  std::unordered_set<std::uint64_t> instances;
};

struct TabuStep {
  std::size_t iteration = 0;
  std::uint64_t move = 0;
  bool aspiration = false;
  double objective = 0.0;
};

struct FlowSummary {
  double l_value = 0.0;
  std::size_t ep_count = 0;
  ShapeClass shape = ShapeClass::Unclassified;
  std::size_t pairs_covered = 0;
};

struct TraceEvent {
  enum class Action { Promote, Shelve, Evict, AcceptNew };
  std::size_t iter = 0;
  Action action = Action::Shelve;
  std::size_t flow = 0;  // serial of the flow the event concerns
  std::size_t age = 0;   // MEM age at the time of the event
  double g_before = 0.0;
  double g_after = 0.0;
};

const char* to_string(TraceEvent::Action a);

struct SearchResult {
  std::vector<ContextFlow> solution;
  double g_value = 0.0;
  std::vector<FlowSummary> per_flow;
  std::size_t iterations_used = 0;
  std::size_t tabu_tenure = 0;
  std::vector<double> acceptance_g;  // G after each addition to SOL
  std::vector<TraceEvent> trace;
};

double reality_score(const ContextSchema& schema, const ContextFlow& flow, const RealityDistribution& dist);

/// L(f) with every term normalized to [0, 1]; coverage counts only pairs not
/// yet covered in `universe_view`.
double local_objective(const ContextSchema& schema, const ContextFlow& flow, const CoverageUniverse& universe_view,
                       const LocalObjectiveWeights& weights, const EpConfig& ep,
                       const RealityDistribution* distribution = nullptr);

/// G(sf) = w_cov * C_G/|pairs| + w_shape * S/3 - lambda * |sf|.
double global_objective(const ContextSchema& schema, const std::vector<ContextFlow>& solution,
                        const CoverageUniverse& universe, const GlobalObjectiveWeights& weights, const EpConfig& ep,
                        double lambda_size, const ShapeConfig& shape = {});

/// Distinct shape classes (excluding unclassified) among `solution`.
std::size_t distinct_shapes(const ContextSchema& schema, const std::vector<ContextFlow>& solution,
                            const ShapeConfig& shape = {});

/// L of each flow against the pairs covered by the flows before it.
std::vector<double> prefix_local_objectives(const ContextSchema& schema, const std::vector<ContextFlow>& solution,
                                            const CoverageUniverse& universe, const SearchConfig& cfg);

/// Generates one flow by tabu search on L, steering away from `memory`.
/// Throws Error(Constraint) when no valid instance exists.
ContextFlow tabu_local_search(const ContextSchema& schema, const SearchMemory& memory, const SearchConfig& cfg,
                              Rng& rng, std::vector<TabuStep>* trace = nullptr);

/// Memory-based global search assembling a suite of flows.
SearchResult global_search(const ContextSchema& schema, const CoverageUniverse& universe, const SearchConfig& cfg);

/// One global-search run per round (seeds derived from cfg.seed) until at
/// least `count` flows are collected; count 0 means a single round.
std::vector<SearchResult> generate_suite(const ContextSchema& schema, const CoverageUniverse& universe,
                                         const SearchConfig& cfg, std::size_t count);

/// Instances a flow shares with the memory.
std::size_t memory_overlap(const ContextSchema& schema, const ContextFlow& flow,
                           const std::unordered_set<std::uint64_t>& instances);

}  // namespace aeq
