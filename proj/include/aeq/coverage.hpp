#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aeq/context.hpp"

namespace aeq {

/// A cross-property value pair with prop_a < prop_b.
struct ValuePair {
  std::size_t prop_a = 0;
  double val_a = 0.0;
  std::size_t prop_b = 0;
  double val_b = 0.0;

  friend bool operator==(const ValuePair&, const ValuePair&) = default;
};

/// Per-property sample values, in schema order. Empty vector = full grid.
using ValueSamples = std::vector<std::vector<double>>;

/// The constraint-feasible pairwise universe with covered bookkeeping.
class CoverageUniverse {
 public:
  const std::string& criterion_id() const noexcept { return criterion_id_; }
  const std::vector<ValuePair>& pairs() const noexcept { return pairs_; }
  const std::vector<std::vector<double>>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  bool is_covered(std::size_t pair_id) const { return covered_[pair_id] != 0; }
  std::size_t covered_count() const noexcept { return covered_total_; }
  std::size_t uncovered_count() const noexcept { return pairs_.size() - covered_total_; }

  /// Appends to `out` the ids of the universe pairs `inst` realizes, in
  /// ascending property-pair order.
  void pairs_of(const ContextInstance& inst, std::vector<std::uint32_t>& out) const;

  /// Sample index of `v` for property `prop`, or -1 when not a sample value.
  int sample_index(std::size_t prop, double v) const;

  friend CoverageUniverse build_pairwise_universe(const ContextSchema&, const std::optional<ValueSamples>&,
                                                  std::uint64_t);
  friend CoverageUniverse mark_covered(const CoverageUniverse&, const std::vector<ContextFlow>&);

  /// Copy with the given pair ids additionally marked covered.
  CoverageUniverse with_covered(const std::vector<std::uint32_t>& pair_ids) const;

  /// Copy with nothing covered.
  CoverageUniverse cleared() const;

 private:
  struct Block {
    std::size_t a = 0, b = 0;
    std::vector<std::int32_t> ids;  // sa * sb, -1 when infeasible
  };

  std::string criterion_id_ = "pairwise";
  std::vector<std::vector<double>> samples_;
  std::vector<ValuePair> pairs_;
  std::vector<Block> blocks_;
  std::vector<std::uint8_t> covered_;
  std::size_t covered_total_ = 0;
};

/// Enumerates every cross-property sample pair that some valid full instance
/// realizes. Feasibility is decided by exhaustive extension over the other
/// properties' samples. Throws Error(Capacity) when the sample grid exceeds
/// `cap` points, and Error(Config) for samples off the property grid.
CoverageUniverse build_pairwise_universe(const ContextSchema& schema,
                                         const std::optional<ValueSamples>& value_samples = std::nullopt,
                                         std::uint64_t cap = kDefaultEnumerationCap);

/// Samples from a name -> values map; properties not named use the full grid.
ValueSamples samples_from_map(const ContextSchema& schema, const std::map<std::string, std::vector<double>>& m);

/// C_L: universe pairs realized by at least one instance of `flow`.
std::size_t coverage_local(const CoverageUniverse& universe, const ContextFlow& flow);

/// C_L restricted to pairs not yet marked covered.
std::size_t coverage_local_uncovered(const CoverageUniverse& universe, const ContextFlow& flow);

/// C_G: pairs realized by the union of all instances across `flows`.
std::size_t coverage_global(const CoverageUniverse& universe, const std::vector<ContextFlow>& flows);

/// covered <- covered U pairs realized by `flows`. Idempotent.
CoverageUniverse mark_covered(const CoverageUniverse& universe, const std::vector<ContextFlow>& flows);

/// CSV rows: prop_a,val_a,prop_b,val_b,covered
std::string universe_to_csv(const ContextSchema& schema, const CoverageUniverse& universe);

}  // namespace aeq
