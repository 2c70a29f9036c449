#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "aeq/constraint.hpp"

namespace aeq {

using BigCount = boost::multiprecision::cpp_int;

enum class PropertyKind { Integer, Real };

/// One bounded, discretized environmental property.
struct PropertySpec {
  std::string name;
  PropertyKind kind = PropertyKind::Integer;
  double lower = 0.0;
  double upper = 0.0;
  double step = 1.0;

  /// Number of grid points: floor((upper - lower) / step) + 1.
  std::int64_t cardinality() const;

  /// Grid value at `index`, rounded to the decimal precision of lower/step so
  /// values print and compare canonically (0.1 * 3 becomes 0.3).
  double value_at(std::int64_t index) const;

  /// Index of the grid point nearest `v`, clamped into range.
  std::int64_t nearest_index(double v) const;

  /// True when `v` lies in [lower, upper] and on the grid (tolerance 1e-9).
  bool on_grid(double v) const;

  /// Min-max normalization of `v` into [0, 1] (0 for a degenerate domain).
  double normalize(double v) const;
};

/// Reference point of the context space used for origin distances.
struct OriginSpec {
  enum class Mode { LowerCorner, Midpoint, Explicit };
  Mode mode = Mode::LowerCorner;
  std::vector<double> explicit_values;
};

/// A tuple of property values, one per schema property, in schema order.
struct ContextInstance {
  std::vector<double> values;

  friend bool operator==(const ContextInstance&, const ContextInstance&) = default;
};

struct ValidityResult {
  bool valid = true;
  std::vector<std::string> violations;

  explicit operator bool() const noexcept { return valid; }
};

/// Typed, bounded model of the environment: properties plus constraints.
/// Immutable after construction.
class ContextSchema {
 public:
  /// Throws Error(Config) when properties are empty, duplicated, or malformed,
  /// and ParseError when a constraint expression does not parse.
  ContextSchema(std::vector<PropertySpec> properties, const std::vector<std::string>& constraint_sources,
                OriginSpec origin = {});

  const std::vector<PropertySpec>& properties() const noexcept { return properties_; }
  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  const OriginSpec& origin() const noexcept { return origin_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::size_t arity() const noexcept { return properties_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Bounds, grid alignment and every constraint. Throws Error(Structural) on
  /// arity mismatch, which is not the same thing as an invalid instance.
  ValidityResult validate(const ContextInstance& inst) const;
  bool is_valid(const ContextInstance& inst) const;

  /// Stable integer key of an on-grid instance (mixed-radix grid index).
  std::uint64_t key(const ContextInstance& inst) const;

  /// Snaps each value to its nearest grid point within bounds.
  ContextInstance snap(const ContextInstance& inst) const;

 private:
  std::vector<PropertySpec> properties_;
  std::vector<std::string> names_;
  std::vector<Constraint> constraints_;
  OriginSpec origin_;
};

/// Time-ordered sequence of valid context instances.
struct ContextFlow {
  std::string id;
  std::vector<ContextInstance> instances;

  std::size_t size() const noexcept { return instances.size(); }
  friend bool operator==(const ContextFlow&, const ContextFlow&) = default;
};

/// Builds a flow, rejecting empty flows and any invalid instance with
/// Error(Constraint) (or Error(Structural) on arity mismatch).
ContextFlow make_flow(const ContextSchema& schema, std::string id, std::vector<ContextInstance> instances);

enum class SpaceMode { Unconstrained, Exact };

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Number of context instances. Exact mode enumerates the grid and counts the
/// constraint-satisfying points; it throws Error(Capacity) above `cap`.
BigCount context_space_size(const ContextSchema& schema, SpaceMode mode,
                            std::uint64_t cap = kDefaultEnumerationCap);

/// Number of ordered flows of `flow_length` instances: |space|^flow_length.
BigCount flow_space_size(const BigCount& space_size, std::uint64_t flow_length);
BigCount flow_space_size(const ContextSchema& schema, std::uint64_t flow_length);

/// Shipped web-server model: request_density 1..1000, file_number 1..1000,
/// request_dispersion 0..1 step 0.1, with file_number <= request_density.
ContextSchema web_server_schema();

}  // namespace aeq
