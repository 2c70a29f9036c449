#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aeq/context.hpp"

namespace aeq {

/// Thresholds for "violent" variation between inter-instance distances.
struct EpConfig {
  double violence_ratio = 4.0;       // rho > 1
  double min_violent_distance = 0.25;  // epsilon, normalized distance units
  std::size_t window_max = 8;        // longest window, in transitions

  /// Throws Error(Config) unless rho > 1, 0 < epsilon <= max_distance and
  /// window_max >= 2.
  void check(double max_distance) const;
};

enum class ShapeClass { Ramp, PlateauOscillation, CrescendoPeak, Unclassified };

const char* to_string(ShapeClass s);
ShapeClass shape_from_string(const std::string& s);

struct ShapeConfig {
  double peak_prominence = 0.5;  // (max - mean) / range
  double peak_start = 0.25;      // peak position strictly inside (peak_start, 1) of the index range
  double ramp_slope = 0.01;      // |least-squares slope| per step
};

enum class Direction { Escalating, Collapsing };

const char* to_string(Direction d);

/// Instances start..end (inclusive); covers transitions start..end-1.
struct EpWindow {
  std::size_t start = 0;
  std::size_t end = 0;
  Direction direction = Direction::Escalating;

  std::size_t transitions() const noexcept { return end - start; }
  friend bool operator==(const EpWindow&, const EpWindow&) = default;
};

struct EarthquakeProfileReport {
  std::vector<EpWindow> windows;
  double ep_count = 0.0;
  bool oscillation_satisfied = false;
  std::vector<double> origin_distance_series;
  ShapeClass shape = ShapeClass::Unclassified;
};

/// Origin resolved into normalized coordinates.
std::vector<double> resolve_origin(const ContextSchema& schema);

/// Euclidean distance over min-max normalized coordinates.
double distance(const ContextSchema& schema, const ContextInstance& a, const ContextInstance& b);

/// Largest possible distance in the schema: sqrt(number of non-degenerate properties).
double max_distance(const ContextSchema& schema);

std::vector<double> origin_distance_series(const ContextSchema& schema, const ContextFlow& flow);

/// D(I_t, I_t+1) for t = 0..n-2.
std::vector<double> transition_distances(const ContextSchema& schema, const ContextFlow& flow);

/// Maximum set of transition-disjoint violent windows, chosen by a single
/// left-to-right scan that closes a window at the earliest possible end.
/// Each reported window is the longest one ending there.
std::vector<EpWindow> scan_ep_windows(const std::vector<double>& transitions, const EpConfig& cfg);

/// The non-strict local-extremum condition at every interior point.
bool oscillation_holds(const std::vector<double>& series);

ShapeClass classify_shape(const std::vector<double>& series, const ShapeConfig& cfg = {});

EarthquakeProfileReport detect_ep(const ContextSchema& schema, const ContextFlow& flow, const EpConfig& cfg,
                                  const ShapeConfig& shape_cfg = {});

/// Number of EP windows, as a real value.
double ep_score(const ContextSchema& schema, const ContextFlow& flow, const EpConfig& cfg);

/// Upper bound on transition-disjoint windows: floor((flow_length - 1) / 2).
std::size_t max_windows(std::size_t flow_length);

}  // namespace aeq
