#include "aeq/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aeq/error.hpp"

namespace aeq {

void EpConfig::check(double max_dist) const {
  if (!(violence_ratio > 1.0)) throw Error(ErrorCategory::Config, "ep.rho must be > 1");
  if (!(min_violent_distance > 0.0) || min_violent_distance > max_dist + 1e-12)
    throw Error(ErrorCategory::Config, "ep.epsilon must lie in (0, max distance]");
  if (window_max < 2) throw Error(ErrorCategory::Config, "ep.window_max must be >= 2");
}

const char* to_string(ShapeClass s) {
  switch (s) {
    case ShapeClass::Ramp: return "ramp";
    case ShapeClass::PlateauOscillation: return "plateau_oscillation";
    case ShapeClass::CrescendoPeak: return "crescendo_peak";
    case ShapeClass::Unclassified: return "unclassified";
  }
  return "unclassified";
}

ShapeClass shape_from_string(const std::string& s) {
  if (s == "ramp") return ShapeClass::Ramp;
  if (s == "plateau_oscillation") return ShapeClass::PlateauOscillation;
  if (s == "crescendo_peak") return ShapeClass::CrescendoPeak;
  if (s == "unclassified") return ShapeClass::Unclassified;
  throw ParseError("unknown shape class '" + s + "'");
}

const char* to_string(Direction d) { return d == Direction::Escalating ? "escalating" : "collapsing"; }

std::vector<double> resolve_origin(const ContextSchema& schema) {
  const auto& props = schema.properties();
  std::vector<double> origin(props.size(), 0.0);
  const auto& spec = schema.origin();
  for (std::size_t i = 0; i < props.size(); ++i) {
    switch (spec.mode) {
      case OriginSpec::Mode::LowerCorner: origin[i] = 0.0; break;
      case OriginSpec::Mode::Midpoint: origin[i] = 0.5; break;
      case OriginSpec::Mode::Explicit: origin[i] = props[i].normalize(spec.explicit_values[i]); break;
    }
  }
  return origin;
}

namespace {

void check_arity(const ContextSchema& schema, const ContextInstance& x) {
  if (x.values.size() != schema.arity())
    throw Error(ErrorCategory::Structural, "instance arity " + std::to_string(x.values.size()) +
                                               " does not match schema arity " + std::to_string(schema.arity()));
}

double least_squares_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  const double mx = (n - 1.0) / 2.0;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (y[i] - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

double distance(const ContextSchema& schema, const ContextInstance& a, const ContextInstance& b) {
  check_arity(schema, a);
  check_arity(schema, b);
  const auto& props = schema.properties();
  double sum = 0.0;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const double d = props[i].normalize(a.values[i]) - props[i].normalize(b.values[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double max_distance(const ContextSchema& schema) {
  std::size_t n = 0;
  for (const auto& p : schema.properties()) n += p.upper > p.lower ? 1 : 0;
  return std::sqrt(static_cast<double>(n));
}

std::vector<double> origin_distance_series(const ContextSchema& schema, const ContextFlow& flow) {
  const auto origin = resolve_origin(schema);
  const auto& props = schema.properties();
  std::vector<double> out;
  out.reserve(flow.size());
  for (const auto& inst : flow.instances) {
    check_arity(schema, inst);
    double sum = 0.0;
    for (std::size_t i = 0; i < props.size(); ++i) {
      const double d = props[i].normalize(inst.values[i]) - origin[i];
      sum += d * d;
    }
    out.push_back(std::sqrt(sum));
  }
  return out;
}

std::vector<double> transition_distances(const ContextSchema& schema, const ContextFlow& flow) {
  std::vector<double> out;
  if (flow.size() < 2) return out;
  out.reserve(flow.size() - 1);
  for (std::size_t t = 0; t + 1 < flow.size(); ++t)
    out.push_back(distance(schema, flow.instances[t], flow.instances[t + 1]));
  return out;
}

std::vector<EpWindow> scan_ep_windows(const std::vector<double>& d, const EpConfig& cfg) {
  std::vector<EpWindow> windows;
  const double rho = cfg.violence_ratio;
  const double eps = cfg.min_violent_distance;
  std::size_t boundary = 0;  // first transition still free
  for (std::size_t last = 1; last < d.size(); ++last) {
    // Candidate first transitions: at least one transition before `last`,
    // window no longer than window_max, not overlapping the previous window.
    const std::size_t lo = std::max(boundary, last + 1 > cfg.window_max ? last + 1 - cfg.window_max : 0);
    for (std::size_t first = lo; first < last; ++first) {
      const bool up = d[last] >= rho * d[first] && d[last] >= eps;
      const bool down = d[first] >= rho * d[last] && d[first] >= eps;
      if (up || down) {
        windows.push_back({first, last + 1, up ? Direction::Escalating : Direction::Collapsing});
        boundary = last + 1;
        break;
      }
    }
  }
  return windows;
}

bool oscillation_holds(const std::vector<double>& s) {
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    const bool valley = s[i] >= s[i + 1] && s[i + 1] <= s[i + 2];
    const bool peak = s[i] <= s[i + 1] && s[i + 1] >= s[i + 2];
    if (!valley && !peak) return false;
  }
  return true;
}

ShapeClass classify_shape(const std::vector<double>& s, const ShapeConfig& cfg) {
  if (s.size() < 3) throw Error(ErrorCategory::Precondition, "shape classification needs at least 3 points");
  // minmax_element reports the last maximum; argmax means the first one.
  const auto mn = std::min_element(s.begin(), s.end());
  const auto mx = std::max_element(s.begin(), s.end());
  const double range = *mx - *mn;
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  const double prominence = range > 0.0 ? (*mx - mean) / range : 0.0;
  const auto peak = static_cast<std::size_t>(mx - s.begin());
  const double position = static_cast<double>(peak) / static_cast<double>(s.size() - 1);

  if (prominence >= cfg.peak_prominence && position > cfg.peak_start && position < 1.0) {
    // Pre-peak step sizes must not shrink on average; the mean of successive
    // differences telescopes to last - first.
    bool crescendo = true;
    if (peak >= 2) {
      const double first = std::fabs(s[1] - s[0]);
      const double last = std::fabs(s[peak] - s[peak - 1]);
      crescendo = last >= first;
    }
    if (crescendo) return ShapeClass::CrescendoPeak;
  }
  if (std::fabs(least_squares_slope(s)) >= cfg.ramp_slope) return ShapeClass::Ramp;
  return ShapeClass::PlateauOscillation;
}

EarthquakeProfileReport detect_ep(const ContextSchema& schema, const ContextFlow& flow, const EpConfig& cfg,
                                  const ShapeConfig& shape_cfg) {
  if (flow.size() < 3)
    throw Error(ErrorCategory::Precondition,
                "earthquake profile needs a flow of at least 3 instances, got " + std::to_string(flow.size()));
  EarthquakeProfileReport r;
  r.windows = scan_ep_windows(transition_distances(schema, flow), cfg);
  r.ep_count = static_cast<double>(r.windows.size());
  r.origin_distance_series = origin_distance_series(schema, flow);
  r.oscillation_satisfied = oscillation_holds(r.origin_distance_series);
  r.shape = classify_shape(r.origin_distance_series, shape_cfg);
  return r;
}

double ep_score(const ContextSchema& schema, const ContextFlow& flow, const EpConfig& cfg) {
  if (flow.size() < 3)
    throw Error(ErrorCategory::Precondition, "ep score needs a flow of at least 3 instances");
  return static_cast<double>(scan_ep_windows(transition_distances(schema, flow), cfg).size());
}

std::size_t max_windows(std::size_t flow_length) { return flow_length >= 1 ? (flow_length - 1) / 2 : 0; }

}  // namespace aeq
