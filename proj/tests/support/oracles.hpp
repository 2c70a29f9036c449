#pragma once

// Brute-force reference implementations used only by tests. They restate the
// definitions directly and share no code with the library beyond the
// schema/flow data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "aeq/context.hpp"
#include "aeq/metric.hpp"
#include "aeq/rng.hpp"

namespace oracle {

inline double norm(const aeq::PropertySpec& p, double v) {
  return p.upper > p.lower ? (v - p.lower) / (p.upper - p.lower) : 0.0;
}

inline double distance(const aeq::ContextSchema& s, const aeq::ContextInstance& a, const aeq::ContextInstance& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.arity(); ++i) {
    const auto& p = s.properties()[i];
    sum += std::pow(norm(p, a.values[i]) - norm(p, b.values[i]), 2);
  }
  return std::sqrt(sum);
}

/// Every qualifying (k, j) window, then classic interval scheduling (sort by
/// end, take each window disjoint from the last taken). Returns the count.
inline std::size_t ep_windows(const std::vector<double>& d, double rho, double eps, std::size_t jmax) {
  struct W {
    std::size_t first, last;
  };
  std::vector<W> all;
  for (std::size_t k = 0; k < d.size(); ++k)
    for (std::size_t j = 2; j <= jmax && k + j <= d.size(); ++j) {
      const double a = d[k], b = d[k + j - 1];
      if ((b >= rho * a && b >= eps) || (a >= rho * b && a >= eps)) all.push_back({k, k + j - 1});
    }
  std::sort(all.begin(), all.end(), [](const W& x, const W& y) {
    return std::tie(x.last, x.first) < std::tie(y.last, y.first);
  });
  std::size_t n = 0;
  long long taken_end = -1;
  for (const auto& w : all)
    if (static_cast<long long>(w.first) > taken_end) {
      ++n;
      taken_end = static_cast<long long>(w.last);
    }
  return n;
}

inline std::vector<double> transitions(const aeq::ContextSchema& s, const aeq::ContextFlow& f) {
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) d.push_back(oracle::distance(s, f.instances[i], f.instances[i + 1]));
  return d;
}

inline std::size_t ep_count(const aeq::ContextSchema& s, const aeq::ContextFlow& f, const aeq::EpConfig& cfg) {
  return ep_windows(transitions(s, f), cfg.violence_ratio, cfg.min_violent_distance, cfg.window_max);
}

/// Visits every point of the cartesian product of `axes`.
inline void for_each_point(const std::vector<std::vector<double>>& axes,
                           const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<double> cur(axes.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == axes.size()) {
      fn(cur);
      return;
    }
    for (double v : axes[i]) {
      cur[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

inline std::vector<double> full_axis(const aeq::PropertySpec& p) {
  std::vector<double> out;
  for (std::int64_t i = 0; i < p.cardinality(); ++i) out.push_back(p.value_at(i));
  return out;
}

using Pair = std::tuple<std::size_t, double, std::size_t, double>;

/// Pairs realized by some valid point of the sample grid.
inline std::set<Pair> feasible_pairs(const aeq::ContextSchema& s, const std::vector<std::vector<double>>& samples) {
  std::set<Pair> out;
  for_each_point(samples, [&](const std::vector<double>& v) {
    if (!s.is_valid(aeq::ContextInstance{v})) return;
    for (std::size_t a = 0; a < v.size(); ++a)
      for (std::size_t b = a + 1; b < v.size(); ++b) out.insert({a, v[a], b, v[b]});
  });
  return out;
}

/// Universe pairs realized by any instance of the flows.
inline std::set<Pair> realized(const std::set<Pair>& universe, const std::vector<aeq::ContextFlow>& flows) {
  std::set<Pair> out;
  for (const auto& f : flows)
    for (const auto& inst : f.instances)
      for (std::size_t a = 0; a < inst.values.size(); ++a)
        for (std::size_t b = a + 1; b < inst.values.size(); ++b) {
          for (const auto& p : universe)
            if (std::get<0>(p) == a && std::get<2>(p) == b && std::fabs(std::get<1>(p) - inst.values[a]) < 1e-9 &&
                std::fabs(std::get<3>(p) - inst.values[b]) < 1e-9)
              out.insert(p);
        }
  return out;
}

inline std::uint64_t count_valid(const aeq::ContextSchema& s) {
  std::vector<std::vector<double>> axes;
  for (const auto& p : s.properties()) axes.push_back(full_axis(p));
  std::uint64_t n = 0;
  for_each_point(axes, [&](const std::vector<double>& v) { n += s.is_valid(aeq::ContextInstance{v}) ? 1 : 0; });
  return n;
}

/// Shape class restated from its definition.
inline aeq::ShapeClass shape(const std::vector<double>& y) {
  const std::size_t n = y.size();
  double mx = y[0], mn = y[0], sum = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] > mx) {
      mx = y[i];
      arg = i;
    }
    mn = std::min(mn, y[i]);
    sum += y[i];
  }
  const double mean = sum / static_cast<double>(n);
  const double prom = mx > mn ? (mx - mean) / (mx - mn) : 0.0;
  const double pos = static_cast<double>(arg) / static_cast<double>(n - 1);
  if (prom >= 0.5 && pos > 0.25 && pos < 1.0) {
    double step_sum = 0.0;  // mean change of the pre-peak step sizes
    for (std::size_t i = 2; i <= arg; ++i) step_sum += std::fabs(y[i] - y[i - 1]) - std::fabs(y[i - 1] - y[i - 2]);
    if (step_sum >= -1e-12) return aeq::ShapeClass::CrescendoPeak;
  }
  // slope via the normal equations
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  return std::fabs(slope) >= 0.01 ? aeq::ShapeClass::Ramp : aeq::ShapeClass::PlateauOscillation;
}

/// Random valid instance by rejection over the full grid.
inline aeq::ContextInstance random_valid(const aeq::ContextSchema& s, aeq::Rng& rng) {
  for (;;) {
    aeq::ContextInstance x;
    for (const auto& p : s.properties())
      x.values.push_back(p.value_at(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(p.cardinality())))));
    if (s.is_valid(x)) return x;
  }
}

inline aeq::ContextInstance random_from(const std::vector<std::vector<double>>& samples, aeq::Rng& rng) {
  aeq::ContextInstance x;
  for (const auto& axis : samples) x.values.push_back(axis[rng.below(axis.size())]);
  return x;
}

}  // namespace oracle
