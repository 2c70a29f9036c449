#include "aeq/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aeq/error.hpp"
#include "aeq/format.hpp"

namespace aeq {

namespace {

constexpr double kMatchTolerance = 1e-9;

std::vector<std::vector<double>> resolve_samples(const ContextSchema& schema,
                                                 const std::optional<ValueSamples>& given, std::uint64_t cap) {
  const auto& props = schema.properties();
  if (given && given->size() != props.size())
    throw Error(ErrorCategory::Structural, "value samples must list one entry per property");
  std::vector<std::vector<double>> out(props.size());
  BigCount grid = 1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const auto& p = props[i];
    if (given && !(*given)[i].empty()) {
      for (double v : (*given)[i]) {
        if (!p.on_grid(v))
          throw Error(ErrorCategory::Config,
                      "sample " + format_number(v) + " is not on the grid of '" + p.name + "'");
        out[i].push_back(p.value_at(p.nearest_index(v)));
      }
      std::sort(out[i].begin(), out[i].end());
      out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
    } else {
      const auto card = p.cardinality();
      if (static_cast<std::uint64_t>(card) > cap)
        throw Error(ErrorCategory::Capacity, "property '" + p.name + "' has " + std::to_string(card) +
                                                 " grid values, above the enumeration cap of " +
                                                 std::to_string(cap) + "; provide coverage_samples");
      out[i].reserve(static_cast<std::size_t>(card));
      for (std::int64_t k = 0; k < card; ++k) out[i].push_back(p.value_at(k));
    }
    grid *= out[i].size();
  }
  if (grid > cap)
    throw Error(ErrorCategory::Capacity, "pair feasibility needs " + grid.str() +
                                             " sample combinations, above the enumeration cap of " +
                                             std::to_string(cap) + "; provide coverage_samples");
  return out;
}

// Is there a valid instance with values[a] = va, values[b] = vb, drawing every
// other property from its samples?
bool extendable(const ContextSchema& schema, const std::vector<std::vector<double>>& samples, std::size_t a,
                double va, std::size_t b, double vb) {
  const std::size_t n = samples.size();
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i)
    if (i != a && i != b) free.push_back(i);

  std::vector<double> values(n, 0.0);
  values[a] = va;
  values[b] = vb;
  std::vector<std::size_t> idx(free.size(), 0);
  for (std::size_t k = 0; k < free.size(); ++k) values[free[k]] = samples[free[k]][0];

  const auto& cs = schema.constraints();
  while (true) {
    if (std::all_of(cs.begin(), cs.end(), [&](const Constraint& c) { return c.holds(values); })) return true;
    std::size_t d = 0;
    for (; d < free.size(); ++d) {
      const auto p = free[d];
      if (++idx[d] < samples[p].size()) {
        values[p] = samples[p][idx[d]];
        break;
      }
      idx[d] = 0;
      values[p] = samples[p][0];
    }
    if (d == free.size()) return false;
  }
}

}  // namespace

int CoverageUniverse::sample_index(std::size_t prop, double v) const {
  const auto& s = samples_[prop];
  auto it = std::lower_bound(s.begin(), s.end(), v - kMatchTolerance);
  if (it != s.end() && std::fabs(*it - v) <= kMatchTolerance) return static_cast<int>(it - s.begin());
  return -1;
}

void CoverageUniverse::pairs_of(const ContextInstance& inst, std::vector<std::uint32_t>& out) const {
  const std::size_t n = samples_.size();
  int local[16];
  std::vector<int> heap;
  int* idx = local;
  if (n > 16) {
    heap.resize(n);
    idx = heap.data();
  }
  for (std::size_t i = 0; i < n; ++i) idx[i] = sample_index(i, inst.values[i]);
  for (const auto& blk : blocks_) {
    const int ia = idx[blk.a];
    const int ib = idx[blk.b];
    if (ia < 0 || ib < 0) continue;
    const auto id = blk.ids[static_cast<std::size_t>(ia) * samples_[blk.b].size() + static_cast<std::size_t>(ib)];
    if (id >= 0) out.push_back(static_cast<std::uint32_t>(id));
  }
}

CoverageUniverse CoverageUniverse::with_covered(const std::vector<std::uint32_t>& pair_ids) const {
  CoverageUniverse u = *this;
  for (auto id : pair_ids) {
    if (id >= u.pairs_.size()) throw Error(ErrorCategory::Structural, "pair id out of range");
    if (!u.covered_[id]) {
      u.covered_[id] = 1;
      ++u.covered_total_;
    }
  }
  return u;
}

CoverageUniverse CoverageUniverse::cleared() const {
  CoverageUniverse u = *this;
  std::fill(u.covered_.begin(), u.covered_.end(), 0);
  u.covered_total_ = 0;
  return u;
}

CoverageUniverse build_pairwise_universe(const ContextSchema& schema, const std::optional<ValueSamples>& value_samples,
                                         std::uint64_t cap) {
  CoverageUniverse u;
  u.samples_ = resolve_samples(schema, value_samples, cap);
  const std::size_t n = u.samples_.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      CoverageUniverse::Block blk;
      blk.a = a;
      blk.b = b;
      const auto& sa = u.samples_[a];
      const auto& sb = u.samples_[b];
      blk.ids.assign(sa.size() * sb.size(), -1);
      for (std::size_t i = 0; i < sa.size(); ++i) {
        for (std::size_t j = 0; j < sb.size(); ++j) {
          if (!extendable(schema, u.samples_, a, sa[i], b, sb[j])) continue;
          blk.ids[i * sb.size() + j] = static_cast<std::int32_t>(u.pairs_.size());
          u.pairs_.push_back({a, sa[i], b, sb[j]});
        }
      }
      u.blocks_.push_back(std::move(blk));
    }
  }
  u.covered_.assign(u.pairs_.size(), 0);
  return u;
}

ValueSamples samples_from_map(const ContextSchema& schema, const std::map<std::string, std::vector<double>>& m) {
  ValueSamples out(schema.arity());
  for (const auto& [name, values] : m) {
    auto idx = schema.index_of(name);
    if (!idx) throw Error(ErrorCategory::Config, "coverage_samples names unknown property '" + name + "'");
    out[*idx] = values;
  }
  return out;
}

namespace {

std::size_t count_realized(const CoverageUniverse& u, const std::vector<const ContextFlow*>& flows,
                           bool only_uncovered) {
  std::vector<std::uint8_t> seen(u.size(), 0);
  std::vector<std::uint32_t> ids;
  std::size_t count = 0;
  for (const auto* f : flows) {
    for (const auto& inst : f->instances) {
      ids.clear();
      u.pairs_of(inst, ids);
      for (auto id : ids) {
        if (seen[id] || (only_uncovered && u.is_covered(id))) continue;
        seen[id] = 1;
        ++count;
      }
    }
  }
  return count;
}

}  // namespace

std::size_t coverage_local(const CoverageUniverse& universe, const ContextFlow& flow) {
  return count_realized(universe, {&flow}, false);
}

std::size_t coverage_local_uncovered(const CoverageUniverse& universe, const ContextFlow& flow) {
  return count_realized(universe, {&flow}, true);
}

std::size_t coverage_global(const CoverageUniverse& universe, const std::vector<ContextFlow>& flows) {
  std::vector<const ContextFlow*> ptrs;
  for (const auto& f : flows) ptrs.push_back(&f);
  return count_realized(universe, ptrs, false);
}

CoverageUniverse mark_covered(const CoverageUniverse& universe, const std::vector<ContextFlow>& flows) {
  CoverageUniverse u = universe;
  std::vector<std::uint32_t> ids;
  for (const auto& f : flows) {
    for (const auto& inst : f.instances) {
      ids.clear();
      u.pairs_of(inst, ids);
      for (auto id : ids) {
        if (!u.covered_[id]) {
          u.covered_[id] = 1;
          ++u.covered_total_;
        }
      }
    }
  }
  return u;
}

std::string universe_to_csv(const ContextSchema& schema, const CoverageUniverse& universe) {
  std::ostringstream os;
  os << "prop_a,val_a,prop_b,val_b,covered\n";
  const auto& names = schema.names();
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const auto& p = universe.pairs()[i];
    os << names[p.prop_a] << ',' << format_number(p.val_a) << ',' << names[p.prop_b] << ','
       << format_number(p.val_b) << ',' << (universe.is_covered(i) ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace aeq
