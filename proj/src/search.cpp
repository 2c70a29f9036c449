#include "aeq/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "aeq/error.hpp"

namespace aeq {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr double kImprovement = 1e-12;
constexpr std::size_t kRandomPoolDraws = 512;
constexpr std::uint64_t kCrossProductLimit = 200'000;

}  // namespace

void LocalObjectiveWeights::check() const {
  if (w_cov < 0 || w_ep < 0 || w_re < 0) throw Error(ErrorCategory::Config, "local weights must be >= 0");
  if (std::fabs(w_cov + w_ep + w_re - 1.0) > kWeightTolerance)
    throw Error(ErrorCategory::Config, "local weights must sum to 1");
}

void GlobalObjectiveWeights::check() const {
  if (w_cov < 0 || w_shape < 0) throw Error(ErrorCategory::Config, "global weights must be >= 0");
  if (std::fabs(w_cov + w_shape - 1.0) > kWeightTolerance)
    throw Error(ErrorCategory::Config, "global weights must sum to 1");
}

SearchConfig SearchConfig::resolved() const {
  SearchConfig c = *this;
  if (c.tabu_tenure == 0) c.tabu_tenure = std::max<std::size_t>(1, c.flow_length / 2);
  return c;
}

void SearchConfig::check(const ContextSchema& schema) const {
  if (flow_length < 3) throw Error(ErrorCategory::Config, "flow_length must be >= 3");
  if (tabu_tenure < 1) throw Error(ErrorCategory::Config, "tabu_tenure must be >= 1");
  if (stale_limit > hard_limit) throw Error(ErrorCategory::Config, "stale_limit must not exceed hard_limit");
  if (neighborhood < 1) throw Error(ErrorCategory::Config, "neighborhood must be >= 1");
  if (lambda_size < 0) throw Error(ErrorCategory::Config, "lambda_size must be >= 0");
  ep.check(max_distance(schema));
  local.check();
  global.check();
}

const char* to_string(TraceEvent::Action a) {
  switch (a) {
    case TraceEvent::Action::Promote: return "promote";
    case TraceEvent::Action::Shelve: return "shelve";
    case TraceEvent::Action::Evict: return "evict";
    case TraceEvent::Action::AcceptNew: return "accept_new";
  }
  return "shelve";
}

namespace {

void check_distribution(const ContextSchema& schema, const RealityDistribution& dist) {
  const auto& props = schema.properties();
  if (dist.mass.size() != props.size())
    throw Error(ErrorCategory::Config, "reality distribution must give one mass per property");
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (dist.mass[i].size() != static_cast<std::size_t>(props[i].cardinality()))
      throw Error(ErrorCategory::Config, "reality mass of '" + props[i].name + "' has " +
                                             std::to_string(dist.mass[i].size()) + " entries, grid has " +
                                             std::to_string(props[i].cardinality()));
    const double total = std::accumulate(dist.mass[i].begin(), dist.mass[i].end(), 0.0);
    if (std::fabs(total - 1.0) > 1e-6 ||
        std::any_of(dist.mass[i].begin(), dist.mass[i].end(), [](double m) { return m < 0; }))
      throw Error(ErrorCategory::Config, "reality mass of '" + props[i].name + "' is not a probability mass");
  }
}

// 1 - mean total-variation distance, from per-property histograms.
double reality_from_counts(const RealityDistribution& dist, const std::vector<std::vector<std::uint32_t>>& counts,
                           std::size_t n) {
  double tv_sum = 0.0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    double tv = 0.0;
    for (std::size_t k = 0; k < counts[p].size(); ++k)
      tv += std::fabs(static_cast<double>(counts[p][k]) / static_cast<double>(n) - dist.mass[p][k]);
    tv_sum += 0.5 * tv;
  }
  return 1.0 - tv_sum / static_cast<double>(counts.size());
}

}  // namespace

double reality_score(const ContextSchema& schema, const ContextFlow& flow, const RealityDistribution& dist) {
  check_distribution(schema, dist);
  const auto& props = schema.properties();
  std::vector<std::vector<std::uint32_t>> counts(props.size());
  for (std::size_t p = 0; p < props.size(); ++p) counts[p].assign(dist.mass[p].size(), 0);
  for (const auto& inst : flow.instances)
    for (std::size_t p = 0; p < props.size(); ++p) ++counts[p][static_cast<std::size_t>(props[p].nearest_index(inst.values[p]))];
  return reality_from_counts(dist, counts, flow.size());
}

namespace {

double coverage_term(std::size_t realized_uncovered, std::size_t uncovered) {
  return uncovered == 0 ? 1.0 : static_cast<double>(realized_uncovered) / static_cast<double>(uncovered);
}

double ep_term(std::size_t count, std::size_t flow_length) {
  const auto cap = max_windows(flow_length);
  return cap == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(cap);
}

}  // namespace

double local_objective(const ContextSchema& schema, const ContextFlow& flow, const CoverageUniverse& universe_view,
                       const LocalObjectiveWeights& weights, const EpConfig& ep,
                       const RealityDistribution* distribution) {
  const double c = coverage_term(coverage_local_uncovered(universe_view, flow), universe_view.uncovered_count());
  const auto windows = scan_ep_windows(transition_distances(schema, flow), ep).size();
  const double e = ep_term(windows, flow.size());
  const double r = distribution ? reality_score(schema, flow, *distribution) : 0.0;
  return weights.w_cov * c + weights.w_ep * e + weights.w_re * r;
}

std::size_t distinct_shapes(const ContextSchema& schema, const std::vector<ContextFlow>& solution,
                            const ShapeConfig& shape) {
  std::set<ShapeClass> seen;
  for (const auto& f : solution) {
    if (f.size() < 3) continue;
    const auto s = classify_shape(origin_distance_series(schema, f), shape);
    if (s != ShapeClass::Unclassified) seen.insert(s);
  }
  return seen.size();
}

namespace {

double g_formula(const GlobalObjectiveWeights& w, std::size_t covered, std::size_t total, std::size_t shapes,
                 std::size_t flows, double lambda) {
  if (flows == 0) return 0.0;
  const double cov = total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
  return w.w_cov * cov + w.w_shape * (static_cast<double>(shapes) / 3.0) - lambda * static_cast<double>(flows);
}

}  // namespace

double global_objective(const ContextSchema& schema, const std::vector<ContextFlow>& solution,
                        const CoverageUniverse& universe, const GlobalObjectiveWeights& weights, const EpConfig&,
                        double lambda_size, const ShapeConfig& shape) {
  return g_formula(weights, coverage_global(universe, solution), universe.size(),
                   distinct_shapes(schema, solution, shape), solution.size(), lambda_size);
}

std::vector<double> prefix_local_objectives(const ContextSchema& schema, const std::vector<ContextFlow>& solution,
                                            const CoverageUniverse& universe, const SearchConfig& cfg) {
  std::vector<double> out;
  CoverageUniverse view = universe.cleared();
  const RealityDistribution* dist = cfg.reality ? &*cfg.reality : nullptr;
  for (const auto& f : solution) {
    out.push_back(local_objective(schema, f, view, cfg.local, cfg.ep, dist));
    view = mark_covered(view, {f});
  }
  return out;
}

std::size_t memory_overlap(const ContextSchema& schema, const ContextFlow& flow,
                           const std::unordered_set<std::uint64_t>& instances) {
  std::size_t n = 0;
  for (const auto& inst : flow.instances) n += instances.count(schema.key(inst));
  return n;
}

namespace {

/// Draws, perturbs and repairs instances so that every produced instance is
/// valid.
class InstanceSampler {
 public:
  InstanceSampler(const ContextSchema& schema, const std::vector<std::vector<double>>& samples, Rng& rng)
      : schema_(schema), samples_(samples) {
    build_pool(rng);
  }

  ContextInstance random_valid(Rng& rng) const {
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto inst = rng.chance(0.5) ? from_samples(rng) : uniform_grid(rng);
      if (schema_.is_valid(inst)) return inst;
    }
    return nearest_in_pool(uniform_grid(rng));
  }

  /// A valid neighbor of `current`, or nullopt when the move degenerates.
  std::optional<ContextInstance> neighbor(const ContextInstance& current, Rng& rng) const {
    const auto& props = schema_.properties();
    ContextInstance cand = current;
    const double kind = rng.uniform();
    const std::size_t p = static_cast<std::size_t>(rng.below(props.size()));
    const auto& spec = props[p];
    if (kind < 0.35) {
      // Nudge one property toward or away from its neighbors' values.
      const std::int64_t card = spec.cardinality();
      const std::int64_t reach = std::max<std::int64_t>(1, card / 4);
      std::int64_t steps = rng.between(1, reach);
      if (rng.chance(0.5)) steps = -steps;
      const auto idx = std::clamp<std::int64_t>(spec.nearest_index(current.values[p]) + steps, 0, card - 1);
      cand.values[p] = spec.value_at(idx);
    } else if (kind < 0.55) {
      cand.values[p] = spec.value_at(rng.between(0, spec.cardinality() - 1));
    } else if (kind < 0.80) {
      const auto& s = samples_[p];
      cand.values[p] = s[static_cast<std::size_t>(rng.below(s.size()))];
    } else {
      cand = random_valid(rng);
    }
    if (!schema_.is_valid(cand)) {
      auto fixed = repair(cand, current);
      if (!fixed) return std::nullopt;
      cand = std::move(*fixed);
    }
    if (cand == current) return std::nullopt;
    return cand;
  }

 private:
  ContextInstance uniform_grid(Rng& rng) const {
    ContextInstance inst;
    for (const auto& p : schema_.properties()) inst.values.push_back(p.value_at(rng.between(0, p.cardinality() - 1)));
    return inst;
  }

  ContextInstance from_samples(Rng& rng) const {
    ContextInstance inst;
    for (const auto& s : samples_) inst.values.push_back(s[static_cast<std::size_t>(rng.below(s.size()))]);
    return inst;
  }

  // Walks back from `candidate` toward the valid `anchor` and keeps the valid
  // grid point closest to the candidate.
  std::optional<ContextInstance> repair(const ContextInstance& candidate, const ContextInstance& anchor) const {
    double lo = 0.0, hi = 1.0;  // lo: valid side (anchor), hi: candidate side
    std::optional<ContextInstance> best;
    for (int i = 0; i < 24; ++i) {
      const double t = 0.5 * (lo + hi);
      ContextInstance mid;
      mid.values.resize(anchor.values.size());
      for (std::size_t k = 0; k < mid.values.size(); ++k)
        mid.values[k] = anchor.values[k] + t * (candidate.values[k] - anchor.values[k]);
      mid = schema_.snap(mid);
      if (schema_.is_valid(mid)) {
        lo = t;
        best = std::move(mid);
      } else {
        hi = t;
      }
    }
    return best;
  }

  ContextInstance nearest_in_pool(const ContextInstance& target) const {
    const auto& props = schema_.properties();
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      double d = 0.0;
      for (std::size_t k = 0; k < props.size(); ++k) {
        const double diff = props[k].normalize(pool_[i].values[k]) - props[k].normalize(target.values[k]);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return pool_[best];
  }

  void build_pool(Rng& rng) {
    const auto& props = schema_.properties();
    std::vector<ContextInstance> tried;
    auto consider = [&](ContextInstance inst) {
      if (schema_.is_valid(inst)) pool_.push_back(inst);
      else if (tried.size() < 4096) tried.push_back(std::move(inst));
    };

    BigCount cross = 1;
    for (const auto& s : samples_) cross *= s.size();
    if (cross <= kCrossProductLimit) {
      std::vector<std::size_t> idx(samples_.size(), 0);
      while (true) {
        ContextInstance inst;
        for (std::size_t k = 0; k < samples_.size(); ++k) inst.values.push_back(samples_[k][idx[k]]);
        consider(std::move(inst));
        std::size_t d = 0;
        for (; d < idx.size(); ++d) {
          if (++idx[d] < samples_[d].size()) break;
          idx[d] = 0;
        }
        if (d == idx.size()) break;
      }
    }
    for (std::size_t i = 0; i < kRandomPoolDraws; ++i) consider(uniform_grid(rng));
    if (!pool_.empty()) return;

    // Last resort: walk the full grid when it is small enough.
    BigCount full = 1;
    for (const auto& p : props) full *= p.cardinality();
    if (full <= kDefaultEnumerationCap) {
      std::vector<std::int64_t> idx(props.size(), 0);
      while (pool_.empty()) {
        ContextInstance inst;
        for (std::size_t k = 0; k < props.size(); ++k) inst.values.push_back(props[k].value_at(idx[k]));
        if (schema_.is_valid(inst)) pool_.push_back(inst);
        std::size_t d = 0;
        for (; d < idx.size(); ++d) {
          if (++idx[d] < props[d].cardinality()) break;
          idx[d] = 0;
        }
        if (d == idx.size()) break;
      }
    }
    if (!pool_.empty()) return;

    std::string named;
    for (const auto& c : schema_.constraints()) {
      const bool ever = std::any_of(tried.begin(), tried.end(), [&](const ContextInstance& x) { return c.holds(x.values); });
      if (!ever) named += (named.empty() ? "" : "; ") + c.source();
    }
    if (named.empty())
      for (const auto& c : schema_.constraints()) named += (named.empty() ? "" : "; ") + c.source();
    throw Error(ErrorCategory::Constraint, "no valid context instance exists; unsatisfiable constraint: " + named);
  }

  const ContextSchema& schema_;
  const std::vector<std::vector<double>>& samples_;
  std::vector<ContextInstance> pool_;
};

/// Incrementally evaluates L for single-position changes of a flow.
class FlowEvaluator {
 public:
  FlowEvaluator(const ContextSchema& schema, const SearchMemory& memory, const SearchConfig& cfg)
      : schema_(schema), memory_(memory), cfg_(cfg), mult_(memory.universe.size(), 0) {
    if (cfg.reality && cfg.local.w_re > 0) {
      dist_ = &*cfg.reality;
      check_distribution(schema, *dist_);
    }
  }

  void load(const ContextFlow& flow) {
    const std::size_t n = flow.size();
    flow_ = flow;
    norm_.assign(n, {});
    pairs_.assign(n, {});
    in_memory_.assign(n, 0);
    std::fill(mult_.begin(), mult_.end(), 0);
    distinct_ = 0;
    overlap_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
      norm_[i] = normalized(flow.instances[i]);
      pairs_[i] = uncovered_pairs(flow.instances[i]);
      for (auto id : pairs_[i])
        if (mult_[id]++ == 0) ++distinct_;
      in_memory_[i] = memory_.instances.count(schema_.key(flow.instances[i])) ? 1 : 0;
      overlap_ += in_memory_[i];
    }
    dists_.resize(n > 0 ? n - 1 : 0);
    for (std::size_t t = 0; t + 1 < n; ++t) dists_[t] = dist(norm_[t], norm_[t + 1]);
    if (dist_) {
      const auto& props = schema_.properties();
      counts_.assign(props.size(), {});
      for (std::size_t p = 0; p < props.size(); ++p) counts_[p].assign(dist_->mass[p].size(), 0);
      for (const auto& inst : flow.instances)
        for (std::size_t p = 0; p < props.size(); ++p) ++counts_[p][grid_index(p, inst)];
    }
    value_ = score(dists_, distinct_, counts_);
  }

  struct Candidate {
    std::size_t pos = 0;
    ContextInstance inst;
    std::vector<double> norm;
    std::vector<std::uint32_t> pairs;
    std::uint64_t key = 0;
    bool in_memory = false;
    double value = 0.0;
  };

  Candidate prepare(std::size_t pos, ContextInstance inst) const {
    Candidate c;
    c.pos = pos;
    c.norm = normalized(inst);
    c.pairs = uncovered_pairs(inst);
    c.key = schema_.key(inst);
    c.in_memory = memory_.instances.count(c.key) != 0;
    c.inst = std::move(inst);
    return c;
  }

  std::size_t overlap_with(const Candidate& c) const { return overlap_ - in_memory_[c.pos] + (c.in_memory ? 1 : 0); }

  double evaluate(const Candidate& c) {
    scratch_ = dists_;
    if (c.pos > 0) scratch_[c.pos - 1] = dist(norm_[c.pos - 1], c.norm);
    if (c.pos + 1 < flow_.size()) scratch_[c.pos] = dist(c.norm, norm_[c.pos + 1]);

    // Distinct uncovered pairs after replacing position c.pos.
    std::size_t distinct = distinct_;
    for (auto id : pairs_[c.pos])
      if (--mult_[id] == 0) --distinct;
    for (auto id : c.pairs)
      if (mult_[id]++ == 0) ++distinct;
    for (auto id : c.pairs) --mult_[id];
    for (auto id : pairs_[c.pos]) ++mult_[id];

    if (!dist_) return score(scratch_, distinct, counts_);
    auto counts = counts_;
    for (std::size_t p = 0; p < counts.size(); ++p) {
      --counts[p][grid_index(p, flow_.instances[c.pos])];
      ++counts[p][grid_index(p, c.inst)];
    }
    return score(scratch_, distinct, counts);
  }

  void apply(Candidate c) {
    const std::size_t pos = c.pos;
    if (pos > 0) dists_[pos - 1] = dist(norm_[pos - 1], c.norm);
    if (pos + 1 < flow_.size()) dists_[pos] = dist(c.norm, norm_[pos + 1]);
    for (auto id : pairs_[pos])
      if (--mult_[id] == 0) --distinct_;
    for (auto id : c.pairs)
      if (mult_[id]++ == 0) ++distinct_;
    if (dist_) {
      for (std::size_t p = 0; p < counts_.size(); ++p) {
        --counts_[p][grid_index(p, flow_.instances[pos])];
        ++counts_[p][grid_index(p, c.inst)];
      }
    }
    overlap_ = overlap_ - in_memory_[pos] + (c.in_memory ? 1 : 0);
    in_memory_[pos] = c.in_memory ? 1 : 0;
    norm_[pos] = std::move(c.norm);
    pairs_[pos] = std::move(c.pairs);
    flow_.instances[pos] = std::move(c.inst);
    value_ = c.value;
  }

  const ContextFlow& flow() const noexcept { return flow_; }
  double value() const noexcept { return value_; }
  std::size_t overlap() const noexcept { return overlap_; }

 private:
  std::vector<double> normalized(const ContextInstance& inst) const {
    const auto& props = schema_.properties();
    std::vector<double> out(props.size());
    for (std::size_t k = 0; k < props.size(); ++k) out[k] = props[k].normalize(inst.values[k]);
    return out;
  }

  std::vector<std::uint32_t> uncovered_pairs(const ContextInstance& inst) const {
    std::vector<std::uint32_t> ids;
    memory_.universe.pairs_of(inst, ids);
    std::erase_if(ids, [&](std::uint32_t id) { return memory_.universe.is_covered(id); });
    return ids;
  }

  std::size_t grid_index(std::size_t p, const ContextInstance& inst) const {
    return static_cast<std::size_t>(schema_.properties()[p].nearest_index(inst.values[p]));
  }

  static double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }

  double score(const std::vector<double>& dists, std::size_t distinct,
               const std::vector<std::vector<std::uint32_t>>& counts) const {
    const double c = coverage_term(distinct, memory_.universe.uncovered_count());
    const double e = ep_term(scan_ep_windows(dists, cfg_.ep).size(), flow_.size());
    const double r = dist_ ? reality_from_counts(*dist_, counts, flow_.size()) : 0.0;
    return cfg_.local.w_cov * c + cfg_.local.w_ep * e + cfg_.local.w_re * r;
  }

  const ContextSchema& schema_;
  const SearchMemory& memory_;
  const SearchConfig& cfg_;
  const RealityDistribution* dist_ = nullptr;

  ContextFlow flow_;
  std::vector<std::vector<double>> norm_;
  std::vector<std::vector<std::uint32_t>> pairs_;
  std::vector<std::uint8_t> in_memory_;
  std::vector<std::uint32_t> mult_;
  std::vector<std::vector<std::uint32_t>> counts_;
  std::vector<double> dists_;
  std::vector<double> scratch_;
  std::size_t distinct_ = 0;
  std::size_t overlap_ = 0;
  double value_ = 0.0;
};

std::uint64_t move_id(std::size_t pos, std::uint64_t key) { return mix_seed(key ^ mix_seed(pos + 1)); }

}  // namespace

ContextFlow tabu_local_search(const ContextSchema& schema, const SearchMemory& memory, const SearchConfig& config,
                              Rng& rng, std::vector<TabuStep>* trace) {
  const SearchConfig cfg = config.resolved();
  InstanceSampler sampler(schema, memory.universe.samples(), rng);

  // Initial flow: uniform valid instances, redrawn while the flow shares too
  // many instances with the memory.
  ContextFlow flow{"local", {}};
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < cfg.flow_length; ++i) {
    auto inst = sampler.random_valid(rng);
    const bool crowded = overlap >= cfg.max_memory_overlap;
    for (int retry = 0; crowded && retry < 100 && memory.instances.count(schema.key(inst)); ++retry)
      inst = sampler.random_valid(rng);
    overlap += memory.instances.count(schema.key(inst));
    flow.instances.push_back(std::move(inst));
  }

  FlowEvaluator eval(schema, memory, cfg);
  eval.load(flow);
  ContextFlow best = eval.flow();
  double best_value = eval.value();

  std::unordered_map<std::uint64_t, std::size_t> last_used;
  for (std::size_t it = 1; it <= cfg.local_iterations; ++it) {
    std::optional<FlowEvaluator::Candidate> chosen;
    bool chosen_aspiration = false;
    for (std::size_t k = 0; k < cfg.neighborhood; ++k) {
      const auto pos = static_cast<std::size_t>(rng.below(cfg.flow_length));
      auto inst = sampler.neighbor(eval.flow().instances[pos], rng);
      if (!inst) continue;
      auto cand = eval.prepare(pos, std::move(*inst));
      // Too much overlap with already-covered instances: move elsewhere.
      if (cand.in_memory && eval.overlap_with(cand) > cfg.max_memory_overlap) continue;
      cand.value = eval.evaluate(cand);
      const auto id = move_id(pos, cand.key);
      auto hit = last_used.find(id);
      const bool tabu = hit != last_used.end() && it - hit->second <= cfg.tabu_tenure;
      const bool aspiration = tabu && cfg.aspiration && cand.value > best_value + kImprovement;
      if (tabu && !aspiration) continue;
      if (!chosen || cand.value > chosen->value) {
        chosen = std::move(cand);
        chosen_aspiration = aspiration;
      }
    }
    if (!chosen) continue;
    const auto id = move_id(chosen->pos, chosen->key);
    last_used[id] = it;
    if (trace) trace->push_back({it, id, chosen_aspiration, chosen->value});
    eval.apply(std::move(*chosen));
    if (eval.value() > best_value + kImprovement) {
      best_value = eval.value();
      best = eval.flow();
    }
  }
  return best;
}

namespace {

struct Entry {
  ContextFlow flow;
  std::vector<std::uint32_t> pairs;  // distinct universe pairs realized
  ShapeClass shape = ShapeClass::Unclassified;
  std::size_t serial = 0;
  std::size_t age = 0;
};

class Suite {
 public:
  Suite(const ContextSchema& schema, const CoverageUniverse& universe, const SearchConfig& cfg)
      : schema_(schema), universe_(universe), cfg_(cfg), covered_(universe.size(), 0) {}

  Entry describe(ContextFlow flow, std::size_t serial) const {
    Entry e;
    std::vector<std::uint32_t> ids;
    for (const auto& inst : flow.instances) universe_.pairs_of(inst, ids);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    e.pairs = std::move(ids);
    e.shape = classify_shape(origin_distance_series(schema_, flow), cfg_.shape);
    e.flow = std::move(flow);
    e.serial = serial;
    return e;
  }

  double g() const { return g_formula(cfg_.global, covered_count_, universe_.size(), shapes_.size(), flows_.size(), cfg_.lambda_size); }

  double g_with(const Entry& e) const {
    std::size_t fresh = 0;
    for (auto id : e.pairs) fresh += covered_[id] ? 0 : 1;
    auto shapes = shapes_;
    if (e.shape != ShapeClass::Unclassified) shapes.insert(e.shape);
    return g_formula(cfg_.global, covered_count_ + fresh, universe_.size(), shapes.size(), flows_.size() + 1,
                     cfg_.lambda_size);
  }

  void add(Entry e) {
    for (auto id : e.pairs)
      if (!covered_[id]) {
        covered_[id] = 1;
        ++covered_count_;
      }
    if (e.shape != ShapeClass::Unclassified) shapes_.insert(e.shape);
    flows_.push_back(std::move(e.flow));
  }

  const std::vector<ContextFlow>& flows() const noexcept { return flows_; }

  SearchMemory memory() const {
    SearchMemory t{mark_covered(universe_, flows_), {}};
    for (const auto& f : flows_)
      for (const auto& inst : f.instances) t.instances.insert(schema_.key(inst));
    return t;
  }

 private:
  const ContextSchema& schema_;
  const CoverageUniverse& universe_;
  const SearchConfig& cfg_;
  std::vector<std::uint8_t> covered_;
  std::size_t covered_count_ = 0;
  std::set<ShapeClass> shapes_;
  std::vector<ContextFlow> flows_;
};

std::string flow_name(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "aeq_" + digits;
}

void summarize(const ContextSchema& schema, const CoverageUniverse& universe, const SearchConfig& cfg,
               SearchResult& r) {
  for (std::size_t i = 0; i < r.solution.size(); ++i) r.solution[i].id = flow_name(i);
  r.g_value = global_objective(schema, r.solution, universe, cfg.global, cfg.ep, cfg.lambda_size, cfg.shape);
  const auto ls = prefix_local_objectives(schema, r.solution, universe, cfg);
  r.per_flow.clear();
  for (std::size_t i = 0; i < r.solution.size(); ++i) {
    const auto& f = r.solution[i];
    FlowSummary s;
    s.l_value = ls[i];
    s.ep_count = static_cast<std::size_t>(ep_score(schema, f, cfg.ep));
    s.shape = classify_shape(origin_distance_series(schema, f), cfg.shape);
    s.pairs_covered = coverage_local(universe, f);
    r.per_flow.push_back(s);
  }
}

}  // namespace

SearchResult global_search(const ContextSchema& schema, const CoverageUniverse& input_universe,
                           const SearchConfig& config) {
  const SearchConfig cfg = config.resolved();
  cfg.check(schema);
  const CoverageUniverse universe = input_universe.cleared();
  Rng rng(cfg.seed);

  SearchResult result;
  result.tabu_tenure = cfg.tabu_tenure;
  Suite sol(schema, universe, cfg);
  std::vector<Entry> mem;
  SearchMemory t = sol.memory();
  std::size_t serial = 0;
  std::size_t stale = 0;
  std::size_t iter = 0;

  auto admissible = [&](const Entry& e) {
    return memory_overlap(schema, e.flow, t.instances) <= cfg.max_memory_overlap;
  };

  while (iter < cfg.hard_limit && stale < cfg.stale_limit) {
    ++iter;
    bool improved = false;

    for (auto it = mem.begin(); it != mem.end();) {
      const double before = sol.g();
      const double after = sol.g_with(*it);
      if (after > before + kImprovement && admissible(*it)) {
        result.trace.push_back({iter, TraceEvent::Action::Promote, it->serial, it->age, before, after});
        sol.add(std::move(*it));
        result.acceptance_g.push_back(sol.g());
        it = mem.erase(it);
        improved = true;
      } else if (it->age >= cfg.mem_max_age) {
        result.trace.push_back({iter, TraceEvent::Action::Evict, it->serial, it->age, before, before});
        it = mem.erase(it);
      } else {
        ++it;
      }
    }

    Entry fresh = sol.describe(tabu_local_search(schema, t, cfg, rng), serial++);
    const double before = sol.g();
    const double after = sol.g_with(fresh);
    if (after > before + kImprovement && admissible(fresh)) {
      result.trace.push_back({iter, TraceEvent::Action::AcceptNew, fresh.serial, 0, before, after});
      sol.add(std::move(fresh));
      result.acceptance_g.push_back(sol.g());
      improved = true;
    } else {
      result.trace.push_back({iter, TraceEvent::Action::Shelve, fresh.serial, 0, before, before});
      mem.push_back(std::move(fresh));
    }

    t = sol.memory();
    for (auto& e : mem) ++e.age;
    stale = improved ? 0 : stale + 1;
  }

  result.iterations_used = iter;
  result.solution = sol.flows();
  summarize(schema, universe, cfg, result);
  return result;
}

std::vector<SearchResult> generate_suite(const ContextSchema& schema, const CoverageUniverse& universe,
                                         const SearchConfig& config, std::size_t count) {
  std::vector<SearchResult> rounds;
  std::size_t total = 0;
  for (std::uint64_t round = 0; rounds.empty() || total < count; ++round) {
    SearchConfig cfg = config;
    cfg.seed = round == 0 ? config.seed : mix_seed(config.seed ^ round);
    auto r = global_search(schema, universe, cfg);
    if (r.solution.empty()) throw Error(ErrorCategory::Internal, "global search produced an empty suite");
    total += r.solution.size();
    rounds.push_back(std::move(r));
    if (round > 10'000) throw Error(ErrorCategory::Internal, "suite generation does not converge");
  }
  if (count > 0 && total > count) {
    // Keep an accepted prefix of the last round; G is increasing along it.
    auto& last = rounds.back();
    const std::size_t keep = last.solution.size() - (total - count);
    last.solution.resize(keep);
    last.acceptance_g.resize(std::min(last.acceptance_g.size(), keep));
    summarize(schema, universe.cleared(), config.resolved(), last);
  }
  std::size_t next = 0;
  for (auto& r : rounds)
    for (auto& f : r.solution) f.id = flow_name(next++);
  return rounds;
}

}  // namespace aeq
