#include "aeq/mutation.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aeq/error.hpp"
#include "aeq/format.hpp"

namespace aeq {

const char* to_string(FaultGroup g) {
  switch (g) {
    case FaultGroup::F1: return "F1";
    case FaultGroup::F2: return "F2";
    case FaultGroup::F3: return "F3";
    case FaultGroup::F4: return "F4";
    case FaultGroup::Identity: return "identity";
  }
  return "identity";
}

FaultGroup fault_group_from_string(const std::string& s) {
  if (s == "F1") return FaultGroup::F1;
  if (s == "F2") return FaultGroup::F2;
  if (s == "F3") return FaultGroup::F3;
  if (s == "F4") return FaultGroup::F4;
  if (s == "identity") return FaultGroup::Identity;
  throw ParseError("unknown fault group '" + s + "'");
}

MutantPlan MutantPlan::desk_scale() {
  MutantPlan p;
  p.counts = {{FaultGroup::F1, 3}, {FaultGroup::F2, 14}, {FaultGroup::F3, 14}, {FaultGroup::F4, 14}};
  return p;
}

namespace {

constexpr std::array<Adjective, 3> kAdjectives{Adjective::Low, Adjective::Medium, Adjective::High};

std::string adj_upper(Adjective a) {
  std::string s = to_string(a);
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return "'" + s + "'";
}

Adjective& slot_ref(AdaptationPolicy& p, const RuleSlot& s) {
  auto& r = p.rules[s.rule];
  return s.then_slot ? r.utility : r.when_adjectives[s.index];
}

Adjective slot_value(const AdaptationPolicy& p, const RuleSlot& s) {
  const auto& r = p.rules[s.rule];
  return s.then_slot ? r.utility : r.when_adjectives[s.index];
}

std::vector<RuleSlot> slots_of(const AdaptationPolicy& p, std::size_t rule) {
  std::vector<RuleSlot> out;
  for (std::size_t k = 0; k < p.rules[rule].when_adjectives.size(); ++k) out.push_back({rule, false, k});
  out.push_back({rule, true, 0});
  return out;
}

std::string slot_name(const RuleSlot& s) {
  return "rule " + std::to_string(s.rule + 1) + (s.then_slot ? " THEN" : " WHEN[" + std::to_string(s.index) + "]");
}

// Round-robin over per-key lists so a capped prefix spreads across keys.
template <typename T>
std::vector<T> interleave(const std::vector<std::vector<T>>& lists) {
  std::vector<T> out;
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (const auto& l : lists) {
      if (round < l.size()) {
        out.push_back(l[round]);
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

// Non-identity adjective maps: the five permutations first, then the
// non-injective maps in lexicographic order.
std::vector<std::array<Adjective, 3>> adjective_maps() {
  using A = Adjective;
  std::vector<std::array<Adjective, 3>> out{
      {A::High, A::Medium, A::Low}, {A::Medium, A::Low, A::High}, {A::Low, A::High, A::Medium},
      {A::Medium, A::High, A::Low}, {A::High, A::Low, A::Medium},
  };
  for (auto a : kAdjectives)
    for (auto b : kAdjectives)
      for (auto c : kAdjectives)
        if (a == b || b == c || a == c) out.push_back({a, b, c});
  return out;
}

std::string id_for(FaultGroup g, std::size_t i) {
  std::string n = std::to_string(i + 1);
  if (n.size() < 2) n.insert(0, 2 - n.size(), '0');
  return std::string(to_string(g)) + "_" + n;
}

}  // namespace

std::string describe(const MutantSpec& m, const AdaptationPolicy& policy, const ContextSchema& schema) {
  const auto& names = schema.names();
  return std::visit(
      [&](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "identity (no change)";
        } else if constexpr (std::is_same_v<T, InstanceRewrite>) {
          if (t.kind == InstanceRewrite::Kind::Swap) return "swap sensor values " + names[t.prop_a] + " <-> " + names[t.prop_b];
          return "scale sensor value " + names[t.prop_a] + " by " + format_number(t.factor);
        } else if constexpr (std::is_same_v<T, AdjectiveMap>) {
          std::string s = "fuzzy values of " + names[t.property] + ":";
          for (auto a : kAdjectives)
            if (t.map[static_cast<std::size_t>(a)] != a)
              s += std::string(" ") + to_string(a) + "->" + to_string(t.map[static_cast<std::size_t>(a)]);
          return s;
        } else if constexpr (std::is_same_v<T, SlotReplacement>) {
          return slot_name(t.slot) + " " + adj_upper(slot_value(policy, t.slot)) + " -> " + adj_upper(t.replacement);
        } else {
          return "swap " + slot_name(t.a) + " " + adj_upper(slot_value(policy, t.a)) + " with " + slot_name(t.b) + " " +
                 adj_upper(slot_value(policy, t.b));
        }
      },
      m.transform);
}

std::vector<MutantSpec> enumerate_mutants(const AdaptationPolicy& policy, const ContextSchema& schema,
                                          FaultGroup group) {
  std::vector<MutantTransform> transforms;
  const std::size_t n = schema.arity();
  switch (group) {
    case FaultGroup::F1: {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) transforms.push_back(InstanceRewrite{InstanceRewrite::Kind::Swap, a, b, 1.0});
      for (std::size_t a = 0; a < n; ++a)
        for (double f : {0.5, 2.0}) transforms.push_back(InstanceRewrite{InstanceRewrite::Kind::Scale, a, 0, f});
      break;
    }
    case FaultGroup::F2: {
      for (const auto& map : adjective_maps())
        for (std::size_t p = 0; p < n; ++p) transforms.push_back(AdjectiveMap{p, map});
      break;
    }
    case FaultGroup::F3: {
      std::vector<std::vector<MutantTransform>> per_rule(policy.rules.size());
      for (std::size_t r = 0; r < policy.rules.size(); ++r)
        for (const auto& s : slots_of(policy, r))
          for (auto a : kAdjectives)
            if (a != slot_value(policy, s)) per_rule[r].push_back(SlotReplacement{s, a});
      transforms = interleave(per_rule);
      break;
    }
    case FaultGroup::F4: {
      std::vector<RuleSlot> all;
      for (std::size_t r = 0; r < policy.rules.size(); ++r)
        for (const auto& s : slots_of(policy, r)) all.push_back(s);
      std::vector<std::vector<MutantTransform>> per_rule(policy.rules.size());
      for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
          const auto& a = all[i];
          const auto& b = all[j];
          if (a.then_slot != b.then_slot) continue;
          if (slot_value(policy, a) == slot_value(policy, b)) continue;
          if (!a.then_slot) {
            // WHEN slots: same property, and not two alternatives of one rule
            // (swapping inside one OR-list changes nothing).
            if (a.rule == b.rule) continue;
            if (policy.rules[a.rule].when_property != policy.rules[b.rule].when_property) continue;
          }
          per_rule[a.rule].push_back(SlotSwap{a, b});
        }
      }
      transforms = interleave(per_rule);
      break;
    }
    case FaultGroup::Identity: transforms.push_back(std::monostate{}); break;
  }
  std::vector<MutantSpec> out;
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    MutantSpec m{id_for(group, i), group, "", transforms[i]};
    m.description = describe(m, policy, schema);
    out.push_back(std::move(m));
  }
  return out;
}

void check_mutant(const MutantSpec& m, const AdaptationPolicy& policy, const ContextSchema& schema) {
  auto bad = [&](const std::string& why) { throw Error(ErrorCategory::Config, "mutant " + m.id + ": " + why); };
  auto check_slot = [&](const RuleSlot& s) {
    if (s.rule >= policy.rules.size()) bad("rule " + std::to_string(s.rule + 1) + " does not exist");
    if (!s.then_slot && s.index >= policy.rules[s.rule].when_adjectives.size())
      bad(slot_name(s) + " does not exist");
  };
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, InstanceRewrite>) {
          if (t.prop_a >= schema.arity()) bad("property index out of range");
          if (t.kind == InstanceRewrite::Kind::Swap && (t.prop_b >= schema.arity() || t.prop_a == t.prop_b))
            bad("swap needs two distinct properties");
        } else if constexpr (std::is_same_v<T, AdjectiveMap>) {
          if (t.property >= schema.arity()) bad("property index out of range");
        } else if constexpr (std::is_same_v<T, SlotReplacement>) {
          check_slot(t.slot);
        } else if constexpr (std::is_same_v<T, SlotSwap>) {
          check_slot(t.a);
          check_slot(t.b);
          if (t.a == t.b) bad("swap needs two distinct slots");
        }
      },
      m.transform);
}

std::vector<MutantSpec> generate_mutants(const AdaptationPolicy& policy, const ContextSchema& schema,
                                         const MutantPlan& plan) {
  std::vector<MutantSpec> out;
  for (auto g : {FaultGroup::F1, FaultGroup::F2, FaultGroup::F3, FaultGroup::F4}) {
    auto it = plan.counts.find(g);
    if (it == plan.counts.end()) continue;
    auto all = enumerate_mutants(policy, schema, g);
    std::size_t n = it->second.value_or(all.size());
    if (n > all.size())
      throw Error(ErrorCategory::Config, std::string("plan requests ") + std::to_string(n) + " " + to_string(g) +
                                             " mutants; at most " + std::to_string(all.size()) + " are enumerable");
    out.insert(out.end(), all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  }
  if (plan.include_identity) out.push_back(enumerate_mutants(policy, schema, FaultGroup::Identity).front());
  for (auto m : plan.explicit_mutants) {
    check_mutant(m, policy, schema);
    if (m.description.empty()) m.description = describe(m, policy, schema);
    out.push_back(std::move(m));
  }
  return out;
}

MutantProgram realize(const MutantSpec& m, const AdaptationPolicy& policy) {
  MutantProgram prog{policy, {}};
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, InstanceRewrite>) {
          prog.hooks.rewrite_instance = [t](const ContextInstance& in) {
            ContextInstance out = in;
            if (t.kind == InstanceRewrite::Kind::Swap) std::swap(out.values[t.prop_a], out.values[t.prop_b]);
            else out.values[t.prop_a] *= t.factor;
            return out;
          };
        } else if constexpr (std::is_same_v<T, AdjectiveMap>) {
          prog.hooks.rewrite_adjectives = [t](Fuzzified& fz) {
            auto& v = fz[t.property];
            v.adjective = t.map[static_cast<std::size_t>(v.adjective)];
          };
        } else if constexpr (std::is_same_v<T, SlotReplacement>) {
          slot_ref(prog.policy, t.slot) = t.replacement;
        } else if constexpr (std::is_same_v<T, SlotSwap>) {
          std::swap(slot_ref(prog.policy, t.a), slot_ref(prog.policy, t.b));
        }
      },
      m.transform);
  return prog;
}

std::size_t KillMatrix::kills(std::size_t mutant) const {
  return static_cast<std::size_t>(
      std::count_if(cells[mutant].begin(), cells[mutant].end(), [](const KillCell& c) { return c.killed; }));
}

double KillMatrix::kill_fraction(std::size_t mutant) const {
  return aeq_ids.empty() ? 0.0 : static_cast<double>(kills(mutant)) / static_cast<double>(aeq_ids.size());
}

KillMatrix run_experiment(const ContextSchema& schema, const AdaptationPolicy& policy, const FuzzySets& sets,
                          const std::vector<MutantSpec>& mutants, const std::vector<NamedSuite>& suites,
                          const Variant& initial, std::size_t jobs) {
  KillMatrix km;
  std::vector<const ContextFlow*> columns;
  for (const auto& s : suites)
    for (const auto& f : s.flows) {
      km.aeq_ids.push_back(s.name.empty() ? f.id : s.name + "/" + f.id);
      columns.push_back(&f);
    }
  std::vector<MutantProgram> programs;
  for (const auto& m : mutants) {
    check_mutant(m, policy, schema);
    km.mutant_ids.push_back(m.id);
    km.groups.push_back(m.group);
    km.descriptions.push_back(m.description.empty() ? describe(m, policy, schema) : m.description);
    programs.push_back(realize(m, policy));
  }
  km.cells.assign(mutants.size(), std::vector<KillCell>(columns.size()));

  // One reference trace per AEQ, shared by the whole column.
  std::vector<VariantFlow> originals(columns.size());
  std::vector<std::optional<std::string>> original_errors(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    try {
      originals[c] = run(policy, sets, initial, *columns[c]);
    } catch (const std::exception& e) {
      original_errors[c] = e.what();
    }
  }

  const std::size_t total = mutants.size() * columns.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t m = k / columns.size();
      const std::size_t c = k % columns.size();
      KillCell& cell = km.cells[m][c];
      if (original_errors[c]) {
        cell.error = "original run failed: " + *original_errors[c];
        continue;
      }
      try {
        const auto& prog = programs[m];
        const auto trace = run(prog.policy, sets, initial, *columns[c], &prog.hooks);
        const auto cmp = trace_equal(originals[c], trace);
        cell.killed = !cmp.equal;
        cell.divergence_step = cmp.first_divergence;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return km;
}

KillReport report(const KillMatrix& km) {
  KillReport r;
  r.mutants = km.mutant_ids.size();
  r.aeqs = km.aeq_ids.size();
  std::size_t any = 0, all = 0, over60 = 0, non_eq = 0, non_eq_killed = 0;
  std::map<FaultGroup, double> fraction_sum;
  for (std::size_t m = 0; m < r.mutants; ++m) {
    const std::size_t k = km.kills(m);
    const double frac = km.kill_fraction(m);
    auto& g = r.per_group[km.groups[m]];
    ++g.mutants;
    fraction_sum[km.groups[m]] += frac;
    if (k > 0) {
      ++any;
      ++g.killed_by_any;
    }
    if (r.aeqs > 0 && k == r.aeqs) {
      ++all;
      ++g.killed_by_all;
    }
    if (frac > 0.6) {
      ++over60;
      ++g.killed_by_over_60;
    }
    if (km.possibly_equivalent(m)) {
      r.possibly_equivalent.push_back(km.mutant_ids[m]);
    } else {
      ++non_eq;
      non_eq_killed += k > 0 ? 1 : 0;
    }
    r.failed_cells.push_back(static_cast<std::size_t>(
        std::count_if(km.cells[m].begin(), km.cells[m].end(), [](const KillCell& c) { return c.error.has_value(); })));
  }
  for (auto& [g, stats] : r.per_group) stats.mean_kill_fraction = fraction_sum[g] / static_cast<double>(stats.mutants);
  const auto frac = [&](std::size_t x, std::size_t n) { return n ? static_cast<double>(x) / static_cast<double>(n) : 0.0; };
  r.raw_kill_score = frac(any, r.mutants);
  r.killed_by_all = frac(all, r.mutants);
  r.killed_by_over_60 = frac(over60, r.mutants);
  r.non_equivalent_kill = frac(non_eq_killed, non_eq);
  return r;
}

namespace {

std::string percent(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << 100.0 * x << '%';
  return os.str();
}

}  // namespace

std::string report_text(const KillMatrix& km, const KillReport& r) {
  std::ostringstream os;
  os << "mutants: " << r.mutants << "  aeqs: " << r.aeqs << '\n';
  os << "raw kill score: " << percent(r.raw_kill_score) << '\n';
  os << "killed by all AEQs: " << percent(r.killed_by_all) << '\n';
  os << "killed by more than 60% of AEQs: " << percent(r.killed_by_over_60) << '\n';
  os << "kill score excluding possibly-equivalent: " << percent(r.non_equivalent_kill) << '\n';
  os << '\n' << "group  mutants  any  all  >60%  mean-fraction\n";
  for (const auto& [g, s] : r.per_group) {
    os << to_string(g) << "  " << s.mutants << "  " << s.killed_by_any << "  " << s.killed_by_all << "  "
       << s.killed_by_over_60 << "  " << format_number(s.mean_kill_fraction) << '\n';
  }
  if (!r.possibly_equivalent.empty()) {
    os << '\n' << "possibly equivalent (no AEQ kills them):\n";
    for (const auto& id : r.possibly_equivalent) {
      const auto m = static_cast<std::size_t>(std::find(km.mutant_ids.begin(), km.mutant_ids.end(), id) -
                                              km.mutant_ids.begin());
      os << "  " << id;
      if (m < km.descriptions.size() && !km.descriptions[m].empty()) os << ": " << km.descriptions[m];
      os << '\n';
    }
  }
  std::size_t failed = 0;
  for (auto f : r.failed_cells) failed += f;
  if (failed) os << '\n' << "cells with run failures: " << failed << '\n';
  return os.str();
}

std::string report_csv(const KillMatrix& km) {
  std::ostringstream os;
  os << "mutant_id,group,kills,aeqs,kill_fraction,possibly_equivalent\n";
  for (std::size_t m = 0; m < km.mutant_ids.size(); ++m)
    os << km.mutant_ids[m] << ',' << to_string(km.groups[m]) << ',' << km.kills(m) << ',' << km.aeq_ids.size()
       << ',' << format_number(km.kill_fraction(m)) << ',' << (km.possibly_equivalent(m) ? 1 : 0) << '\n';
  return os.str();
}

std::string report_json(const KillReport& r) {
  nlohmann::ordered_json j;
  j["mutants"] = r.mutants;
  j["aeqs"] = r.aeqs;
  j["raw_kill_score"] = r.raw_kill_score;
  j["killed_by_all"] = r.killed_by_all;
  j["killed_by_over_60"] = r.killed_by_over_60;
  j["non_equivalent_kill"] = r.non_equivalent_kill;
  auto groups = nlohmann::ordered_json::object();
  for (const auto& [g, s] : r.per_group)
    groups[to_string(g)] = {{"mutants", s.mutants},
                            {"killed_by_any", s.killed_by_any},
                            {"killed_by_all", s.killed_by_all},
                            {"killed_by_over_60", s.killed_by_over_60},
                            {"mean_kill_fraction", s.mean_kill_fraction}};
  j["per_group"] = std::move(groups);
  j["possibly_equivalent"] = r.possibly_equivalent;
  return j.dump(2) + "\n";
}

std::string matrix_to_csv(const KillMatrix& km) {
  std::ostringstream os;
  os << "mutant_id,group,aeq_id,killed,divergence_step\n";
  for (std::size_t m = 0; m < km.mutant_ids.size(); ++m)
    for (std::size_t c = 0; c < km.aeq_ids.size(); ++c) {
      const auto& cell = km.cells[m][c];
      os << km.mutant_ids[m] << ',' << to_string(km.groups[m]) << ',' << km.aeq_ids[c] << ','
         << (cell.killed ? 1 : 0) << ',';
      if (cell.killed && cell.divergence_step) os << *cell.divergence_step;
      os << '\n';
    }
  return os.str();
}

KillMatrix matrix_from_csv(const std::string& text) {
  KillMatrix km;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, std::size_t> rows, cols;
  struct Raw {
    std::size_t m, c;
    KillCell cell;
  };
  std::vector<Raw> raws;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "mutant_id,group,aeq_id,killed,divergence_step") throw ParseError("unexpected matrix header", 1, 1);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), lineno, 1);
    auto [rit, rnew] = rows.emplace(f[0], km.mutant_ids.size());
    if (rnew) {
      km.mutant_ids.push_back(f[0]);
      km.groups.push_back(fault_group_from_string(f[1]));
    }
    auto [cit, cnew] = cols.emplace(f[2], km.aeq_ids.size());
    if (cnew) km.aeq_ids.push_back(f[2]);
    KillCell cell;
    if (f[3] != "0" && f[3] != "1") throw ParseError("killed must be 0 or 1", lineno, 1);
    cell.killed = f[3] == "1";
    if (!f[4].empty()) {
      try {
        cell.divergence_step = static_cast<std::size_t>(std::stoull(f[4]));
      } catch (const std::exception&) {
        throw ParseError("malformed divergence_step '" + f[4] + "'", lineno, 1);
      }
    }
    raws.push_back({rit->second, cit->second, cell});
  }
  km.cells.assign(km.mutant_ids.size(), std::vector<KillCell>(km.aeq_ids.size()));
  std::vector<std::vector<bool>> seen(km.mutant_ids.size(), std::vector<bool>(km.aeq_ids.size(), false));
  for (const auto& r : raws) {
    km.cells[r.m][r.c] = r.cell;
    seen[r.m][r.c] = true;
  }
  for (const auto& row : seen)
    if (std::find(row.begin(), row.end(), false) != row.end()) throw ParseError("kill matrix is missing cells");
  return km;
}

}  // namespace aeq
