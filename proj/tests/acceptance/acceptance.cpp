// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Heavy artifacts (suites, kill matrices) are written under the system temp
// directory and left there for inspection.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "aeq/commands.hpp"
#include "aeq/error.hpp"
#include "aeq/io.hpp"
#include "aeq/mutation.hpp"
#include "aeq/policy.hpp"
#include "aeq/search.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

const fs::path kData = AEQ_DATA_DIR;
const fs::path kConfig = kData / "default_config.json";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects failed checks of one criterion; the first few are printed.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 5) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string notes() const {
    std::string out;
    for (const auto& n : notes_) out += "\n    - " + n;
    if (failures_ > notes_.size()) out += "\n    - ... " + std::to_string(failures_ - notes_.size()) + " more";
    return out;
  }

 private:
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

int g_failed = 0;

void verdict(const char* id, const Check& c, const std::string& summary) {
  std::printf("%s %s: %s%s\n", id, c.ok() ? "PASS" : "FAIL", summary.c_str(), c.ok() ? "" : c.notes().c_str());
  std::fflush(stdout);
  if (!c.ok()) ++g_failed;
}

void run_guarded(const char* id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    std::printf("%s FAIL: aborted: %s\n", id, e.what());
    std::fflush(stdout);
    ++g_failed;
  }
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

json load_json(const fs::path& p) { return json::parse(aeq::read_text_file(p)); }

aeq::SchemaDocument schema_doc() { return aeq::load_schema_document(kData / "webserver_schema.json"); }

std::vector<std::vector<double>> coarse_axes(const aeq::SchemaDocument& doc) {
  std::vector<std::vector<double>> axes;
  for (const auto& p : doc.schema.properties()) axes.push_back(doc.coverage_samples.at(p.name));
  return axes;
}

void generate(std::uint64_t seed, const fs::path& out, bool trace = false) {
  aeq::GenerateOptions o;
  o.config = kConfig;
  o.seed = seed;
  o.out = out;
  o.trace = trace;
  aeq::cmd_generate(o);
}

/// Generates one suite per seed, each on its own thread.
void generate_parallel(const std::vector<std::uint64_t>& seeds, const fs::path& root) {
  std::vector<std::thread> threads;
  std::vector<std::string> errors(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    threads.emplace_back([&, i] {
      try {
        generate(seeds[i], root / ("suite_" + std::to_string(seeds[i])));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("generate failed: " + e);
}

void mutate(const std::vector<std::uint64_t>& seeds, const fs::path& root, const fs::path& out, std::size_t jobs) {
  aeq::MutateOptions o;
  o.config = kConfig;
  o.out = out;
  o.jobs = jobs;
  for (auto s : seeds) o.suites.push_back(root / ("suite_" + std::to_string(s)));
  aeq::cmd_mutate(o);
}

// ---------------------------------------------------------------------------

void ac1(const fs::path& suite_dir) {
  Check c;
  const auto doc = schema_doc();
  const auto t0 = Clock::now();
  generate(42, suite_dir, true);
  const double elapsed = seconds_since(t0);

  const auto feasible = oracle::feasible_pairs(doc.schema, coarse_axes(doc));
  const auto flows = aeq::load_flows(doc.schema, suite_dir / "suite.csv");
  const auto realized = oracle::realized(feasible, flows);
  c.expect(realized == feasible, "suite covers " + std::to_string(realized.size()) + " of " +
                                     std::to_string(feasible.size()) + " feasible pairs");
  c.expect(elapsed <= 60.0, "generate took " + fmt(elapsed, 1) + " s");

  // the universe written by generate is exactly the oracle's feasible set
  std::set<oracle::Pair> written;
  std::istringstream in(aeq::read_text_file(suite_dir / "universe.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    written.insert({*doc.schema.index_of(f[0]), std::stod(f[1]), *doc.schema.index_of(f[2]), std::stod(f[3])});
  }
  c.expect(written == feasible, "universe.csv differs from the brute-force feasible pairs");
  // files = 50 needs density >= 50, so <density 10, files 50> is infeasible
  c.expect(written.count({0, 10.0, 1, 50.0}) == 0, "infeasible pair <request_density 10, file_number 50> present");
  c.expect(flows.size() == 20, "suite has " + std::to_string(flows.size()) + " AEQs");

  verdict("AC1", c,
          std::to_string(realized.size()) + "/" + std::to_string(feasible.size()) +
              " feasible pairs covered by 20 AEQs (oracle-verified), generate " + fmt(elapsed, 1) + " s");
}

void ac2(const fs::path& suite_dir) {
  Check c;
  const aeq::SearchConfig defaults;
  c.expect(defaults.flow_length == 60 && defaults.resolved().tabu_tenure == 30, "default tenure is not 30 for length 60");
  c.expect(defaults.mem_max_age == 10 && defaults.hard_limit == 1000 && defaults.stale_limit == 100,
           "default limits differ");

  const auto result = load_json(suite_dir / "search_result.json");
  std::map<std::size_t, std::vector<json>> events;
  std::istringstream in(aeq::read_text_file(suite_dir / "trace.jsonl"));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) {
      auto e = json::parse(line);
      events[e["round"].get<std::size_t>()].push_back(e);
    }

  std::size_t max_age = 0, max_iters = 0, n_events = 0;
  const auto& rounds = result["rounds"];
  c.expect(events.size() == rounds.size(), "trace rounds do not match search_result rounds");
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const auto used = rounds[r]["iterations_used"].get<std::size_t>();
    c.expect(rounds[r]["tabu_tenure"] == 30, "round " + std::to_string(r) + " used another tenure");
    max_iters = std::max(max_iters, used);
    std::size_t last_gain = 0, last_iter = 0;
    for (const auto& e : events[r]) {
      ++n_events;
      const auto age = e["age"].get<std::size_t>();
      max_age = std::max(max_age, age);
      c.expect(age <= 10, "MEM entry of age " + std::to_string(age));
      const auto it = e["iter"].get<std::size_t>();
      c.expect(it >= last_iter, "trace iterations go backwards");
      last_iter = it;
      const auto action = e["action"].get<std::string>();
      if (action == "accept_new" || action == "promote") last_gain = it;
    }
    c.expect(used <= 1000, "round " + std::to_string(r) + " used " + std::to_string(used) + " iterations");
    c.expect(last_iter <= used, "trace runs past the reported iteration count");
    c.expect(used == 1000 || used - last_gain == 100,
             "round " + std::to_string(r) + " stopped " + std::to_string(used - last_gain) + " iterations after its last gain");
  }

  verdict("AC2", c,
          "tenure 30 for length 60; " + std::to_string(n_events) + " trace events over " +
              std::to_string(rounds.size()) + " rounds, max MEM age " + std::to_string(max_age) +
              ", max iterations " + std::to_string(max_iters) + ", every stop at 100 stale iterations or the limit");
}

/// Recomputes G and every L of each round from the raw flow file.
void check_objectives(Check& c, const fs::path& suite_dir, std::size_t& flows_checked, double& worst) {
  const auto doc = schema_doc();
  const auto& s = doc.schema;
  const auto cfg = aeq::load_run_config(kConfig);
  const auto feasible = oracle::feasible_pairs(s, coarse_axes(doc));
  std::map<std::string, aeq::ContextFlow> by_id;
  for (auto& f : aeq::load_flows(s, suite_dir / "suite.csv")) by_id[f.id] = f;

  aeq::ContextInstance origin;
  for (const auto& p : s.properties()) origin.values.push_back(p.lower);
  const aeq::EpConfig ep = doc.ep.value_or(aeq::EpConfig{});
  const auto& w = cfg.search;

  const auto result = load_json(suite_dir / "search_result.json");
  for (const auto& round : result["rounds"]) {
    std::vector<aeq::ContextFlow> sol;
    std::set<oracle::Pair> uncovered = feasible;
    std::set<aeq::ShapeClass> shapes;
    for (const auto& pf : round["per_flow"]) {
      const auto& f = by_id.at(pf["id"].get<std::string>());
      sol.push_back(f);
      const auto hit = oracle::realized(uncovered, {f}).size();
      const double cov = uncovered.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(uncovered.size());
      const double eps =
          static_cast<double>(oracle::ep_count(s, f, ep)) / static_cast<double>((f.size() - 1) / 2);
      const double l = w.local.w_cov * cov + w.local.w_ep * eps;
      const double dl = std::fabs(l - pf["l_value"].get<double>());
      worst = std::max(worst, dl);
      c.expect(dl <= 1e-9, suite_dir.filename().string() + "/" + f.id + ": L differs by " + std::to_string(dl));
      for (const auto& p : oracle::realized(feasible, {f})) uncovered.erase(p);

      std::vector<double> series;
      for (const auto& x : f.instances) series.push_back(oracle::distance(s, x, origin));
      shapes.insert(oracle::shape(series));
      ++flows_checked;
    }
    const double g = w.global.w_cov * static_cast<double>(oracle::realized(feasible, sol).size()) /
                         static_cast<double>(feasible.size()) +
                     w.global.w_shape * static_cast<double>(shapes.size()) / 3.0 -
                     w.lambda_size * static_cast<double>(sol.size());
    const double dg = std::fabs(g - round["g_value"].get<double>());
    worst = std::max(worst, dg);
    c.expect(dg <= 1e-9, suite_dir.filename().string() + ": G differs by " + std::to_string(dg));

    const auto& acc = round["acceptance_g"];
    for (std::size_t i = 1; i < acc.size(); ++i)
      c.expect(acc[i].get<double>() > acc[i - 1].get<double>(), "acceptance G not strictly increasing");
    c.expect(!acc.empty() && std::fabs(acc.back().get<double>() - round["g_value"].get<double>()) <= 1e-9,
             "last accepted G differs from the round's G");
  }
}

void ac3(const std::vector<fs::path>& suites) {
  Check c;
  std::size_t flows = 0;
  double worst = 0.0;
  for (const auto& s : suites) check_objectives(c, s, flows, worst);
  verdict("AC3", c,
          std::to_string(flows) + " per-flow L values and every round's G over " + std::to_string(suites.size()) +
              " suites recomputed from flow files, max deviation " + [&] {
                std::ostringstream os;
                os << worst;
                return os.str();
              }() + "; acceptance G strictly increasing");
}

void ac4() {
  Check c;
  const auto t0 = Clock::now();
  const auto s = aeq::web_server_schema();
  const aeq::EpConfig ep;
  aeq::Rng rng(2024);
  std::size_t with_ep = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 3 + rng.below(10);
    aeq::ContextFlow f{"r" + std::to_string(i), {}};
    // calm stretches around random jumps, so flows with several windows occur
    aeq::ContextInstance base = oracle::random_valid(s, rng);
    for (std::size_t k = 0; k < n; ++k) {
      if (rng.below(3) == 0) base = oracle::random_valid(s, rng);
      f.instances.push_back(base);
      if (rng.below(2) == 0) {
        auto nudged = base;
        nudged.values[2] = std::min(1.0, nudged.values[2] + 0.1);
        if (s.is_valid(s.snap(nudged))) base = s.snap(nudged);
      }
    }
    const auto expected = oracle::ep_count(s, f, ep);
    const auto got = aeq::detect_ep(s, f, ep).ep_count;
    with_ep += expected > 0;
    c.expect(static_cast<double>(expected) == got, f.id + ": scan " + std::to_string(got) + " vs oracle " +
                                                       std::to_string(expected));
  }

  std::size_t trials = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = oracle::random_valid(s, rng), b = oracle::random_valid(s, rng), x = oracle::random_valid(s, rng);
    const double ab = aeq::distance(s, a, b), ba = aeq::distance(s, b, a);
    c.expect(std::fabs(ab - ba) <= 1e-9, "asymmetric distance");
    c.expect(ab <= aeq::distance(s, a, x) + aeq::distance(s, x, b) + 1e-9, "triangle inequality violated");
    c.expect(std::fabs(ab - oracle::distance(s, a, b)) <= 1e-9, "distance differs from the restated formula");
    c.expect(aeq::distance(s, a, a) == 0.0, "nonzero self distance");
    ++trials;
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed <= 10.0, "took " + fmt(elapsed, 2) + " s");
  verdict("AC4", c,
          "200 random flows (" + std::to_string(with_ep) + " with EPs) match the exhaustive window oracle; " +
              std::to_string(trials) + " symmetry/triangle trials; " + fmt(elapsed, 2) + " s");
}

struct MatrixStats {
  std::size_t over_60 = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> rows;  // id -> (kills, cells)
  std::map<std::string, std::string> group;
};

MatrixStats read_matrix(const fs::path& csv) {
  MatrixStats m;
  std::istringstream in(aeq::read_text_file(csv));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    auto& r = m.rows[f[0]];
    r.first += f[3] == "1";
    r.second += 1;
    m.group[f[0]] = f[1];
  }
  for (const auto& [id, r] : m.rows) m.over_60 += 10 * r.first > 6 * r.second;
  return m;
}

void ac5(const fs::path& root, const std::vector<std::uint64_t>& seeds) {
  Check c;
  const auto t0 = Clock::now();
  generate_parallel(seeds, root);
  mutate(seeds, root, root / "mutation", 4);
  const double elapsed = seconds_since(t0);

  const auto m = read_matrix(root / "mutation" / "kill_matrix.csv");
  const auto rep = load_json(root / "mutation" / "kill_report.json");
  const std::size_t aeqs = rep["aeqs"].get<std::size_t>();
  c.expect(aeqs == 60, std::to_string(aeqs) + " AEQs instead of 3 x 20");
  c.expect(m.rows.size() >= 40 && m.rows.size() <= 50, std::to_string(m.rows.size()) + " mutants");

  std::size_t f1 = 0, killed = 0, non_identity = 0;
  std::vector<std::string> survivors;
  for (const auto& [id, r] : m.rows) {
    if (m.group.at(id) == "F1") {
      ++f1;
      c.expect(r.first == r.second, id + " survives " + std::to_string(r.second - r.first) + " AEQs");
    }
    if (m.group.at(id) == "identity") continue;
    ++non_identity;
    if (r.first > 0) ++killed;
    else survivors.push_back(id);
  }
  c.expect(f1 > 0, "no F1 mutants in the plan");

  // (b): the union kill fraction over mutants that are not possibly
  // equivalent is 1 by construction, so the raw fraction is held to 90% too.
  const double non_eq = rep["non_equivalent_kill"].get<double>();
  const double raw = static_cast<double>(killed) / static_cast<double>(non_identity);
  c.expect(non_eq >= 0.9, "non-equivalent kill " + fmt(non_eq));
  c.expect(raw >= 0.9, "raw kill " + fmt(raw));

  // (c): the >60% bucket from raw cells
  const double over_60 = static_cast<double>(m.over_60) / static_cast<double>(m.rows.size());
  c.expect(std::fabs(over_60 - rep["killed_by_over_60"].get<double>()) <= 1e-12,
           "report's >60% bucket " + fmt(rep["killed_by_over_60"].get<double>()) + " vs cells " + fmt(over_60));
  c.expect(elapsed <= 300.0, "took " + fmt(elapsed, 1) + " s");

  std::string diag;
  if (!survivors.empty()) {
    diag = "; survivors:";
    for (const auto& s : survivors) diag += " " + s;
    diag += " (diagnosis in " + (root / "mutation" / "kill_report.txt").string() + ")";
  }
  verdict("AC5", c,
          std::to_string(m.rows.size()) + " mutants x " + std::to_string(aeqs) + " AEQs: all " + std::to_string(f1) +
              " F1 killed by every AEQ, raw kill " + fmt(100 * raw, 1) + "%, non-equivalent kill " +
              fmt(100 * non_eq, 1) + "%, >60% bucket " + fmt(100 * over_60, 1) + "% (recomputed), " +
              fmt(elapsed, 1) + " s" + diag);
}

void ac6(const fs::path& first, const fs::path& second, const std::vector<std::uint64_t>& seeds) {
  Check c;
  generate_parallel(seeds, second);
  mutate(seeds, second, second / "mutation", 4);
  mutate(seeds, second, second / "mutation_j1", 1);

  std::size_t files = 0;
  for (auto s : seeds) {
    const auto name = "suite_" + std::to_string(s);
    for (const auto& e : fs::directory_iterator(first / name / "flows")) {
      const auto other = second / name / "flows" / e.path().filename();
      c.expect(fs::exists(other) && aeq::read_text_file(e.path()) == aeq::read_text_file(other),
               name + "/" + e.path().filename().string() + " differs");
      ++files;
    }
    c.expect(aeq::read_text_file(first / name / "suite.csv") == aeq::read_text_file(second / name / "suite.csv"),
             name + "/suite.csv differs");
  }
  const auto matrix = aeq::read_text_file(first / "mutation" / "kill_matrix.csv");
  c.expect(matrix == aeq::read_text_file(second / "mutation" / "kill_matrix.csv"), "kill matrices of the reruns differ");
  c.expect(matrix == aeq::read_text_file(second / "mutation_j1" / "kill_matrix.csv"),
           "--jobs 1 and --jobs 4 matrices differ");
  verdict("AC6", c,
          std::to_string(files) + " flow files and the kill matrix byte-identical across reruns; --jobs 1 and 4 "
                                  "give the same matrix");
}

void ac7() {
  Check c;
  const auto s = aeq::web_server_schema();
  const auto sets = aeq::FuzzySets::defaults(s);
  const auto reference =
      aeq::parse_policy(aeq::read_text_file(kData / "reference_policy.rules"), s);
  aeq::Rng rng(77);

  auto random_policy = [&] {
    if (rng.below(4) == 0) return reference;
    aeq::AdaptationPolicy p;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      aeq::Rule r;
      r.when_property = rng.below(3);
      for (int a = 0; a < 3; ++a)
        if (rng.below(2) == 0) r.when_adjectives.push_back(static_cast<aeq::Adjective>(a));
      if (r.when_adjectives.empty()) r.when_adjectives.push_back(aeq::Adjective::Low);
      if (rng.below(2) == 0) r.guard = static_cast<aeq::Guard>(rng.below(4));
      r.action = static_cast<aeq::Action>(rng.below(6));
      r.utility = static_cast<aeq::Adjective>(rng.below(3));
      p.rules.push_back(r);
    }
    p.utility_threshold = 0.05 + 0.9 * rng.uniform();
    p.default_cache_size = static_cast<int>(rng.between(10, 1024));
    p.default_cache_validity_s = static_cast<int>(rng.between(1, 600));
    return p;
  };
  auto random_variant = [&] {
    aeq::Variant v;
    v.data_servers = static_cast<int>(rng.between(1, 100));
    if (rng.below(2) == 0) {
      v.cache_exists = true;
      v.cache_size = static_cast<int>(rng.between(10, 1024));
      v.cache_validity_s = static_cast<int>(rng.between(1, 600));
    }
    return v;
  };

  std::size_t fired = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_policy();
    const auto v = random_variant();
    const auto r = aeq::step(p, sets, v, oracle::random_valid(s, rng));
    fired += r.fired.size();
    const auto& n = r.state;
    const bool xi = n.cache_exists ? (n.cache_size > 0 && n.cache_validity_s > 0)
                                   : (n.cache_size == 0 && n.cache_validity_s == 0);
    c.expect(xi && n.valid(), "step " + std::to_string(i) + " produced an invalid variant");
  }

  for (int i = 0; i < 1000; ++i) {
    const double a = 1e-3 + 1e3 * rng.uniform();
    const double b = 2e3 * rng.uniform() - 1e3;
    auto scaled = sets;
    for (auto& p : scaled.properties) {
      p.lower = a * p.lower + b;
      p.upper = a * p.upper + b;
    }
    const auto x = oracle::random_valid(s, rng);
    auto y = x;
    for (auto& v : y.values) v = a * v + b;
    const auto fx = aeq::fuzzify(sets, x), fy = aeq::fuzzify(scaled, y);
    for (std::size_t k = 0; k < fx.size(); ++k)
      c.expect(fx[k].adjective == fy[k].adjective && std::fabs(fx[k].degree - fy[k].degree) <= 1e-9,
               "trial " + std::to_string(i) + " property " + std::to_string(k) + " changed adjective");
  }
  verdict("AC7", c,
          "10000 random (policy, state, instance) steps (" + std::to_string(fired) +
              " actions fired) kept every variant valid; 1000 affine rescalings kept every argmax");
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "aeq_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::uint64_t> seeds{1, 2, 3};

  run_guarded("AC1", [&] { ac1(root / "default_suite"); });
  run_guarded("AC2", [&] { ac2(root / "default_suite"); });
  run_guarded("AC4", [] { ac4(); });
  run_guarded("AC5", [&] { ac5(root / "run_a", seeds); });
  run_guarded("AC3", [&] {
    std::vector<fs::path> suites{root / "default_suite"};
    for (auto s : seeds) suites.push_back(root / "run_a" / ("suite_" + std::to_string(s)));
    ac3(suites);
  });
  run_guarded("AC6", [&] { ac6(root / "run_a", root / "run_b", seeds); });
  run_guarded("AC7", [] { ac7(); });

  std::printf("%s: %d criteria failed; artifacts in %s\n", g_failed == 0 ? "ALL PASS" : "FAILURES", g_failed,
              root.string().c_str());
  return g_failed == 0 ? 0 : 1;
}
