#include "aeq/policy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include <json.hpp>

#include "aeq/error.hpp"
#include "aeq/format.hpp"

namespace aeq {

const char* to_string(Adjective a) {
  switch (a) {
    case Adjective::Low: return "low";
    case Adjective::Medium: return "medium";
    case Adjective::High: return "high";
  }
  return "low";
}

const char* to_string(Action a) {
  switch (a) {
    case Action::AddCache: return "ADDCACHE";
    case Action::RemoveCache: return "REMOVECACHE";
    case Action::AddServer: return "ADDSERVER";
    case Action::RemoveServer: return "REMOVESERVER";
    case Action::GrowCache: return "GROWCACHE";
    case Action::ShrinkCache: return "SHRINKCACHE";
  }
  return "ADDCACHE";
}

const char* to_string(Guard g) {
  switch (g) {
    case Guard::CachePresent: return "cache_present";
    case Guard::CacheAbsent: return "cache_absent";
    case Guard::ServersAtMax: return "servers_at_max";
    case Guard::ServersAtMin: return "servers_at_min";
  }
  return "cache_absent";
}

bool Variant::valid() const {
  if (data_servers < kMinServers || data_servers > kMaxServers) return false;
  if (cache_exists) return cache_size >= kMinCache && cache_size <= kMaxCache && cache_validity_s >= 1;
  return cache_size == 0 && cache_validity_s == 0;
}

double Triangle::operator()(double x) const {
  if (x == peak) return 1.0;
  if (x < peak) return x <= left ? 0.0 : (x - left) / (peak - left);
  return x >= right ? 0.0 : (right - x) / (right - peak);
}

FuzzySets FuzzySets::defaults(const ContextSchema& schema) {
  FuzzySets s;
  for (const auto& p : schema.properties())
    s.properties.push_back({p.lower, p.upper, {Triangle{0, 0, 0.5}, Triangle{0.25, 0.5, 0.75}, Triangle{0.5, 1, 1}}});
  return s;
}

void FuzzySets::check() const {
  for (std::size_t i = 0; i < properties.size(); ++i) {
    const auto& t = properties[i].terms;
    if (!(t[0].peak < t[1].peak && t[1].peak < t[2].peak))
      throw Error(ErrorCategory::Config, "fuzzy peaks of property " + std::to_string(i) + " are not ordered");
    for (int k = 0; k <= 1000; ++k) {
      const double x = k / 1000.0;
      if (t[0](x) <= 0 && t[1](x) <= 0 && t[2](x) <= 0)
        throw Error(ErrorCategory::Config, "fuzzy sets of property " + std::to_string(i) + " leave " +
                                               format_number(x) + " uncovered");
    }
  }
}

namespace {
constexpr double kTieTolerance = 1e-9;
}

Fuzzified fuzzify(const FuzzySets& sets, const ContextInstance& inst) {
  if (inst.values.size() != sets.properties.size())
    throw Error(ErrorCategory::Structural, "instance arity does not match the fuzzy sets");
  Fuzzified out;
  out.reserve(inst.values.size());
  for (std::size_t i = 0; i < inst.values.size(); ++i) {
    const auto& p = sets.properties[i];
    const double span = p.upper - p.lower;
    const double x = std::clamp(span > 0 ? (inst.values[i] - p.lower) / span : 0.0, 0.0, 1.0);
    FuzzyValue best{Adjective::Low, p.terms[0](x)};
    for (int k = 1; k < 3; ++k) {
      const double d = p.terms[static_cast<std::size_t>(k)](x);
      // Normalization rounding must not decide a tie.
      if (d > best.degree + kTieTolerance) best = {static_cast<Adjective>(k), d};
    }
    out.push_back(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule language

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string fold_name(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

struct Tok {
  enum Kind { Word, Quoted, Number, End } kind;
  std::string text;
  int line = 0;
  int column = 0;
};

std::vector<Tok> lex(std::string_view src) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const int l = line, cl = col;
    if (c == '\'') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '\'' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '\'') throw ParseError("unterminated quoted adjective", l, cl);
      out.push_back({Tok::Quoted, std::string(src.substr(i + 1, j - i - 1)), l, cl});
      advance(j - i + 1);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.' || src[j] == 'e' ||
                                src[j] == 'E' || src[j] == '-' || src[j] == '+'))
        ++j;
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '.'))
        ++j;
      out.push_back({Tok::Word, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class PolicyParser {
 public:
  PolicyParser(std::vector<Tok> toks, const ContextSchema& schema) : toks_(std::move(toks)), schema_(schema) {}

  AdaptationPolicy parse() {
    AdaptationPolicy p;
    while (peek().kind != Tok::End) {
      const std::string kw = upper(peek().text);
      if (peek().kind != Tok::Word) fail("expected WHEN or a header directive");
      if (kw == "WHEN") {
        p.rules.push_back(rule());
      } else if (kw == "THRESHOLD") {
        if (!p.rules.empty()) fail("THRESHOLD must precede the rules");
        ++pos_;
        p.utility_threshold = number();
        if (!(p.utility_threshold > 0 && p.utility_threshold < 1)) fail_prev("THRESHOLD must lie in (0, 1)");
      } else if (kw == "DEFAULT") {
        if (!p.rules.empty()) fail("DEFAULT must precede the rules");
        ++pos_;
        const std::string what = upper(word("CACHESIZE or CACHEVALIDITY"));
        const double v = number();
        if (what == "CACHESIZE") {
          if (v < Variant::kMinCache || v > Variant::kMaxCache || v != static_cast<int>(v))
            fail_prev("DEFAULT CACHESIZE must be an integer in [10, 1024]");
          p.default_cache_size = static_cast<int>(v);
        } else if (what == "CACHEVALIDITY") {
          if (v < 1 || v != static_cast<int>(v)) fail_prev("DEFAULT CACHEVALIDITY must be an integer >= 1");
          p.default_cache_validity_s = static_cast<int>(v);
        } else {
          fail_at(toks_[pos_ - 2], "unknown DEFAULT setting '" + what + "'");
        }
      } else {
        fail("expected WHEN or a header directive, got '" + peek().text + "'");
      }
    }
    return p;
  }

 private:
  const Tok& peek() const { return toks_[pos_]; }

  [[noreturn]] void fail_at(const Tok& t, const std::string& msg) const { throw ParseError(msg, t.line, t.column); }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
  [[noreturn]] void fail_prev(const std::string& msg) const { fail_at(toks_[pos_ - 1], msg); }

  std::string word(const char* what) {
    if (peek().kind != Tok::Word) fail(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  void keyword(const char* kw) {
    if (peek().kind != Tok::Word || upper(peek().text) != kw) fail(std::string("expected ") + kw);
    ++pos_;
  }

  bool accept(const char* kw) {
    if (peek().kind == Tok::Word && upper(peek().text) == kw) {
      ++pos_;
      return true;
    }
    return false;
  }

  double number() {
    if (peek().kind != Tok::Number) fail("expected a number");
    const auto& t = toks_[pos_++];
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail_prev("malformed number '" + t.text + "'");
    return v;
  }

  Adjective adjective() {
    if (peek().kind != Tok::Quoted) fail("expected a quoted adjective such as 'LOW'");
    const auto& t = toks_[pos_++];
    const std::string a = upper(t.text);
    if (a == "LOW") return Adjective::Low;
    if (a == "MEDIUM") return Adjective::Medium;
    if (a == "HIGH") return Adjective::High;
    fail_prev("unknown adjective '" + t.text + "'");
  }

  Rule rule() {
    Rule r;
    r.line = peek().line;
    keyword("WHEN");
    const Tok& prop = peek();
    r.property_label = word("a property name");
    const std::string folded = fold_name(r.property_label);
    bool found = false;
    for (std::size_t i = 0; i < schema_.arity(); ++i) {
      if (fold_name(schema_.names()[i]) == folded) {
        r.when_property = i;
        found = true;
        break;
      }
    }
    if (!found) fail_at(prop, "unknown property " + r.property_label);
    keyword("IS");
    r.when_adjectives.push_back(adjective());
    while (accept("OR")) r.when_adjectives.push_back(adjective());
    if (accept("IF")) {
      const Tok& g = peek();
      const std::string name = upper(word("a guard"));
      if (name == "CACHE_PRESENT" || name == "CACHEHANDLER.ISPRESENT") r.guard = Guard::CachePresent;
      else if (name == "CACHE_ABSENT" || name == "CACHEHANDLER.ISEMPTY") r.guard = Guard::CacheAbsent;
      else if (name == "SERVERS_AT_MAX") r.guard = Guard::ServersAtMax;
      else if (name == "SERVERS_AT_MIN") r.guard = Guard::ServersAtMin;
      else fail_at(g, "unknown guard " + g.text);
    }
    keyword("THEN");
    keyword("UTILITY");
    keyword("OF");
    const Tok& act = peek();
    const std::string a = upper(word("an action"));
    if (a == "ADDCACHE") r.action = Action::AddCache;
    else if (a == "REMOVECACHE") r.action = Action::RemoveCache;
    else if (a == "ADDSERVER") r.action = Action::AddServer;
    else if (a == "REMOVESERVER") r.action = Action::RemoveServer;
    else if (a == "GROWCACHE") r.action = Action::GrowCache;
    else if (a == "SHRINKCACHE") r.action = Action::ShrinkCache;
    else fail_at(act, "unknown action " + act.text);
    keyword("IS");
    r.utility = adjective();
    return r;
  }

  std::vector<Tok> toks_;
  const ContextSchema& schema_;
  std::size_t pos_ = 0;
};

std::string quoted(Adjective a) { return "'" + upper(to_string(a)) + "'"; }

}  // namespace

AdaptationPolicy parse_policy(std::string_view text, const ContextSchema& schema) {
  return PolicyParser(lex(text), schema).parse();
}

std::string format_policy(const AdaptationPolicy& p) {
  std::ostringstream os;
  AdaptationPolicy defaults;
  if (p.utility_threshold != defaults.utility_threshold) os << "THRESHOLD " << format_number(p.utility_threshold) << '\n';
  if (p.default_cache_size != defaults.default_cache_size) os << "DEFAULT CACHESIZE " << p.default_cache_size << '\n';
  if (p.default_cache_validity_s != defaults.default_cache_validity_s)
    os << "DEFAULT CACHEVALIDITY " << p.default_cache_validity_s << '\n';
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const auto& r = p.rules[i];
    if (i > 0 || os.tellp() > 0) os << '\n';
    os << "WHEN " << r.property_label << " IS ";
    for (std::size_t k = 0; k < r.when_adjectives.size(); ++k)
      os << (k ? " OR " : "") << quoted(r.when_adjectives[k]);
    os << '\n';
    if (r.guard) os << "IF " << upper(to_string(*r.guard)) << '\n';
    os << "THEN UTILITY OF " << to_string(r.action) << " IS " << quoted(r.utility) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

bool guard_holds(Guard g, const Variant& v) {
  switch (g) {
    case Guard::CachePresent: return v.cache_exists;
    case Guard::CacheAbsent: return !v.cache_exists;
    case Guard::ServersAtMax: return v.data_servers >= Variant::kMaxServers;
    case Guard::ServersAtMin: return v.data_servers <= Variant::kMinServers;
  }
  return false;
}

}  // namespace

Variant apply_action(const AdaptationPolicy& policy, const Variant& state, Action action) {
  Variant v = state;
  switch (action) {
    case Action::AddCache:
      if (!v.cache_exists) {
        v.cache_exists = true;
        v.cache_size = std::clamp(policy.default_cache_size, Variant::kMinCache, Variant::kMaxCache);
        v.cache_validity_s = std::max(1, policy.default_cache_validity_s);
      }
      break;
    case Action::RemoveCache:
      v.cache_exists = false;
      v.cache_size = 0;
      v.cache_validity_s = 0;
      break;
    case Action::AddServer: v.data_servers = std::min(Variant::kMaxServers, v.data_servers + 1); break;
    case Action::RemoveServer: v.data_servers = std::max(Variant::kMinServers, v.data_servers - 1); break;
    case Action::GrowCache:
      if (v.cache_exists) v.cache_size = std::min(Variant::kMaxCache, v.cache_size * 2);
      break;
    case Action::ShrinkCache:
      if (v.cache_exists) v.cache_size = std::max(Variant::kMinCache, v.cache_size / 2);
      break;
  }
  return v;
}

StepResult step(const AdaptationPolicy& policy, const FuzzySets& sets, const Variant& state,
                const ContextInstance& inst, const Instrumentation* hooks) {
  Fuzzified fz = (hooks && hooks->rewrite_instance) ? fuzzify(sets, hooks->rewrite_instance(inst)) : fuzzify(sets, inst);
  if (hooks && hooks->rewrite_adjectives) hooks->rewrite_adjectives(fz);

  StepResult out{state, {}};
  for (const auto& r : policy.rules) {
    const FuzzyValue& fv = fz[r.when_property];
    const bool matches =
        std::find(r.when_adjectives.begin(), r.when_adjectives.end(), fv.adjective) != r.when_adjectives.end();
    if (!matches || (r.guard && !guard_holds(*r.guard, out.state))) continue;
    const double utility = policy.utility_values[static_cast<std::size_t>(r.utility)] * fv.degree;
    if (utility + 1e-12 < policy.utility_threshold) continue;
    out.state = apply_action(policy, out.state, r.action);
    out.fired.push_back(r.action);
  }
  return out;
}

VariantFlow run(const AdaptationPolicy& policy, const FuzzySets& sets, const Variant& initial,
                const ContextFlow& flow, const Instrumentation* hooks) {
  VariantFlow trace;
  trace.reserve(flow.size());
  Variant state = initial;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    auto r = step(policy, sets, state, flow.instances[i], hooks);
    state = r.state;
    trace.push_back({i + 1, flow.instances[i], state, std::move(r.fired)});
  }
  return trace;
}

TraceComparison trace_equal(const VariantFlow& a, const VariantFlow& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!(a[i].variant == b[i].variant)) return {false, i + 1};
  if (a.size() != b.size()) return {false, n + 1};
  return {true, std::nullopt};
}

std::string trace_to_jsonl(const VariantFlow& trace) {
  std::string out;
  for (const auto& e : trace) {
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["instance"] = e.instance.values;
    j["variant"] = {{"cache_exists", e.variant.cache_exists},
                    {"cache_size", e.variant.cache_size},
                    {"cache_validity_s", e.variant.cache_validity_s},
                    {"data_servers", e.variant.data_servers}};
    auto actions = nlohmann::ordered_json::array();
    for (auto a : e.actions) actions.push_back(to_string(a));
    j["actions"] = std::move(actions);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace aeq
