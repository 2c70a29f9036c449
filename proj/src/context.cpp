#include "aeq/context.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "aeq/error.hpp"

namespace aeq {

namespace {

constexpr double kGridTolerance = 1e-9;

// Smallest number of decimals (<= 12) that represents x exactly enough.
int decimals_of(double x) {
  double scale = 1.0;
  for (int d = 0; d <= 12; ++d, scale *= 10.0) {
    const double s = x * scale;
    if (std::fabs(s - std::round(s)) <= 1e-6) return d;
  }
  return 12;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::int64_t PropertySpec::cardinality() const {
  return static_cast<std::int64_t>(std::floor((upper - lower) / step + kGridTolerance)) + 1;
}

double PropertySpec::value_at(std::int64_t index) const {
  const int d = std::max(decimals_of(lower), decimals_of(step));
  const double scale = std::pow(10.0, d);
  const double raw = lower + static_cast<double>(index) * step;
  const double v = std::round(raw * scale) / scale;
  return v == 0.0 ? 0.0 : v;  // no negative zero
}

std::int64_t PropertySpec::nearest_index(double v) const {
  const auto idx = static_cast<std::int64_t>(std::llround((v - lower) / step));
  return std::clamp<std::int64_t>(idx, 0, cardinality() - 1);
}

bool PropertySpec::on_grid(double v) const {
  if (!(v >= lower - kGridTolerance && v <= upper + kGridTolerance)) return false;
  const double pos = (v - lower) / step;
  return std::fabs(pos - std::round(pos)) <= kGridTolerance;
}

double PropertySpec::normalize(double v) const {
  const double span = upper - lower;
  return span > 0.0 ? (v - lower) / span : 0.0;
}

ContextSchema::ContextSchema(std::vector<PropertySpec> properties, const std::vector<std::string>& constraint_sources,
                             OriginSpec origin)
    : properties_(std::move(properties)), origin_(std::move(origin)) {
  if (properties_.empty()) throw Error(ErrorCategory::Config, "schema needs at least one property");
  std::set<std::string> seen;
  for (const auto& p : properties_) {
    if (p.name.empty()) throw Error(ErrorCategory::Config, "property with empty name");
    if (!seen.insert(p.name).second) throw Error(ErrorCategory::Config, "duplicate property '" + p.name + "'");
    if (!(p.step > 0.0)) throw Error(ErrorCategory::Config, "property '" + p.name + "': step must be > 0");
    if (!(p.lower <= p.upper)) throw Error(ErrorCategory::Config, "property '" + p.name + "': lower > upper");
    const double pos = (p.upper - p.lower) / p.step;
    if (std::fabs(pos - std::round(pos)) > kGridTolerance)
      throw Error(ErrorCategory::Config,
                  "property '" + p.name + "': range is not a multiple of step " + fmt(p.step));
    if (p.kind == PropertyKind::Integer &&
        (p.lower != std::round(p.lower) || p.step != std::round(p.step)))
      throw Error(ErrorCategory::Config, "integer property '" + p.name + "' needs integral lower and step");
    names_.push_back(p.name);
  }
  constraints_.reserve(constraint_sources.size());
  for (const auto& src : constraint_sources) constraints_.push_back(Constraint::parse(src, names_));

  if (origin_.mode == OriginSpec::Mode::Explicit) {
    ContextInstance o{origin_.explicit_values};
    if (o.values.size() != arity())
      throw Error(ErrorCategory::Config, "explicit origin has wrong arity");
    auto v = validate(o);
    if (!v.valid) throw Error(ErrorCategory::Config, "explicit origin is not a valid instance: " + v.violations.front());
  }
}

std::optional<std::size_t> ContextSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

ValidityResult ContextSchema::validate(const ContextInstance& inst) const {
  if (inst.values.size() != arity())
    throw Error(ErrorCategory::Structural, "instance has " + std::to_string(inst.values.size()) +
                                               " values, schema has " + std::to_string(arity()) + " properties");
  ValidityResult r;
  for (std::size_t i = 0; i < arity(); ++i) {
    const auto& p = properties_[i];
    const double v = inst.values[i];
    if (!(v >= p.lower - kGridTolerance && v <= p.upper + kGridTolerance)) {
      r.violations.push_back(p.name + "=" + fmt(v) + " outside [" + fmt(p.lower) + ", " + fmt(p.upper) + "]");
    } else if (!p.on_grid(v)) {
      r.violations.push_back(p.name + "=" + fmt(v) + " not aligned to step " + fmt(p.step));
    }
  }
  // Constraints are only meaningful on finite values; bounds already reported.
  for (const auto& c : constraints_)
    if (!c.holds(inst.values)) r.violations.push_back("constraint violated: " + c.source());
  r.valid = r.violations.empty();
  return r;
}

bool ContextSchema::is_valid(const ContextInstance& inst) const {
  if (inst.values.size() != arity()) return false;
  for (std::size_t i = 0; i < arity(); ++i)
    if (!properties_[i].on_grid(inst.values[i])) return false;
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const Constraint& c) { return c.holds(inst.values); });
}

std::uint64_t ContextSchema::key(const ContextInstance& inst) const {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < arity(); ++i) {
    const auto& p = properties_[i];
    k = k * static_cast<std::uint64_t>(p.cardinality()) + static_cast<std::uint64_t>(p.nearest_index(inst.values[i]));
  }
  return k;
}

ContextInstance ContextSchema::snap(const ContextInstance& inst) const {
  ContextInstance out{inst.values};
  for (std::size_t i = 0; i < arity(); ++i) {
    const auto& p = properties_[i];
    out.values[i] = p.value_at(p.nearest_index(inst.values[i]));
  }
  return out;
}

ContextFlow make_flow(const ContextSchema& schema, std::string id, std::vector<ContextInstance> instances) {
  if (instances.empty()) throw Error(ErrorCategory::Precondition, "flow '" + id + "' is empty");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto v = schema.validate(instances[i]);
    if (!v.valid)
      throw Error(ErrorCategory::Constraint,
                  "flow '" + id + "' instance " + std::to_string(i) + ": " + v.violations.front());
  }
  return ContextFlow{std::move(id), std::move(instances)};
}

BigCount context_space_size(const ContextSchema& schema, SpaceMode mode, std::uint64_t cap) {
  BigCount product = 1;
  for (const auto& p : schema.properties()) product *= p.cardinality();
  if (mode == SpaceMode::Unconstrained) return product;

  if (product > cap)
    throw Error(ErrorCategory::Capacity, "exact space size needs " + product.str() +
                                             " grid points, above the enumeration cap of " + std::to_string(cap));
  const auto& props = schema.properties();
  std::vector<std::int64_t> idx(props.size(), 0);
  ContextInstance inst;
  inst.values.resize(props.size());
  for (std::size_t i = 0; i < props.size(); ++i) inst.values[i] = props[i].value_at(0);

  std::uint64_t count = 0;
  while (true) {
    if (std::all_of(schema.constraints().begin(), schema.constraints().end(),
                    [&](const Constraint& c) { return c.holds(inst.values); }))
      ++count;
    std::size_t d = 0;
    for (; d < props.size(); ++d) {
      if (++idx[d] < props[d].cardinality()) {
        inst.values[d] = props[d].value_at(idx[d]);
        break;
      }
      idx[d] = 0;
      inst.values[d] = props[d].value_at(0);
    }
    if (d == props.size()) break;
  }
  return count;
}

BigCount flow_space_size(const BigCount& space_size, std::uint64_t flow_length) {
  if (flow_length < 1) throw Error(ErrorCategory::Precondition, "flow length must be >= 1");
  return boost::multiprecision::pow(space_size, static_cast<unsigned>(flow_length));
}

BigCount flow_space_size(const ContextSchema& schema, std::uint64_t flow_length) {
  return flow_space_size(context_space_size(schema, SpaceMode::Unconstrained), flow_length);
}

ContextSchema web_server_schema() {
  return ContextSchema(
      {
          {"request_density", PropertyKind::Integer, 1, 1000, 1},
          {"file_number", PropertyKind::Integer, 1, 1000, 1},
          {"request_dispersion", PropertyKind::Real, 0, 1, 0.1},
      },
      {"file_number <= request_density"});
}

}  // namespace aeq
