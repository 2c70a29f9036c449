#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "aeq/commands.hpp"
#include "aeq/error.hpp"
#include "aeq/io.hpp"
#include "aeq/metric.hpp"
#include "aeq/policy.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

aeq::ContextFlow to_flow(const std::vector<std::vector<double>>& rows, const std::string& id = "flow") {
  aeq::ContextFlow f{id, {}};
  for (const auto& r : rows) f.instances.push_back({r});
  return f;
}

py::object big_int(const aeq::BigCount& n) { return py::int_(py::str(n.str())); }

py::dict variant_dict(const aeq::Variant& v) {
  return py::dict("cache_exists"_a = v.cache_exists, "cache_size"_a = v.cache_size,
                  "cache_validity_s"_a = v.cache_validity_s, "data_servers"_a = v.data_servers);
}

aeq::Variant variant_from(const py::dict& d) {
  aeq::Variant v;
  if (d.contains("cache_exists")) v.cache_exists = d["cache_exists"].cast<bool>();
  if (d.contains("cache_size")) v.cache_size = d["cache_size"].cast<int>();
  if (d.contains("cache_validity_s")) v.cache_validity_s = d["cache_validity_s"].cast<int>();
  if (d.contains("data_servers")) v.data_servers = d["data_servers"].cast<int>();
  if (!v.valid()) throw aeq::Error(aeq::ErrorCategory::Config, "initial variant violates the variant constraints");
  return v;
}

aeq::EpConfig ep_config(std::optional<double> rho, std::optional<double> epsilon, std::optional<std::size_t> wmax) {
  aeq::EpConfig c;
  if (rho) c.violence_ratio = *rho;
  if (epsilon) c.min_violent_distance = *epsilon;
  if (wmax) c.window_max = *wmax;
  return c;
}

struct Policy {
  aeq::AdaptationPolicy policy;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Artificial-earthquake test generation and mutation analysis for adaptive systems";
  m.attr("__version__") = aeq::kToolVersion;

  // Leaked on purpose: it must outlive interpreter shutdown.
  static auto* error = new py::exception<aeq::Error>(m, "AeqError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const aeq::Error& e) {
      const char* category = aeq::to_string(e.category());
      py::object inst = py::reinterpret_borrow<py::object>(error->ptr())(std::string(category) + " error: " + e.what());
      inst.attr("category") = category;
      PyErr_SetObject(error->ptr(), inst.ptr());
    }
  });

  py::class_<aeq::ContextSchema>(m, "Schema")
      .def_static("load", [](const std::filesystem::path& p) { return aeq::load_schema_document(p).schema; },
                  "path"_a)
      .def_static("web_server", &aeq::web_server_schema)
      .def_property_readonly("names", &aeq::ContextSchema::names)
      .def("is_valid", [](const aeq::ContextSchema& s, std::vector<double> v) { return s.is_valid({v}); })
      .def("violations",
           [](const aeq::ContextSchema& s, std::vector<double> v) { return s.validate({v}).violations; })
      .def("distance",
           [](const aeq::ContextSchema& s, std::vector<double> a, std::vector<double> b) {
             return aeq::distance(s, {a}, {b});
           })
      .def(
          "space_size",
          [](const aeq::ContextSchema& s, bool exact) {
            return big_int(aeq::context_space_size(s, exact ? aeq::SpaceMode::Exact : aeq::SpaceMode::Unconstrained));
          },
          "exact"_a = false);

  m.def(
      "detect_ep",
      [](const aeq::ContextSchema& s, const std::vector<std::vector<double>>& flow, std::optional<double> rho,
         std::optional<double> epsilon, std::optional<std::size_t> window_max) {
        const auto r = aeq::detect_ep(s, to_flow(flow), ep_config(rho, epsilon, window_max));
        py::list windows;
        for (const auto& w : r.windows) windows.append(py::make_tuple(w.start, w.end, aeq::to_string(w.direction)));
        return py::dict("ep_count"_a = r.ep_count, "shape"_a = aeq::to_string(r.shape),
                        "oscillation_satisfied"_a = r.oscillation_satisfied, "windows"_a = windows,
                        "origin_distance_series"_a = r.origin_distance_series);
      },
      "schema"_a, "flow"_a, "rho"_a = py::none(), "epsilon"_a = py::none(), "window_max"_a = py::none());

  m.def(
      "classify_shape", [](const std::vector<double>& series) { return aeq::to_string(aeq::classify_shape(series)); },
      "series"_a);

  py::class_<Policy>(m, "Policy")
      .def_static(
          "parse", [](const std::string& text, const aeq::ContextSchema& s) { return Policy{aeq::parse_policy(text, s)}; },
          "text"_a, "schema"_a)
      .def_property_readonly("rule_count", [](const Policy& p) { return p.policy.rules.size(); })
      .def("format", [](const Policy& p) { return aeq::format_policy(p.policy); })
      .def(
          "run",
          [](const Policy& p, const aeq::ContextSchema& s, const std::vector<std::vector<double>>& flow,
             std::optional<py::dict> initial) {
            const auto start = initial ? variant_from(*initial) : aeq::Variant{};
            for (const auto& row : flow) {
              const auto v = s.validate({row});
              if (!v.valid) throw aeq::Error(aeq::ErrorCategory::Constraint, "invalid instance: " + v.violations[0]);
            }
            py::list out;
            for (const auto& e : aeq::run(p.policy, aeq::FuzzySets::defaults(s), start, to_flow(flow))) {
              py::list actions;
              for (auto a : e.actions) actions.append(aeq::to_string(a));
              out.append(py::dict("step"_a = e.step, "variant"_a = variant_dict(e.variant), "actions"_a = actions));
            }
            return out;
          },
          "schema"_a, "flow"_a, "initial"_a = py::none());

  m.def(
      "generate",
      [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> count, std::optional<std::size_t> flow_length, bool trace) {
        aeq::GenerateOptions o;
        o.config = config;
        o.out = out;
        o.seed = seed;
        o.count = count;
        o.flow_length = flow_length;
        o.trace = trace;
        py::gil_scoped_release release;
        return aeq::cmd_generate(o);
      },
      "config"_a, "out"_a, "seed"_a = py::none(), "count"_a = py::none(), "flow_length"_a = py::none(),
      "trace"_a = false);

  m.def(
      "profile",
      [](const std::filesystem::path& flow, const std::filesystem::path& schema, const std::filesystem::path& out) {
        aeq::ProfileOptions o;
        o.flow = flow;
        o.schema = schema;
        o.out = out;
        return aeq::cmd_profile(o);
      },
      "flow"_a, "schema"_a, "out"_a);

  m.def(
      "mutate",
      [](const std::filesystem::path& config, const std::vector<std::filesystem::path>& suites,
         const std::filesystem::path& out, std::size_t jobs, std::optional<std::filesystem::path> plan) {
        aeq::MutateOptions o;
        o.config = config;
        o.suites = suites;
        o.out = out;
        o.jobs = jobs;
        o.plan = plan;
        py::gil_scoped_release release;
        return aeq::cmd_mutate(o);
      },
      "config"_a, "suites"_a, "out"_a, "jobs"_a = 1, "plan"_a = py::none());

  m.def(
      "report",
      [](const std::filesystem::path& matrix, const std::string& format) {
        aeq::ReportOptions o;
        o.matrix = matrix;
        o.format = format;
        return aeq::cmd_report(o);
      },
      "matrix"_a, "format"_a = "text");
}
