#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gdb/acceptance.hpp"
#include "gdb/analysis.hpp"
#include "gdb/artifacts.hpp"
#include "gdb/core.hpp"
#include "gdb/errors.hpp"
#include "gdb/io.hpp"
#include "gdb/proto.hpp"

namespace py = pybind11;
using namespace gdb;

namespace {

py::dict detection_dict(const threat::DetectionReport &r) {
  py::list accused, evidence;
  for (auto id : r.accused) accused.append(id.value);
  for (const auto &e : r.evidence) {
    evidence.append(py::dict(py::arg("a") = e.pair.a.value, py::arg("b") = e.pair.b.value,
                             py::arg("bound_a") = e.bound_a, py::arg("bound_b") = e.bound_b,
                             py::arg("discrepancy") = e.discrepancy));
  }
  py::dict alarms;
  for (const auto &[id, res] : r.alarms) alarms[py::int_(id.value)] = res;
  return py::dict(py::arg("detected") = !r.empty(), py::arg("accused") = accused, py::arg("evidence") = evidence,
                  py::arg("alarms") = alarms);
}

py::dict result_dict(const proto::RunResult &r) {
  py::list estimates;
  for (const auto &e : r.estimates) {
    estimates.append(py::dict(py::arg("measurer") = e.measurer.value, py::arg("target") = e.target.value,
                              py::arg("bound_m") = e.bound_m, py::arg("method") = std::string(to_string(e.method)),
                              py::arg("auth_ok") = e.verified_auth, py::arg("surplus") = e.surplus));
  }
  std::ostringstream trace;
  simkit::write_trace_jsonl(r.trace, trace);
  return py::dict(py::arg("protocol") = std::string(to_string(r.protocol)), py::arg("estimates") = estimates,
                  py::arg("emissions") = r.trace.count_all(), py::arg("rapid") = r.rapid_count,
                  py::arg("pre_post") = r.pre_post_count,
                  py::arg("detection") = r.detection ? py::object(detection_dict(*r.detection)) : py::none(),
                  py::arg("trace_jsonl") = trace.str());
}

Scenario scenario_with_seed(const std::string &text, std::optional<std::uint64_t> seed) {
  auto s = io::parse_scenario(text);
  if (seed) s.rng_seed = *seed;
  return s;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Group distance bounding simulator.";

  static py::exception<Error> error(m, "GdbError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error &e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("input_error") = is_input_error(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("validate", [](const std::string &text) {
    py::list out;
    for (const auto &v : validate_scenario(io::parse_scenario(text))) {
      out.append(py::make_tuple(std::string(to_string(v.code)), v.field, v.message));
    }
    return out;
  }, py::arg("scenario_json"), "Invariant violations as (code, field, message) tuples.");

  m.def("run", [](const std::string &text, std::optional<std::uint64_t> seed) {
    const auto s = scenario_with_seed(text, seed);
    proto::RunResult r;
    {
      py::gil_scoped_release release;
      r = proto::run_scenario(s);
    }
    return result_dict(r);
  }, py::arg("scenario_json"), py::arg("seed") = py::none());

  m.def("run_to_dir", [](const std::string &path, const std::string &out, std::optional<std::uint64_t> seed) {
    const auto o = artifacts::run_to_dir(io::load_scenario(path), path, seed, out);
    py::dict digests;
    for (const auto &a : o.manifest.artifacts) digests[py::str(a.name)] = a.sha256;
    return digests;
  }, py::arg("scenario_path"), py::arg("out"), py::arg("seed") = py::none(),
        "Writes the run artifacts and returns {name: sha256}.");

  m.def("dbc", &analysis::dbc, py::arg("n"), py::arg("pr_ch"));
  m.def("dbc_avg", &analysis::dbc_avg, py::arg("n_i"), py::arg("pr_i"));
  m.def("dbc_ap", &analysis::dbc_ap, py::arg("n_a"), py::arg("n_p"), py::arg("pr_i"));
  m.def("figure_csv", &analysis::figure_csv, py::arg("which"));

  m.def("verify", [](bool quick, unsigned workers) {
    acceptance::Options opt;
    if (quick) opt.guess_trials = 10000;
    opt.workers = workers;
    std::vector<acceptance::CriterionResult> results;
    {
      py::gil_scoped_release release;
      results = acceptance::run_all(opt);
    }
    py::list out;
    for (const auto &r : results) out.append(py::make_tuple(r.id, r.name, r.pass, r.details));
    return out;
  }, py::arg("quick") = true, py::arg("workers") = 0);
}
