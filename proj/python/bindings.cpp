#include <optional>
#include <random>
#include <string>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liftguard/commands.hpp"
#include "liftguard/errors.hpp"
#include "liftguard/lift.hpp"
#include "liftguard/model.hpp"
#include "liftguard/zeros.hpp"

namespace py = pybind11;

namespace liftguard {
namespace {

using Quad = std::tuple<Matrix, Matrix, Matrix, Matrix>;

Quad quad(const StateSpace& s) { return {s.A, s.B, s.C, s.D}; }

JobSpec job_from(const std::string& plant_json, std::uint64_t seed) {
  JobSpec job;
  job.plant_text = plant_json;
  job.seed = seed;
  return job;
}

}  // namespace
}  // namespace liftguard

PYBIND11_MODULE(_core, m) {
  using namespace liftguard;
  m.doc() = "liftguard core: sampled-data loops, stealthy attacks and dual-rate lifting";
  m.attr("__version__") = std::string(tool_version());

  static py::exception<Error> error(m, "LiftguardError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args = (message, kind, detail)
      const py::tuple args = py::make_tuple(e.what(), std::string(to_string(e.kind())), e.detail());
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });
  m.def("exit_code", [](const std::string& kind) {
    for (ErrorKind k : {ErrorKind::kDimension, ErrorKind::kArgument, ErrorKind::kParse, ErrorKind::kModel,
                        ErrorKind::kNumeric, ErrorKind::kPrecondition, ErrorKind::kCapability,
                        ErrorKind::kConfiguration}) {
      if (to_string(k) == kind) return exit_code(k);
    }
    throw py::value_error("unknown error kind '" + kind + "'");
  }, py::arg("kind"), "Process exit code for an error kind.");

  m.def(
      "discretize",
      [](const Matrix& Ac, const Matrix& Bc, const Matrix& Cc, const Matrix& Dc, double T) {
        return quad(discretize(make_continuous_plant(Ac, Bc, Cc, Dc), T).system);
      },
      py::arg("Ac"), py::arg("Bc"), py::arg("Cc"), py::arg("Dc"), py::arg("T"),
      "Zero-order-hold discretization; returns (A, B, C, D).");

  m.def(
      "transmission_zeros",
      [](const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<Complex> out;
        for (const ZeroRecord& z : transmission_zeros(StateSpace{A, B, C, D}, rng).zeros) out.push_back(z.z);
        return out;
      },
      py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"), py::arg("seed") = 0,
      "Finite transmission zeros of a discrete system.");

  m.def(
      "lift",
      [](const Matrix& Ac, const Matrix& Bc, const Matrix& Cc, const Matrix& Dc, double T, int m_rate) {
        return quad(build_lifted(make_continuous_plant(Ac, Bc, Cc, Dc), T, m_rate).system);
      },
      py::arg("Ac"), py::arg("Bc"), py::arg("Cc"), py::arg("Dc"), py::arg("T"), py::arg("m"),
      "Lifted dual-rate system (Atilde, Btilde, Ctilde, Dtilde).");

  m.def(
      "analyze",
      [](const std::string& plant, const std::string& m_rate, double theta, std::uint64_t seed) {
        JobSpec job = job_from(plant, seed);
        job.m = m_rate;
        job.theta = theta;
        return format_json(cmd_analyze(job));
      },
      py::arg("plant"), py::arg("m") = "auto", py::arg("theta") = 0.01, py::arg("seed") = 0,
      "Vulnerability report for a plant JSON document; returns JSON text.");

  m.def(
      "attack",
      [](const std::string& plant, const std::string& channel, const std::string& mode,
         std::optional<int> horizon, double theta, std::uint64_t seed) {
        JobSpec job = job_from(plant, seed);
        job.channel = channel;
        job.mode = mode;
        job.horizon = horizon;
        job.theta = theta;
        return format_json(cmd_attack(job));
      },
      py::arg("plant"), py::arg("channel") = "actuator", py::arg("mode") = "single",
      py::arg("horizon") = py::none(), py::arg("theta") = 0.01, py::arg("seed") = 0,
      "Attack plan for a plant JSON document; returns JSON text.");

  m.def(
      "simulate",
      [](const std::string& plant, std::optional<std::string> plan, const std::string& mode,
         const std::string& m_rate, std::optional<int> horizon, double theta, std::uint64_t seed) {
        JobSpec job = job_from(plant, seed);
        job.plan_text = std::move(plan);
        job.mode = mode;
        job.m = m_rate;
        job.horizon = horizon;
        job.theta = theta;
        SimulateOutput out = cmd_simulate(job);
        return py::make_tuple(format_json(out.report), out.trace_csv, out.intersample_csv);
      },
      py::arg("plant"), py::arg("plan") = py::none(), py::arg("mode") = "single", py::arg("m") = "auto",
      py::arg("horizon") = py::none(), py::arg("theta") = 0.01, py::arg("seed") = 0,
      "Closed-loop run; returns (verdict JSON, trace CSV, intersample CSV).");

  m.def(
      "verify",
      [](int trials, std::uint64_t seed, bool inject_fault) {
        JobSpec job;
        job.trials = trials;
        job.seed = seed;
        job.inject_fault = inject_fault;
        return format_json(cmd_verify(job));
      },
      py::arg("trials") = 100, py::arg("seed") = 0, py::arg("inject_fault") = false,
      "Randomized property suites; returns JSON text.");
}
