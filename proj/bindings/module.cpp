#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "preflearn/bilevel.hpp"
#include "preflearn/experiment.hpp"
#include "preflearn/forward.hpp"
#include "preflearn/instance_gen.hpp"
#include "preflearn/losses.hpp"
#include "preflearn/oco.hpp"

namespace py = pybind11;
using namespace preflearn;

namespace {

ParameterPoint simplex_pt(const Vec& v) {
  return ParameterPoint(v, ParameterSpace::simplex(static_cast<int>(v.size())));
}

ParameterPoint box_pt(const Vec& v, double lo, double hi) {
  return ParameterPoint(v, ParameterSpace::box(static_cast<int>(v.size()), lo, hi));
}

}  // namespace

PYBIND11_MODULE(prefcore, m) {
  m.doc() = "online learning of utility parameters from revealed actions";

  py::enum_<UtilityKind>(m, "UtilityKind")
      .value("QUAD_DIAG", UtilityKind::QuadDiag)
      .value("CES_RHO2", UtilityKind::CesRho2)
      .value("BILINEAR", UtilityKind::Bilinear)
      .value("COBB_DOUGLAS", UtilityKind::CobbDouglas)
      .value("CUSTOM_1D", UtilityKind::Custom1d);

  py::enum_<DomainKind>(m, "DomainKind")
      .value("CONT_KNAPSACK", DomainKind::ContKnapsack)
      .value("POLYTOPE", DomainKind::Polytope)
      .value("BIN_KNAPSACK", DomainKind::BinKnapsack)
      .value("EQ_KNAPSACK", DomainKind::EqKnapsack)
      .value("INTERVAL", DomainKind::Interval);

  py::enum_<NoiseMode>(m, "NoiseMode")
      .value("PERFECT", NoiseMode::Perfect)
      .value("UNIFORM_SMALL", NoiseMode::UniformSmall)
      .value("UNIFORM_LARGE", NoiseMode::UniformLarge)
      .value("SUBOPTIMAL_FEASIBLE", NoiseMode::SuboptimalFeasible);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("MD_ENTROPY", Algorithm::MdEntropy)
      .value("MD_EUCLID", Algorithm::MdEuclid)
      .value("IMPLICIT_SIM", Algorithm::ImplicitSim)
      .value("IMPLICIT_PRE", Algorithm::ImplicitPre);

  py::class_<UtilityForm>(m, "UtilityForm")
      .def_static("quad", &UtilityForm::quad, py::arg("diag"))
      .def_static("ces", &UtilityForm::ces)
      .def_static("bilinear", &UtilityForm::bilinear)
      .def_static("cobb_douglas", &UtilityForm::cobb_douglas)
      .def_readonly("kind", &UtilityForm::kind)
      .def_readonly("quad_diag", &UtilityForm::quad_diag);

  py::class_<Domain>(m, "Domain")
      .def_static("cont_knapsack", &Domain::cont_knapsack, py::arg("prices"),
                  py::arg("budget"))
      .def_static("polytope", &Domain::polytope, py::arg("m"), py::arg("n"),
                  py::arg("A"), py::arg("rhs"))
      .def_static("bin_knapsack", &Domain::bin_knapsack, py::arg("prices"),
                  py::arg("budget"))
      .def_static("eq_knapsack", &Domain::eq_knapsack, py::arg("prices"),
                  py::arg("budget"))
      .def_static("interval", &Domain::interval, py::arg("lo"), py::arg("hi"))
      .def("feasible", &Domain::feasible, py::arg("x"), py::arg("tol") = 1e-8)
      .def_readonly("kind", &Domain::kind)
      .def_readonly("prices", &Domain::prices)
      .def_readonly("budget", &Domain::budget);

  py::class_<Instance>(m, "Instance")
      .def_readonly("t", &Instance::t)
      .def_readonly("n", &Instance::n)
      .def_readonly("utility", &Instance::utility)
      .def_readonly("domain", &Instance::domain);
  m.def("make_instance", &make_instance, py::arg("t"), py::arg("utility"),
        py::arg("domain"));

  py::class_<ForwardSolution>(m, "ForwardSolution")
      .def_readonly("x", &ForwardSolution::x)
      .def_readonly("objective", &ForwardSolution::objective)
      .def_readonly("iterations", &ForwardSolution::iterations)
      .def("optimal",
           [](const ForwardSolution& s) { return s.status == SolveStatus::Optimal; });

  py::class_<LossRecord>(m, "LossRecord")
      .def_readonly("t", &LossRecord::t)
      .def_readonly("l_pre", &LossRecord::l_pre)
      .def_readonly("l_sub", &LossRecord::l_sub)
      .def_readonly("l_est", &LossRecord::l_est)
      .def_readonly("l_sim", &LossRecord::l_sim)
      .def_readonly("s", &LossRecord::s)
      .def_readonly("x_pred", &LossRecord::x_pred);

  m.def("c_map", &c_map, py::arg("x"), py::arg("utility"));
  m.def("eval_f", &eval_f, py::arg("x"), py::arg("theta"), py::arg("instance"));

  m.def(
      "solve_forward",
      [](const Vec& theta, const Instance& inst) {
        return solve_forward(simplex_pt(theta), inst);
      },
      py::arg("theta"), py::arg("instance"),
      "Forward solve with theta on the unit simplex");
  m.def(
      "solve_forward_box",
      [](const Vec& theta, double lo, double hi, const Instance& inst) {
        return solve_forward(box_pt(theta, lo, hi), inst);
      },
      py::arg("theta"), py::arg("lo"), py::arg("hi"), py::arg("instance"));
  m.def(
      "brute_force_forward",
      [](const Vec& theta, const Instance& inst, double resolution) {
        return brute_force_forward(simplex_pt(theta), inst, resolution);
      },
      py::arg("theta"), py::arg("instance"), py::arg("resolution"));

  m.def("project_simplex",
        [](const Vec& v) { return project_simplex(v).values; }, py::arg("v"));

  m.def(
      "md_entropy_step",
      [](const Vec& theta, const Vec& s, double eta) {
        const int n = static_cast<int>(theta.size());
        const ProxSetup setup =
            make_prox_setup(Geometry::EntropySimplex, ParameterSpace::simplex(n), 1.0);
        return prox_map(simplex_pt(theta), scaled(s, eta), setup).values;
      },
      py::arg("theta"), py::arg("s"), py::arg("eta"),
      "One multiplicative-weights step on the simplex");
  m.def(
      "md_euclid_box_step",
      [](const Vec& theta, const Vec& s, double eta, double lo, double hi) {
        const int n = static_cast<int>(theta.size());
        const ProxSetup setup =
            make_prox_setup(Geometry::EuclidBox, ParameterSpace::box(n, lo, hi), 1.0);
        return prox_map(box_pt(theta, lo, hi), scaled(s, eta), setup).values;
      },
      py::arg("theta"), py::arg("s"), py::arg("eta"), py::arg("lo"), py::arg("hi"));
  m.def(
      "implicit_sim_step",
      [](const Vec& theta, const Vec& s, double eta) {
        const StepSchedule sched = StepSchedule::custom_steps({eta});
        return implicit_sim_step(simplex_pt(theta), s, 1, sched).values;
      },
      py::arg("theta"), py::arg("s"), py::arg("eta"));
  m.def(
      "implicit_pre_step",
      [](const Vec& theta, double eta, const Instance& inst, const Vec& y) {
        const ParameterPoint th = inst.domain.kind == DomainKind::Interval
                                      ? box_pt(theta, -3.0, 3.0)
                                      : simplex_pt(theta);
        const PreStepResult res = implicit_pre_step(th, eta, inst, y);
        return py::make_tuple(res.theta_next.values, res.objective,
                              res.patterns_solved);
      },
      py::arg("theta"), py::arg("eta"), py::arg("instance"), py::arg("y"));

  m.def(
      "eval_losses",
      [](const Vec& theta_t, const Instance& inst, const Vec& y, const Vec& theta_true) {
        if (inst.domain.kind == DomainKind::Interval)
          return eval_losses(box_pt(theta_t, -3.0, 3.0), inst,
                             Observation{y, NoiseMode::Perfect},
                             box_pt(theta_true, -3.0, 3.0));
        return eval_losses(simplex_pt(theta_t), inst, Observation{y, NoiseMode::Perfect},
                           simplex_pt(theta_true));
      },
      py::arg("theta_t"), py::arg("instance"), py::arg("y"), py::arg("theta_true"));

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("n", &GenConfig::n)
      .def_readwrite("m", &GenConfig::m)
      .def_readwrite("T", &GenConfig::T)
      .def_readwrite("instance_count", &GenConfig::instance_count)
      .def_readwrite("domain", &GenConfig::domain)
      .def_readwrite("utility", &GenConfig::utility)
      .def_readwrite("seed", &GenConfig::seed)
      .def_readwrite("noise", &GenConfig::noise);

  py::class_<InstanceStream>(m, "InstanceStream")
      .def_property_readonly("theta_true",
                             [](const InstanceStream& s) { return s.theta_true.values; })
      .def_readonly("quad_diag", &InstanceStream::quad_diag)
      .def_readonly("steps", &InstanceStream::steps)
      .def("serialize", [](const InstanceStream& s) {
        std::ostringstream os;
        write_stream(os, s);
        return os.str();
      });
  m.def("gen_instance_stream", &gen_instance_stream, py::arg("config"),
        py::arg("instance_index"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("gen", &ExperimentConfig::gen)
      .def_readwrite("algo", &ExperimentConfig::algo)
      .def_readwrite("jobs", &ExperimentConfig::jobs);

  m.def(
      "run_experiment_to_dir",
      [](const ExperimentConfig& cfg, const std::string& out_dir, bool plots) {
        const ExperimentResult result = run_experiment(cfg);
        const Summary summary = aggregate(result);
        EmitOptions opts;
        opts.plots = plots;
        emit(result, summary, out_dir, opts);
        return result.invariants_ok;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("plots") = false,
      "Run a batch and write records.csv / summary.csv (and plots) to out_dir");
}
