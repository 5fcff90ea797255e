// SPDX-License-Identifier: Apache-2.0
// Python bindings for the solver, the differentiable layers, the exact
// gradient oracle, the generators, and the portfolio ops.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bpqp/admm.hpp"
#include "bpqp/backward.hpp"
#include "bpqp/generators.hpp"
#include "bpqp/layers.hpp"
#include "bpqp/portfolio.hpp"

namespace py = pybind11;

namespace {

bpqp::GenSpec make_spec(bpqp::ProblemFamily family, bpqp::Index d,
                        bpqp::Index m_eq, bpqp::Index n_ineq,
                        std::uint64_t seed) {
  bpqp::GenSpec spec;
  spec.family = family;
  spec.d = d;
  spec.m_eq = m_eq;
  spec.n_ineq = n_ineq;
  spec.seed = seed;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_bpqp, m) {
  m.doc() = "Differentiable convex optimization layers";

  py::class_<bpqp::SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_static("standard", &bpqp::SolverSettings::standard)
      .def_static("portfolio", &bpqp::SolverSettings::portfolio)
      .def_readwrite("eps_abs", &bpqp::SolverSettings::eps_abs)
      .def_readwrite("eps_rel", &bpqp::SolverSettings::eps_rel)
      .def_readwrite("max_iter", &bpqp::SolverSettings::max_iter)
      .def_readwrite("adaptive_rho", &bpqp::SolverSettings::adaptive_rho)
      .def_readwrite("polish", &bpqp::SolverSettings::polish)
      .def_readwrite("kkt_delta", &bpqp::SolverSettings::kkt_delta);

  py::class_<bpqp::QpProblem>(m, "QpProblem")
      .def(py::init([](const bpqp::Mat& p, const bpqp::Vec& q,
                       const bpqp::Mat& a, const bpqp::Vec& b,
                       const bpqp::Mat& g, const bpqp::Vec& c) {
             bpqp::QpProblem problem;
             problem.p = p;
             problem.q = q;
             problem.a = a;
             problem.b = b;
             problem.g = g;
             problem.c = c;
             problem.validate();
             return problem;
           }),
           py::arg("P"), py::arg("q"), py::arg("A"), py::arg("b"),
           py::arg("G"), py::arg("c"))
      .def_readonly("P", &bpqp::QpProblem::p)
      .def_readonly("q", &bpqp::QpProblem::q)
      .def_readonly("A", &bpqp::QpProblem::a)
      .def_readonly("b", &bpqp::QpProblem::b)
      .def_readonly("G", &bpqp::QpProblem::g)
      .def_readonly("c", &bpqp::QpProblem::c)
      .def("dim", &bpqp::QpProblem::dim)
      .def("num_eq", &bpqp::QpProblem::num_eq)
      .def("num_ineq", &bpqp::QpProblem::num_ineq);

  py::class_<bpqp::Solution>(m, "Solution")
      .def_readonly("z", &bpqp::Solution::z)
      .def_readonly("nu", &bpqp::Solution::nu)
      .def_readonly("lam", &bpqp::Solution::lambda)
      .def_readonly("iterations", &bpqp::Solution::iterations)
      .def_readonly("primal_residual", &bpqp::Solution::primal_residual)
      .def_readonly("dual_residual", &bpqp::Solution::dual_residual)
      .def_readonly("polished", &bpqp::Solution::polished)
      .def_property_readonly("status", [](const bpqp::Solution& sol) {
        return bpqp::to_string(sol.status);
      });

  py::class_<bpqp::GradientBundle>(m, "GradientBundle")
      .def_readonly("dP", &bpqp::GradientBundle::dP)
      .def_readonly("dq", &bpqp::GradientBundle::dq)
      .def_readonly("dA", &bpqp::GradientBundle::dA)
      .def_readonly("db", &bpqp::GradientBundle::db)
      .def_readonly("dG", &bpqp::GradientBundle::dG)
      .def_readonly("dc", &bpqp::GradientBundle::dc)
      .def_readonly("active_indices", &bpqp::GradientBundle::active_indices)
      .def_readonly("kkt_residual", &bpqp::GradientBundle::kkt_residual);

  py::class_<bpqp::LayerTape>(m, "LayerTape")
      .def_property_readonly("z",
                             [](const bpqp::LayerTape& tape) {
                               return tape.solution().z;
                             })
      .def_property_readonly("active", [](const bpqp::LayerTape& tape) {
        return tape.active().indices;
      });

  py::class_<bpqp::SocpTape>(m, "SocpTape")
      .def_readonly("z", &bpqp::SocpTape::z)
      .def_readonly("lam", &bpqp::SocpTape::lambda)
      .def_readonly("active", &bpqp::SocpTape::active);

  m.def("solve",
        [](const bpqp::QpProblem& problem, const bpqp::SolverSettings& s) {
          return bpqp::admm_solve(problem, s);
        },
        py::arg("problem"), py::arg("settings") = bpqp::SolverSettings::standard());

  m.def("kkt_residual_norm", &bpqp::kkt_residual_norm, py::arg("problem"),
        py::arg("z"), py::arg("nu"), py::arg("lam"));

  m.def("qp_forward", &bpqp::qp_layer_forward, py::arg("problem"),
        py::arg("settings") = bpqp::SolverSettings::standard());
  m.def("qp_backward", &bpqp::qp_layer_backward, py::arg("tape"),
        py::arg("dl_dz"));

  m.def("lp_forward",
        [](const bpqp::Vec& theta, double eps, const bpqp::Mat& a,
           const bpqp::Vec& b, const bpqp::Mat& g, const bpqp::Vec& h,
           const bpqp::SolverSettings& s) {
          bpqp::LpLayerSpec spec;
          spec.theta = theta;
          spec.eps = eps;
          spec.a = a;
          spec.b = b;
          spec.g = g;
          spec.h = h;
          return bpqp::lp_layer_forward(spec, s);
        },
        py::arg("theta"), py::arg("eps"), py::arg("A"), py::arg("b"),
        py::arg("G"), py::arg("h"),
        py::arg("settings") = bpqp::SolverSettings::standard());
  m.def("lp_backward", &bpqp::lp_layer_backward, py::arg("tape"),
        py::arg("dl_dz"));

  m.def("socp_forward",
        [](const bpqp::Vec& q, const std::vector<bpqp::Vec>& a,
           const bpqp::Vec& b) {
          bpqp::SocpLayerSpec spec;
          spec.q = q;
          spec.a = a;
          spec.b = b;
          const bpqp::SocpForward fwd = bpqp::socp_layer_forward(spec);
          return py::make_tuple(fwd.z, fwd.lambda, fwd.tape);
        },
        py::arg("q"), py::arg("a"), py::arg("b"));
  m.def("socp_backward",
        [](const bpqp::SocpTape& tape, const bpqp::Vec& dl_dz, double delta) {
          const bpqp::SocpGradients grad =
              bpqp::socp_layer_backward(tape, dl_dz, delta);
          return py::make_tuple(grad.dq, grad.da, grad.db);
        },
        py::arg("tape"), py::arg("dl_dz"), py::arg("delta") = 1e-6);

  m.def("attach_external_solution",
        [](const bpqp::QpProblem& problem, const bpqp::Vec& z,
           const bpqp::Vec& nu, const bpqp::Vec& lam, double kkt_tol) {
          return bpqp::attach_external_solution(problem, z, nu, lam, kkt_tol);
        },
        py::arg("problem"), py::arg("z"), py::arg("nu"), py::arg("lam"),
        py::arg("kkt_tol") = 1e-4);

  m.def("exact_backward_oracle", &bpqp::exact_backward_oracle,
        py::arg("problem"), py::arg("solution"), py::arg("dl_dz"));
  m.def("cosine_similarity", &bpqp::cosine_similarity, py::arg("a"),
        py::arg("b"));
  m.def("gradient_agreement", &bpqp::gradient_agreement, py::arg("a"),
        py::arg("b"), py::arg("floor") = 1e-8);

  m.def("gen_qp",
        [](bpqp::Index d, bpqp::Index m_eq, bpqp::Index n_ineq,
           std::uint64_t seed) {
          return bpqp::gen_qp(
              make_spec(bpqp::ProblemFamily::Qp, d, m_eq, n_ineq, seed));
        },
        py::arg("d") = 10, py::arg("m_eq") = 5, py::arg("n_ineq") = 5,
        py::arg("seed") = 0);
  m.def("gen_lp",
        [](bpqp::Index d, bpqp::Index m_eq, bpqp::Index n_ineq,
           std::uint64_t seed) {
          const bpqp::LpLayerSpec spec = bpqp::gen_lp(
              make_spec(bpqp::ProblemFamily::Lp, d, m_eq, n_ineq, seed));
          return py::make_tuple(spec.theta, spec.a, spec.b, spec.g, spec.h);
        },
        py::arg("d") = 10, py::arg("m_eq") = 5, py::arg("n_ineq") = 5,
        py::arg("seed") = 0);
  m.def("gen_socp",
        [](bpqp::Index d, std::uint64_t seed) {
          const bpqp::SocpLayerSpec spec =
              bpqp::gen_socp(make_spec(bpqp::ProblemFamily::Socp, d, 0, 1, seed));
          return py::make_tuple(spec.q, spec.a, spec.b);
        },
        py::arg("d") = 10, py::arg("seed") = 0);
  m.def("derive_seed", &bpqp::derive_seed, py::arg("base"), py::arg("index"));

  m.def("mvo_forward",
        [](const bpqp::Vec& mu_hat, const bpqp::Mat& sigma, double gamma,
           const bpqp::SolverSettings& s) {
          bpqp::MvoSpec spec;
          spec.gamma = gamma;
          spec.sigma = sigma;
          return bpqp::mvo_forward(mu_hat, spec, s);
        },
        py::arg("mu_hat"), py::arg("sigma"), py::arg("gamma") = 1.0,
        py::arg("settings") = bpqp::SolverSettings::portfolio());
  m.def("mvo_backward", &bpqp::mvo_backward, py::arg("tape"),
        py::arg("dl_dw"));
}
