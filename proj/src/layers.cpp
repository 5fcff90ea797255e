// SPDX-License-Identifier: Apache-2.0

#include "bpqp/layers.hpp"

#include <cmath>

namespace bpqp {

namespace {

Mat active_rows(const Mat& g, const std::vector<Index>& indices) {
  Mat rows(static_cast<Index>(indices.size()), g.cols());
  for (size_t k = 0; k < indices.size(); ++k) {
    rows.row(static_cast<Index>(k)) = g.row(indices[k]);
  }
  return rows;
}

}  // namespace

LayerTape::LayerTape(QpProblem problem, Solution solution, ActiveSet active,
                     double delta)
    : problem_(std::move(problem)),
      solution_(std::move(solution)),
      active_(std::move(active)),
      delta_(delta) {}

const BackwardEngine& LayerTape::engine() const {
  if (!engine_) {
    engine_ = std::make_shared<const BackwardEngine>(
        problem_.p, active_rows(problem_.g, active_.indices), problem_.a,
        delta_);
  }
  return *engine_;
}

std::pair<Vec, LayerTape> qp_layer_forward(const QpProblem& problem,
                                           const SolverSettings& settings) {
  const Solution solution = admm_solve(problem, settings);
  if (solution.status != SolveStatus::Solved) {
    throw LayerForwardFailed(std::string("forward solve ended with status ") +
                             to_string(solution.status));
  }
  ActiveSet active = detect_active_set(problem, solution);
  Vec z = solution.z;
  return {std::move(z), LayerTape(problem, solution, std::move(active),
                                  settings.kkt_delta)};
}

GradientBundle qp_layer_backward(const LayerTape& tape, const Vec& dl_dz) {
  const BackwardSolution bs = tape.engine().solve(dl_dz);
  GradientBundle bundle =
      assemble_qp_gradients(tape.solution(), tape.active(), bs);
  bundle.kkt_residual =
      kkt_residual_norm(tape.problem(), tape.solution().z,
                        tape.solution().nu, tape.solution().lambda);
  return bundle;
}

QpProblem lower_lp(const LpLayerSpec& spec) {
  QpProblem problem;
  const Index d = spec.theta.size();
  problem.p = Mat::Zero(d, d);
  problem.p.diagonal().setConstant(2.0 * spec.eps);
  problem.q = spec.theta;
  problem.a = spec.a;
  problem.b = spec.b;
  problem.g = spec.g;
  problem.c = spec.h;
  return problem;
}

std::pair<Vec, LayerTape> lp_layer_forward(const LpLayerSpec& spec,
                                           const SolverSettings& settings) {
  if (spec.eps <= 0) {
    throw std::invalid_argument("lp smoothing eps must be positive");
  }
  return qp_layer_forward(lower_lp(spec), settings);
}

Vec lp_layer_backward(const LayerTape& tape, const Vec& dl_dz) {
  return qp_layer_backward(tape, dl_dz).dq;
}

SocpForward socp_layer_forward(const SocpLayerSpec& spec,
                               const SolverSettings& settings) {
  (void)settings;
  const Index m = spec.num_constraints();
  if (m < 1) {
    throw UnsupportedSocp("at least one cone constraint is required");
  }
  if (static_cast<Index>(spec.a.size()) != m) {
    throw std::invalid_argument("a/b constraint counts disagree");
  }
  for (const Vec& a_i : spec.a) {
    if (a_i.size() != spec.dim() || a_i.lpNorm<Eigen::Infinity>() != 0.0) {
      throw UnsupportedSocp(
          "closed-form forward requires a_i = 0; supply the solution "
          "externally for general instances");
    }
  }
  if (m != 1) {
    throw UnsupportedSocp("closed-form forward requires a single constraint");
  }
  if (spec.b(0) <= 0) {
    throw LayerForwardFailed("ball constraint with nonpositive radius");
  }

  SocpForward fwd;
  const double q_norm = spec.q.norm();
  if (q_norm == 0.0) {
    fwd.z = Vec::Zero(spec.dim());
    fwd.lambda = Vec::Zero(1);
  } else {
    fwd.z = -spec.b(0) / q_norm * spec.q;
    fwd.lambda = Vec::Constant(1, q_norm);
  }
  fwd.tape.spec = spec;
  fwd.tape.z = fwd.z;
  fwd.tape.lambda = fwd.lambda;
  const double threshold =
      1e-6 * (1.0 + fwd.lambda.lpNorm<Eigen::Infinity>());
  for (Index i = 0; i < m; ++i) {
    if (fwd.lambda(i) >= threshold) fwd.tape.active.push_back(i);
  }
  return fwd;
}

SocpGradients socp_layer_backward(const SocpTape& tape, const Vec& dl_dz,
                                  double delta) {
  const Index d = tape.spec.dim();
  const Index m = tape.spec.num_constraints();
  SocpGradients grads;
  grads.dq = Vec::Zero(d);
  grads.da.assign(static_cast<size_t>(m), Vec::Zero(d));
  grads.db = Vec::Zero(m);
  if (tape.active.empty()) {
    return grads;
  }
  const double t0 = tape.z.norm();
  if (t0 == 0.0) {
    throw SingularBackwardSystem("solution at the cone vertex");
  }
  double t1 = 0.0;
  for (Index i : tape.active) t1 += tape.lambda(i);

  BackwardProblem bp;
  bp.p_prime = (t1 / t0) * Mat::Identity(d, d) -
               (t1 / (t0 * t0 * t0)) * (tape.z * tape.z.transpose());
  bp.q_prime = dl_dz;
  bp.a_prime.resize(static_cast<Index>(tape.active.size()), d);
  for (size_t k = 0; k < tape.active.size(); ++k) {
    bp.a_prime.row(static_cast<Index>(k)) =
        (tape.spec.a[static_cast<size_t>(tape.active[k])] + tape.z / t0)
            .transpose();
  }
  bp.g_plus = Mat::Zero(0, d);
  bp.rhs_b = Vec::Zero(bp.a_prime.rows());
  bp.rhs_c = Vec::Zero(0);

  const BackwardSolution bs = solve_backward(bp, delta);
  grads.dq = bs.z_tilde;
  for (size_t k = 0; k < tape.active.size(); ++k) {
    const Index i = tape.active[k];
    grads.da[static_cast<size_t>(i)] =
        tape.lambda(i) * bs.z_tilde + bs.nu_tilde(static_cast<Index>(k)) * tape.z;
    grads.db(i) = -bs.nu_tilde(static_cast<Index>(k));
  }
  return grads;
}

LayerTape attach_external_solution(const QpProblem& problem, const Vec& z,
                                   const Vec& nu, const Vec& lambda,
                                   double kkt_tol) {
  problem.validate();
  if (z.size() != problem.dim() || nu.size() != problem.num_eq() ||
      lambda.size() != problem.num_ineq()) {
    throw std::invalid_argument("external solution dimensions disagree");
  }
  const double residual = kkt_residual_norm(problem, z, nu, lambda);
  double worst_sign = 0.0;
  if (lambda.size() > 0) worst_sign = std::max(0.0, -lambda.minCoeff());
  double worst_ineq = 0.0;
  if (problem.num_ineq() > 0) {
    worst_ineq = std::max(0.0, (problem.g * z - problem.c).maxCoeff());
  }
  if (residual > kkt_tol || worst_sign > kkt_tol || worst_ineq > kkt_tol) {
    throw InvalidExternalSolution(
        "solution fails the KKT screen: residual " + std::to_string(residual));
  }

  Solution solution;
  solution.z = z;
  solution.nu = nu;
  solution.lambda = lambda.size() > 0 ? lambda.cwiseMax(0.0).eval() : lambda;
  solution.status = SolveStatus::Solved;
  solution.primal_residual = worst_ineq;
  solution.dual_residual = residual;
  ActiveSet active = detect_active_set(problem, solution);
  return LayerTape(problem, std::move(solution), std::move(active), 1e-6);
}

SocpTape attach_external_solution(const SocpLayerSpec& spec, const Vec& z,
                                  const Vec& lambda, double kkt_tol) {
  const Index m = spec.num_constraints();
  if (z.size() != spec.dim() || lambda.size() != m ||
      static_cast<Index>(spec.a.size()) != m) {
    throw std::invalid_argument("external solution dimensions disagree");
  }
  const double z_norm = z.norm();
  double sq = 0.0;
  Vec stationarity = spec.q;
  for (Index i = 0; i < m; ++i) {
    const double slack = spec.a[static_cast<size_t>(i)].dot(z) + z_norm - spec.b(i);
    sq += std::pow(std::max(slack, 0.0), 2);          // cone feasibility
    sq += std::pow(std::min(lambda(i), 0.0), 2);      // dual sign
    sq += std::pow(lambda(i) * slack, 2);             // complementarity
    if (z_norm > 0.0) {
      stationarity += lambda(i) * (spec.a[static_cast<size_t>(i)] + z / z_norm);
    }
  }
  if (z_norm > 0.0) sq += stationarity.squaredNorm();
  if (std::sqrt(sq) > kkt_tol) {
    throw InvalidExternalSolution("solution fails the cone KKT screen");
  }

  SocpTape tape;
  tape.spec = spec;
  tape.z = z;
  tape.lambda = lambda.cwiseMax(0.0);
  const double threshold =
      1e-6 * (1.0 + tape.lambda.lpNorm<Eigen::Infinity>());
  for (Index i = 0; i < m; ++i) {
    if (tape.lambda(i) >= threshold) tape.active.push_back(i);
  }
  return tape;
}

}  // namespace bpqp
