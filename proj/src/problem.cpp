// SPDX-License-Identifier: Apache-2.0

#include "bpqp/problem.hpp"

#include <stdexcept>

namespace bpqp {

void QpProblem::validate() const {
  const Index d = dim();
  if (p.rows() != d || p.cols() != d) {
    throw std::invalid_argument("P must be dim x dim");
  }
  if (a.rows() != num_eq() || (num_eq() > 0 && a.cols() != d)) {
    throw std::invalid_argument("A/b dimensions disagree");
  }
  if (g.rows() != num_ineq() || (num_ineq() > 0 && g.cols() != d)) {
    throw std::invalid_argument("G/c dimensions disagree");
  }
  if (!p.allFinite() || !q.allFinite() || !a.allFinite() || !b.allFinite() ||
      !g.allFinite() || !c.allFinite()) {
    throw std::invalid_argument("problem data must be finite");
  }
  if (d > 0 && (p - p.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("P must be symmetric");
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Solved:
      return "solved";
    case SolveStatus::SolvedInaccurate:
      return "solved_inaccurate";
    case SolveStatus::MaxIterReached:
      return "max_iter_reached";
    case SolveStatus::PrimalInfeasible:
      return "primal_infeasible";
    case SolveStatus::DualInfeasible:
      return "dual_infeasible";
  }
  return "unknown";
}

SolverSettings SolverSettings::standard() { return SolverSettings{}; }

SolverSettings SolverSettings::portfolio() {
  SolverSettings settings;
  settings.eps_abs = 1e-5;
  settings.eps_rel = 1e-5;
  return settings;
}

double kkt_residual_norm(const QpProblem& problem, const Vec& z, const Vec& nu,
                         const Vec& lambda) {
  Vec stationarity = problem.p * z + problem.q;
  if (problem.num_eq() > 0) stationarity += problem.a.transpose() * nu;
  if (problem.num_ineq() > 0) stationarity += problem.g.transpose() * lambda;
  double sq = stationarity.squaredNorm();
  if (problem.num_ineq() > 0) {
    const Vec slack = problem.g * z - problem.c;
    sq += lambda.cwiseProduct(slack).squaredNorm();
  }
  if (problem.num_eq() > 0) {
    sq += (problem.a * z - problem.b).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace bpqp
