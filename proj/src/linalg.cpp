// SPDX-License-Identifier: Apache-2.0

#include "bpqp/linalg.hpp"

#include <cmath>
#include <limits>

namespace bpqp {

LdlFactorization::LdlFactorization(const Mat& matrix)
    : lower_(matrix), diag_(matrix.rows()) {
  const Index n = matrix.rows();
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  const double pivot_floor =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  for (Index j = 0; j < n; ++j) {
    const double pivot = lower_(j, j);
    if (std::abs(pivot) <= pivot_floor) {
      throw SingularMatrix("zero pivot at column " + std::to_string(j));
    }
    diag_(j) = pivot;
    const Index rest = n - j - 1;
    if (rest > 0) {
      auto column = lower_.col(j).tail(rest);
      column /= pivot;
      lower_.bottomRightCorner(rest, rest)
          .selfadjointView<Eigen::Lower>()
          .rankUpdate(column, -pivot);
    }
  }
}

Vec LdlFactorization::solve(const Vec& rhs) const {
  Vec t = rhs;
  lower_.triangularView<Eigen::UnitLower>().solveInPlace(t);
  t.array() /= diag_.array();
  lower_.triangularView<Eigen::UnitLower>().transpose().solveInPlace(t);
  return t;
}

KktSystem KktSystem::assemble(const Mat& p, const Mat& g_active, const Mat& a,
                              double delta) {
  KktSystem system;
  system.delta = delta;
  system.blocks = KktBlocks{p.rows(), g_active.rows(), a.rows()};
  const Index d = system.blocks.dim;
  const Index m = system.blocks.num_ineq;
  const Index e = system.blocks.num_eq;
  const Index n = system.blocks.size();

  Mat& k = system.kkt;
  k = Mat::Zero(n, n);
  k.topLeftCorner(d, d) = p;
  k.topLeftCorner(d, d).diagonal().array() += delta;
  if (m > 0) k.block(d, 0, m, d) = g_active;
  if (e > 0) k.block(d + m, 0, e, d) = a;
  k.bottomRightCorner(m + e, m + e).diagonal().array() = -delta;

  // Mirror the lower triangle so the stored matrix is exactly symmetric, not
  // recomputed per side.
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      k(j, i) = k(i, j);
    }
  }
  return system;
}

Vec KktSystem::shift() const {
  Vec s(blocks.size());
  s.head(blocks.dim).setConstant(delta);
  s.tail(blocks.num_ineq + blocks.num_eq).setConstant(-delta);
  return s;
}

Vec KktSystem::unregularized_product(const Vec& t) const {
  return kkt.selfadjointView<Eigen::Lower>() * t - shift().cwiseProduct(t);
}

KktSolver::KktSolver(KktSystem system)
    : system_(std::move(system)), ldl_(system_.kkt) {}

Vec KktSolver::solve(const Vec& rhs) const { return ldl_.solve(rhs); }

Vec KktSolver::refine(const Vec& rhs, int max_steps, double tol,
                      int* steps_out) const {
  Vec t = ldl_.solve(rhs);
  const double kkt_norm = system_.kkt.cwiseAbs().rowwise().sum().maxCoeff();
  const double rhs_norm = rhs.lpNorm<Eigen::Infinity>();
  double best = std::numeric_limits<double>::infinity();
  int worse_streak = 0;
  for (int step = 0; step <= max_steps; ++step) {
    const Vec residual = rhs - system_.unregularized_product(t);
    const double norm = residual.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm)) {
      throw RefinementStalled("non-finite refinement residual");
    }
    const double floor = refinement_floor(
        kkt_norm, t.lpNorm<Eigen::Infinity>(), rhs_norm, t.size());
    if (norm <= std::max(tol, floor)) {
      if (steps_out != nullptr) *steps_out = step;
      return t;
    }
    if (norm >= best) {
      if (++worse_streak >= 3) {
        throw RefinementStalled("residual stopped decreasing at " +
                                std::to_string(norm));
      }
    } else {
      best = norm;
      worse_streak = 0;
    }
    if (step == max_steps) break;
    t += ldl_.solve(residual);
  }
  throw RefinementStalled("residual above tolerance after " +
                          std::to_string(max_steps) + " steps");
}

Vec factor_and_solve(const KktSystem& system, const Vec& rhs) {
  return KktSolver(system).solve(rhs);
}

Vec iterative_refinement(const KktSystem& system, const Vec& rhs,
                         int max_steps, double tol) {
  return KktSolver(system).refine(rhs, max_steps, tol);
}

double refinement_floor(double matrix_norm, double solution_norm,
                        double rhs_norm, Index size) {
  const double rhs_ref = std::max(1.0, rhs_norm);
  const double bounded = std::min(solution_norm, 1e10 * rhs_ref);
  return 2.0 * static_cast<double>(size) *
         std::numeric_limits<double>::epsilon() *
         (matrix_norm * bounded + rhs_norm);
}

}  // namespace bpqp
