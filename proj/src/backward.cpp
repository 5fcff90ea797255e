// SPDX-License-Identifier: Apache-2.0

#include "bpqp/backward.hpp"

#include <cmath>

namespace bpqp {

namespace {

constexpr int kOracleRefineSteps = 15;
constexpr double kOracleTol = 1e-12;

Mat symmetrized_outer(const Vec& left, const Vec& right) {
  return 0.5 * (left * right.transpose() + right * left.transpose());
}

}  // namespace

ActiveSet detect_active_set(const QpProblem& problem, const Solution& sol,
                            double eps_active) {
  ActiveSet active;
  active.eps_active =
      eps_active * (1.0 + (sol.lambda.size() > 0
                               ? sol.lambda.lpNorm<Eigen::Infinity>()
                               : 0.0));
  if (problem.num_ineq() == 0) return active;
  const Vec slack = problem.g * sol.z - problem.c;
  for (Index i = 0; i < problem.num_ineq(); ++i) {
    const bool dual_active = sol.lambda(i) >= active.eps_active;
    const bool slack_active = slack(i) >= -active.eps_active;
    if (dual_active || slack_active) {
      active.indices.push_back(i);
      if (!dual_active && std::abs(slack(i)) < active.eps_active) {
        active.weakly_active.push_back(i);
      }
    }
  }
  return active;
}

BackwardProblem build_backward_problem(const QpProblem& problem,
                                       const Solution& sol,
                                       const ActiveSet& active,
                                       const Vec& dl_dz) {
  (void)sol;
  BackwardProblem bp;
  bp.p_prime = problem.p;
  bp.q_prime = dl_dz;
  bp.a_prime = problem.a;
  bp.g_plus.resize(active.count(), problem.dim());
  for (Index k = 0; k < active.count(); ++k) {
    bp.g_plus.row(k) = problem.g.row(active.indices[static_cast<size_t>(k)]);
  }
  bp.rhs_b = Vec::Zero(problem.num_eq());
  bp.rhs_c = Vec::Zero(active.count());
  return bp;
}

BackwardEngine::BackwardEngine(const Mat& p_prime, const Mat& g_plus,
                               const Mat& a_prime, double delta)
    : solver_([&] {
        try {
          return KktSolver(
              KktSystem::assemble(p_prime, g_plus, a_prime, delta));
        } catch (const SingularMatrix& e) {
          throw SingularBackwardSystem(e.what());
        }
      }()),
      // Curvature near the regularization delta contracts refinement slowly
      // (ratio delta / (curvature + delta) per step); the stall guard still
      // cuts genuinely singular systems short, so a generous budget only
      // spends steps on systems that are converging.
      refine_max_steps_(50),
      refine_tol_(1e-10) {}

BackwardSolution BackwardEngine::solve(const Vec& dl_dz) const {
  const KktBlocks& blocks = solver_.system().blocks;
  Vec rhs = Vec::Zero(blocks.size());
  rhs.head(blocks.dim) = -dl_dz;
  Vec t;
  try {
    t = solver_.refine(rhs, refine_max_steps_, refine_tol_);
  } catch (const RefinementStalled& e) {
    throw SingularBackwardSystem(e.what());
  }
  BackwardSolution bs;
  bs.z_tilde = t.head(blocks.dim);
  bs.lambda_tilde = t.segment(blocks.dim, blocks.num_ineq);
  bs.nu_tilde = t.tail(blocks.num_eq);
  return bs;
}

BackwardSolution solve_backward(const BackwardProblem& bp, double delta) {
  return BackwardEngine(bp.p_prime, bp.g_plus, bp.a_prime, delta)
      .solve(bp.q_prime);
}

GradientBundle assemble_qp_gradients(const Solution& sol,
                                     const ActiveSet& active,
                                     const BackwardSolution& bs) {
  const Index d = sol.z.size();
  const Index n = sol.lambda.size();
  GradientBundle bundle;
  bundle.dP = symmetrized_outer(bs.z_tilde, sol.z);
  bundle.dq = bs.z_tilde;
  bundle.dA = bs.nu_tilde * sol.z.transpose() + sol.nu * bs.z_tilde.transpose();
  bundle.db = -bs.nu_tilde;
  bundle.dG = Mat::Zero(n, d);
  bundle.dc = Vec::Zero(n);
  for (Index k = 0; k < active.count(); ++k) {
    const Index i = active.indices[static_cast<size_t>(k)];
    bundle.dG.row(i) = bs.lambda_tilde(k) * sol.z.transpose() +
                       sol.lambda(i) * bs.z_tilde.transpose();
    bundle.dc(i) = -bs.lambda_tilde(k);
  }
  bundle.active_indices = active.indices;
  return bundle;
}

GradientBundle exact_backward_oracle(const QpProblem& problem,
                                     const Solution& sol, const Vec& dl_dz) {
  const Index d = problem.dim();
  const Index n = problem.num_ineq();
  const Index m = problem.num_eq();
  const Index size = d + n + m;

  Mat kkt = Mat::Zero(size, size);
  kkt.topLeftCorner(d, d) = problem.p;
  if (n > 0) {
    kkt.block(0, d, d, n) = problem.g.transpose();
    kkt.block(d, 0, n, d) = sol.lambda.asDiagonal() * problem.g;
    kkt.block(d, d, n, n) =
        (problem.g * sol.z - problem.c).asDiagonal();
  }
  if (m > 0) {
    kkt.block(0, d + n, d, m) = problem.a.transpose();
    kkt.block(d + n, 0, m, d) = problem.a;
  }

  const Mat transposed = kkt.transpose();
  const Eigen::PartialPivLU<Mat> lu(transposed);
  const Vec lu_diag = lu.matrixLU().diagonal().cwiseAbs();
  const double pivot_scale = std::max(1.0, lu_diag.maxCoeff());
  if (lu_diag.minCoeff() <= 1e-14 * pivot_scale) {
    throw SingularMatrix("full KKT matrix is numerically singular");
  }
  const Mat inverse = lu.inverse();

  Vec rhs = Vec::Zero(size);
  rhs.head(d) = -dl_dz;
  Vec t = inverse * rhs;
  const double rhs_norm = rhs.lpNorm<Eigen::Infinity>();
  const double kkt_norm = transposed.cwiseAbs().rowwise().sum().maxCoeff();
  const auto tolerance = [&](const Vec& current) {
    return std::max(kOracleTol * (1.0 + rhs_norm),
                    refinement_floor(kkt_norm,
                                     current.lpNorm<Eigen::Infinity>(),
                                     rhs_norm, size));
  };
  bool converged = false;
  for (int step = 0; step < kOracleRefineSteps; ++step) {
    const Vec residual = rhs - transposed * t;
    if (residual.lpNorm<Eigen::Infinity>() <= tolerance(t)) {
      converged = true;
      break;
    }
    t += inverse * residual;
  }
  if (!converged &&
      (rhs - transposed * t).lpNorm<Eigen::Infinity>() > tolerance(t)) {
    throw SingularMatrix("full KKT solve failed to refine");
  }

  const Vec z_tilde = t.head(d);
  const Vec lambda_scaled = t.segment(d, n);
  const Vec nu_tilde = t.tail(m);

  GradientBundle bundle;
  bundle.dP = symmetrized_outer(z_tilde, sol.z);
  bundle.dq = z_tilde;
  bundle.dA =
      nu_tilde * sol.z.transpose() + sol.nu * z_tilde.transpose();
  bundle.db = -nu_tilde;
  if (n > 0) {
    const Vec lambda_weighted = sol.lambda.cwiseProduct(lambda_scaled);
    bundle.dG = lambda_weighted * sol.z.transpose() +
                sol.lambda * z_tilde.transpose();
    bundle.dc = -lambda_weighted;
  } else {
    bundle.dG = Mat::Zero(0, d);
    bundle.dc = Vec::Zero(0);
  }
  bundle.kkt_residual = kkt_residual_norm(problem, sol.z, sol.nu, sol.lambda);
  return bundle;
}

double cosine_similarity(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity dimension mismatch");
  }
  const double norm_a = a.norm();
  const double norm_b = b.norm();
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ZeroVector("cosine_similarity of a zero vector");
  }
  return a.dot(b) / (norm_a * norm_b);
}

double gradient_agreement(const Vec& a, const Vec& b, double floor) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("gradient_agreement dimension mismatch");
  }
  const bool zero_a = a.norm() <= floor;
  const bool zero_b = b.norm() <= floor;
  if (zero_a && zero_b) return 1.0;
  if (zero_a || zero_b) return 0.0;
  return cosine_similarity(a, b);
}

}  // namespace bpqp
