// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "bpqp/linalg.hpp"
#include "bpqp/problem.hpp"

namespace bpqp {

struct ActiveSet {
  std::vector<Index> indices;        // sorted, unique inequality rows
  std::vector<Index> weakly_active;  // rows binding with near-zero multiplier
  double eps_active = 0.0;           // effective threshold used

  // Weak activity is surfaced as a flag, not an error: those rows stay in
  // the set and regularization absorbs the resulting rank deficiency.
  bool degenerate() const { return !weakly_active.empty(); }
  Index count() const { return static_cast<Index>(indices.size()); }
};

// Row i is active iff lambda_i >= eps or slack_i >= -eps, with eps the given
// base tolerance scaled by (1 + max |lambda|).
ActiveSet detect_active_set(const QpProblem& problem, const Solution& sol,
                            double eps_active = 1e-6);

// Equality-constrained QP whose solution is the loss gradient direction:
// minimize 0.5 z'^T P' z' + q'^T z' subject to A' z' = 0, G_plus z' = 0.
struct BackwardProblem {
  Mat p_prime;
  Vec q_prime;  // (dL/dz*)^T
  Mat a_prime;
  Mat g_plus;
  Vec rhs_b;  // exactly zero
  Vec rhs_c;  // exactly zero
};

BackwardProblem build_backward_problem(const QpProblem& problem,
                                       const Solution& sol,
                                       const ActiveSet& active,
                                       const Vec& dl_dz);

struct BackwardSolution {
  Vec z_tilde;
  Vec lambda_tilde;  // multipliers of the active-inequality rows
  Vec nu_tilde;      // multipliers of the equality rows
};

// One regularized factorization plus refinement of the active-set KKT system;
// reusable across loss gradients because the matrix does not depend on q'.
class BackwardEngine {
 public:
  BackwardEngine(const Mat& p_prime, const Mat& g_plus, const Mat& a_prime,
                 double delta);

  BackwardSolution solve(const Vec& dl_dz) const;

 private:
  KktSolver solver_;
  int refine_max_steps_;
  double refine_tol_;
};

BackwardSolution solve_backward(const BackwardProblem& bp, double delta = 1e-6);

// Gradients of the loss with respect to every problem parameter. dG and dc
// are full-size with exactly zero rows for inactive constraints.
struct GradientBundle {
  Mat dP;
  Vec dq;
  Mat dA;
  Vec db;
  Mat dG;
  Vec dc;
  std::vector<Index> active_indices;
  // KKT residual of the solution the backward pass consumed; diagnostic only.
  double kkt_residual = 0.0;
};

GradientBundle assemble_qp_gradients(const Solution& sol,
                                     const ActiveSet& active,
                                     const BackwardSolution& bs);

// Ground-truth gradients: dense solve of the transposed full-KKT linear
// system (stationarity rows, complementarity rows scaled by lambda and by
// slack, equality rows) via an explicitly formed inverse, refined to high
// precision.
GradientBundle exact_backward_oracle(const QpProblem& problem,
                                     const Solution& sol, const Vec& dl_dz);

double cosine_similarity(const Vec& a, const Vec& b);

// Batch-metric variant. A fully constraint-pinned solution has an exactly
// zero parameter gradient, so both paths return refinement-level noise and
// their raw cosine is meaningless; two norms at or below `floor` count as
// full agreement (1), exactly one counts as none (0).
double gradient_agreement(const Vec& a, const Vec& b, double floor = 1e-8);

}  // namespace bpqp
