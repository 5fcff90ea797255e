// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bpqp/types.hpp"

namespace bpqp {

// Convex quadratic program
//   minimize    0.5 z^T P z + q^T z
//   subject to  A z = b,  G z <= c
// with P symmetric positive semidefinite.
struct QpProblem {
  Mat p;
  Vec q;
  Mat a;
  Vec b;
  Mat g;
  Vec c;

  Index dim() const { return q.size(); }
  Index num_eq() const { return b.size(); }
  Index num_ineq() const { return c.size(); }

  // Checks dimensional consistency, finiteness, and symmetry of p.
  void validate() const;
};

enum class SolveStatus {
  Solved,
  SolvedInaccurate,
  MaxIterReached,
  PrimalInfeasible,
  DualInfeasible,
};

const char* to_string(SolveStatus status);

struct SolverSettings {
  double eps_abs = 1e-3;
  double eps_rel = 1e-3;
  double eps_prim_inf = 1e-4;
  double eps_dual_inf = 1e-4;
  int max_iter = 4000;
  int check_interval = 25;
  double sigma = 1e-6;
  double rho = 0.1;
  double rho_eq_scale = 1e3;  // equality rows get rho * rho_eq_scale
  // Residual-balancing rho updates; without them badly scaled instances
  // (huge optimal multipliers) stall far from primal feasibility.
  bool adaptive_rho = true;
  int adaptive_rho_interval = 50;     // iterations between update checks
  double adaptive_rho_trigger = 5.0;  // refactor when rho moves this much
  double alpha_relax = 1.6;
  bool polish = true;
  double kkt_delta = 1e-6;  // diagonal regularization for polish/backward
  int refine_max_steps = 10;
  double refine_tol = 1e-10;

  // Default accuracy profile for simulation workloads.
  static SolverSettings standard();
  // Tighter profile for the portfolio pipeline.
  static SolverSettings portfolio();
};

struct Solution {
  Vec z;       // primal
  Vec nu;      // equality multipliers
  Vec lambda;  // inequality multipliers, nonnegative
  SolveStatus status = SolveStatus::MaxIterReached;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;
};

// Euclidean norm of the stacked KKT residual
//   (P z + q + A^T nu + G^T lambda, lambda .* (G z - c), A z - b).
double kkt_residual_norm(const QpProblem& problem, const Vec& z, const Vec& nu,
                         const Vec& lambda);

}  // namespace bpqp
