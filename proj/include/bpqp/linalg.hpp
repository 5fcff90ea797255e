// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bpqp/types.hpp"

namespace bpqp {

// Row layout of the regularized KKT matrix: primal block, then active
// inequalities, then equalities.
struct KktBlocks {
  Index dim = 0;
  Index num_ineq = 0;
  Index num_eq = 0;

  Index size() const { return dim + num_ineq + num_eq; }
};

// LDL^T factorization with 1x1 pivots, no permutation. Valid for symmetric
// quasi-definite matrices, which the regularized KKT matrix is by
// construction for delta > 0.
class LdlFactorization {
 public:
  explicit LdlFactorization(const Mat& matrix);

  Vec solve(const Vec& rhs) const;
  Index size() const { return diag_.size(); }

 private:
  Mat lower_;  // unit lower-triangular factor in the strict lower triangle
  Vec diag_;
};

// Regularized symmetric KKT system
//   [ P + delta I   G^T    A^T  ]
//   [ G            -delta I  0  ]
//   [ A             0  -delta I ]
// together with the signed shift that was added, so the unregularized
// operator stays available for refinement residuals.
struct KktSystem {
  Mat kkt;
  double delta = 0.0;
  KktBlocks blocks;

  static KktSystem assemble(const Mat& p, const Mat& g_active, const Mat& a,
                            double delta);

  // Signed diagonal perturbation: +delta on the primal block, -delta on the
  // constraint blocks.
  Vec shift() const;

  // K t for the unregularized K = kkt - diag(shift).
  Vec unregularized_product(const Vec& t) const;
};

// Factors a KKT system once and serves repeated solves against it.
class KktSolver {
 public:
  explicit KktSolver(KktSystem system);

  const KktSystem& system() const { return system_; }

  // Single solve against the regularized matrix.
  Vec solve(const Vec& rhs) const;

  // Iterative refinement of the regularized solve toward the unregularized
  // system, terminating once the max-norm residual drops below tol or below
  // the double-precision floor for the system's scale (see refinement_floor).
  // Raises RefinementStalled when the residual stops decreasing or the step
  // budget runs out first. steps_out, when given, receives the number of
  // correction steps applied after the initial solve.
  Vec refine(const Vec& rhs, int max_steps, double tol,
             int* steps_out = nullptr) const;

 private:
  KktSystem system_;
  LdlFactorization ldl_;
};

Vec factor_and_solve(const KktSystem& system, const Vec& rhs);

Vec iterative_refinement(const KktSystem& system, const Vec& rhs,
                         int max_steps = 10, double tol = 1e-10);

// Smallest residual max-norm a refined solve can reliably reach in double
// precision, scaled by the backward-error bound size * u * (|K||t| + |b|).
// The solution-norm term is capped relative to the right-hand side so a
// diverging solve against a singular system cannot inflate the floor into
// false convergence.
double refinement_floor(double matrix_norm, double solution_norm,
                        double rhs_norm, Index size);

}  // namespace bpqp
