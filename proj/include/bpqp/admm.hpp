// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "bpqp/problem.hpp"

namespace bpqp {

// Called after every iteration with the current primal iterate and the dual
// estimates split into equality and inequality parts.
using IterateObserver =
    std::function<void(int iter, const Vec& z, const Vec& nu, const Vec& lambda)>;

// Operator-splitting solve of the standard-form QP. Equality constraints are
// treated as two-sided bounds (l = u = b) so one projection covers both
// constraint kinds; inequality duals are nonnegative by that projection.
Solution admm_solve(const QpProblem& problem, const SolverSettings& settings);
Solution admm_solve(const QpProblem& problem, const SolverSettings& settings,
                    const IterateObserver& observer);

// Active-set KKT re-solve of a converged iterate with iterative refinement.
// Falls back to `raw` whenever the polished candidate does not strictly
// improve the stacked KKT residual.
Solution polish(const QpProblem& problem, const Solution& raw,
                const SolverSettings& settings);

}  // namespace bpqp
