// SPDX-License-Identifier: Apache-2.0

#include "bpqp/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpqp/backward.hpp"
#include "bpqp/linalg.hpp"

namespace bpqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Residual slack granted to a max_iter iterate before it still counts as
// solved, mirroring the usual low-accuracy acceptance of splitting solvers.
constexpr double kInaccurateFactor = 100.0;

double inf_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

void validate_settings(const SolverSettings& s) {
  if (s.eps_abs <= 0 || s.eps_rel <= 0 || s.eps_prim_inf <= 0 ||
      s.eps_dual_inf <= 0) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (s.alpha_relax <= 0 || s.alpha_relax >= 2) {
    throw std::invalid_argument("alpha_relax must lie in (0, 2)");
  }
  if (s.max_iter < 1 || s.check_interval < 1) {
    throw std::invalid_argument("iteration counts must be positive");
  }
}

struct Residuals {
  double prim = 0.0;
  double dual = 0.0;
  double eps_prim = 0.0;
  double eps_dual = 0.0;
  double prim_scale = 0.0;
  double dual_scale = 0.0;

  bool within(double factor) const {
    return prim <= factor * eps_prim && dual <= factor * eps_dual;
  }

  // Balancing factor for the penalty parameter: > 1 when the primal side
  // lags the dual side in relative terms.
  double rho_ratio() const {
    const double p = prim / std::max(prim_scale, 1e-10);
    const double d = dual / std::max(dual_scale, 1e-10);
    return std::sqrt(std::max(p, 1e-12) / std::max(d, 1e-12));
  }
};

Residuals measure(const QpProblem& problem, const SolverSettings& settings,
                  const Mat& constraints, const Vec& x, const Vec& s,
                  const Vec& y) {
  Residuals r;
  const Vec px = problem.p * x;
  Vec cx, cty;
  if (constraints.rows() > 0) {
    cx = constraints * x;
    cty = constraints.transpose() * y;
    r.prim = inf_norm(cx - s);
  }
  Vec dual_vec = px + problem.q;
  if (cty.size() > 0) dual_vec += cty;
  r.dual = inf_norm(dual_vec);
  r.prim_scale = std::max(inf_norm(cx), inf_norm(s));
  r.dual_scale =
      std::max({inf_norm(px), inf_norm(cty), inf_norm(problem.q)});
  r.eps_prim = settings.eps_abs + settings.eps_rel * r.prim_scale;
  r.eps_dual = settings.eps_abs + settings.eps_rel * r.dual_scale;
  return r;
}

// Farkas-style certificate: delta_y with C^T delta_y ~ 0 and negative support
// value proves no z satisfies the constraints.
bool primal_infeasible(const QpProblem& problem, const Mat& constraints,
                       const Vec& delta_y, double eps) {
  const double norm = inf_norm(delta_y);
  if (norm <= 1e-12) return false;
  const Vec yhat = delta_y / norm;
  if (inf_norm(constraints.transpose() * yhat) > eps) return false;
  const Index m_eq = problem.num_eq();
  double support = 0.0;
  for (Index i = 0; i < yhat.size(); ++i) {
    const double up = std::max(yhat(i), 0.0);
    const double dn = std::min(yhat(i), 0.0);
    if (i < m_eq) {
      support += problem.b(i) * (up + dn);
    } else {
      // Lower bound is -inf: the certificate needs a nonnegative multiplier.
      if (dn < -eps) return false;
      support += problem.c(i - m_eq) * up;
    }
  }
  return support < -eps;
}

// Unbounded-direction certificate: delta_x with P delta_x ~ 0, q^T delta_x < 0
// staying inside the constraint recession cone.
bool dual_infeasible(const QpProblem& problem, const Mat& constraints,
                     const Vec& delta_x, double eps) {
  const double norm = inf_norm(delta_x);
  if (norm <= 1e-12) return false;
  const Vec xhat = delta_x / norm;
  if (problem.q.dot(xhat) >= -eps) return false;
  const Vec px = problem.p * xhat;
  if (inf_norm(px) > eps) return false;
  // For PSD P a true descent ray needs exactly zero curvature; curvature that
  // is merely below the certificate tolerance (smoothed objectives) keeps the
  // problem bounded, so it must not read as unbounded.
  if (xhat.dot(px) > eps * eps * std::max(1.0, inf_norm(problem.p))) {
    return false;
  }
  if (constraints.rows() > 0) {
    const Vec cx = constraints * xhat;
    const Index m_eq = problem.num_eq();
    for (Index i = 0; i < cx.size(); ++i) {
      if (i < m_eq ? std::abs(cx(i)) > eps : cx(i) > eps) return false;
    }
  }
  return true;
}

}  // namespace

Solution admm_solve(const QpProblem& problem, const SolverSettings& settings) {
  return admm_solve(problem, settings, IterateObserver{});
}

Solution admm_solve(const QpProblem& problem, const SolverSettings& settings,
                    const IterateObserver& observer) {
  problem.validate();
  validate_settings(settings);
  const Index d = problem.dim();
  const Index m_eq = problem.num_eq();
  const Index n_ineq = problem.num_ineq();
  const Index m = m_eq + n_ineq;

  Mat constraints(m, d);
  Vec lower(m), upper(m), rho(m);
  double rho_base = settings.rho;
  const auto fill_rho = [&] {
    if (m_eq > 0) {
      rho.head(m_eq).setConstant(rho_base * settings.rho_eq_scale);
    }
    if (n_ineq > 0) rho.tail(n_ineq).setConstant(rho_base);
  };
  if (m_eq > 0) {
    constraints.topRows(m_eq) = problem.a;
    lower.head(m_eq) = problem.b;
    upper.head(m_eq) = problem.b;
  }
  if (n_ineq > 0) {
    constraints.bottomRows(n_ineq) = problem.g;
    lower.tail(n_ineq).setConstant(-kInf);
    upper.tail(n_ineq) = problem.c;
  }
  fill_rho();

  // Reduced step system [[P + sigma I, C^T], [C, -diag(1/rho)]].
  Mat step = Mat::Zero(d + m, d + m);
  step.topLeftCorner(d, d) = problem.p;
  step.topLeftCorner(d, d).diagonal().array() += settings.sigma;
  if (m > 0) {
    step.block(d, 0, m, d) = constraints;
    step.block(0, d, d, m) = constraints.transpose();
    step.bottomRightCorner(m, m).diagonal() = -rho.cwiseInverse();
  }
  LdlFactorization factor(step);

  Vec x = Vec::Zero(d);
  Vec s = Vec::Zero(m);
  Vec y = Vec::Zero(m);
  const double alpha = settings.alpha_relax;

  Solution out;
  out.nu = Vec::Zero(m_eq);
  out.lambda = Vec::Zero(n_ineq);

  Vec rhs(d + m), delta_x(d), delta_y(m);
  int iter = 0;
  for (iter = 1; iter <= settings.max_iter; ++iter) {
    rhs.head(d) = settings.sigma * x - problem.q;
    if (m > 0) rhs.tail(m) = s - y.cwiseQuotient(rho);
    const Vec sol = factor.solve(rhs);
    const Vec x_tilde = sol.head(d);

    delta_x = x;
    x = alpha * x_tilde + (1.0 - alpha) * x;
    delta_x = x - delta_x;

    if (m > 0) {
      const Vec s_tilde = s + (sol.tail(m) - y).cwiseQuotient(rho);
      const Vec v =
          alpha * s_tilde + (1.0 - alpha) * s + y.cwiseQuotient(rho);
      s = v.cwiseMax(lower).cwiseMin(upper);
      delta_y = y;
      y = rho.cwiseProduct(v - s);
      delta_y = y - delta_y;
    }

    if (observer) {
      observer(iter, x, y.head(m_eq), y.tail(n_ineq));
    }

    const bool at_limit = iter == settings.max_iter;
    if (iter % settings.check_interval == 0 || at_limit) {
      const Residuals r = measure(problem, settings, constraints, x, s, y);
      out.primal_residual = r.prim;
      out.dual_residual = r.dual;
      if (r.within(1.0)) {
        out.status = SolveStatus::Solved;
        break;
      }
      if (m > 0 && primal_infeasible(problem, constraints, delta_y,
                                     settings.eps_prim_inf)) {
        out.status = SolveStatus::PrimalInfeasible;
        break;
      }
      if (dual_infeasible(problem, constraints, delta_x,
                          settings.eps_dual_inf)) {
        out.status = SolveStatus::DualInfeasible;
        break;
      }
      if (at_limit) {
        out.status = r.within(kInaccurateFactor)
                         ? SolveStatus::SolvedInaccurate
                         : SolveStatus::MaxIterReached;
        break;
      }
      if (settings.adaptive_rho && m > 0 &&
          iter % settings.adaptive_rho_interval == 0) {
        const double proposed =
            std::clamp(rho_base * r.rho_ratio(), 1e-6, 1e6);
        const double shift = proposed / rho_base;
        if (shift >= settings.adaptive_rho_trigger ||
            shift <= 1.0 / settings.adaptive_rho_trigger) {
          // y carries rho-free multipliers, so only the step matrix and the
          // cached rho vector need rebuilding.
          rho_base = proposed;
          fill_rho();
          step.bottomRightCorner(m, m).diagonal() = -rho.cwiseInverse();
          factor = LdlFactorization(step);
        }
      }
    }
  }

  out.z = x;
  out.nu = y.head(m_eq);
  out.lambda = y.tail(n_ineq);
  out.iterations = std::min(iter, settings.max_iter);

  if (out.status == SolveStatus::Solved && settings.polish) {
    return polish(problem, out, settings);
  }
  return out;
}

Solution polish(const QpProblem& problem, const Solution& raw,
                const SolverSettings& settings) {
  if (raw.status != SolveStatus::Solved &&
      raw.status != SolveStatus::SolvedInaccurate) {
    return raw;
  }
  const ActiveSet active = detect_active_set(problem, raw);
  const Index m_plus = static_cast<Index>(active.indices.size());

  Mat g_active(m_plus, problem.dim());
  Vec c_active(m_plus);
  for (Index k = 0; k < m_plus; ++k) {
    g_active.row(k) = problem.g.row(active.indices[static_cast<size_t>(k)]);
    c_active(k) = problem.c(active.indices[static_cast<size_t>(k)]);
  }

  Vec rhs(problem.dim() + m_plus + problem.num_eq());
  rhs.head(problem.dim()) = -problem.q;
  rhs.segment(problem.dim(), m_plus) = c_active;
  rhs.tail(problem.num_eq()) = problem.b;

  Vec t;
  try {
    const KktSystem system = KktSystem::assemble(problem.p, g_active,
                                                 problem.a, settings.kkt_delta);
    t = iterative_refinement(system, rhs, settings.refine_max_steps,
                             settings.refine_tol);
  } catch (const SingularMatrix&) {
    return raw;
  } catch (const RefinementStalled&) {
    return raw;
  }

  Solution candidate = raw;
  candidate.z = t.head(problem.dim());
  candidate.nu = t.tail(problem.num_eq());
  candidate.lambda = Vec::Zero(problem.num_ineq());
  for (Index k = 0; k < m_plus; ++k) {
    candidate.lambda(active.indices[static_cast<size_t>(k)]) =
        std::max(t(problem.dim() + k), 0.0);
  }

  const double before =
      kkt_residual_norm(problem, raw.z, raw.nu, raw.lambda);
  const double after = kkt_residual_norm(problem, candidate.z, candidate.nu,
                                         candidate.lambda);
  if (!(after <= before) || !candidate.z.allFinite()) {
    return raw;
  }

  candidate.polished = true;
  if (problem.num_eq() + problem.num_ineq() > 0) {
    Vec prim(problem.num_eq() + problem.num_ineq());
    prim.head(problem.num_eq()) = problem.a * candidate.z - problem.b;
    prim.tail(problem.num_ineq()) =
        (problem.g * candidate.z - problem.c).cwiseMax(0.0);
    candidate.primal_residual = inf_norm(prim);
  } else {
    candidate.primal_residual = 0.0;
  }
  Vec dual = problem.p * candidate.z + problem.q;
  if (problem.num_eq() > 0) dual += problem.a.transpose() * candidate.nu;
  if (problem.num_ineq() > 0) dual += problem.g.transpose() * candidate.lambda;
  candidate.dual_residual = inf_norm(dual);
  return candidate;
}

}  // namespace bpqp
