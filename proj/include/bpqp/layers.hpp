// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "bpqp/admm.hpp"
#include "bpqp/backward.hpp"
#include "bpqp/problem.hpp"

namespace bpqp {

// Captures one forward pass. The backward factorization is built on first
// use and shared by subsequent loss gradients against the same pass.
class LayerTape {
 public:
  LayerTape(QpProblem problem, Solution solution, ActiveSet active,
            double delta);

  const QpProblem& problem() const { return problem_; }
  const Solution& solution() const { return solution_; }
  const ActiveSet& active() const { return active_; }
  const BackwardEngine& engine() const;

 private:
  QpProblem problem_;
  Solution solution_;
  ActiveSet active_;
  double delta_;
  mutable std::shared_ptr<const BackwardEngine> engine_;
};

std::pair<Vec, LayerTape> qp_layer_forward(
    const QpProblem& problem,
    const SolverSettings& settings = SolverSettings::standard());

GradientBundle qp_layer_backward(const LayerTape& tape, const Vec& dl_dz);

// Linear program smoothed with a small quadratic term so the argmin is
// differentiable: minimize theta^T z + eps ||z||^2 over Az = b, Gz <= h.
struct LpLayerSpec {
  Vec theta;
  double eps = 1e-6;
  Mat a;
  Vec b;
  Mat g;
  Vec h;
};

QpProblem lower_lp(const LpLayerSpec& spec);

std::pair<Vec, LayerTape> lp_layer_forward(
    const LpLayerSpec& spec,
    const SolverSettings& settings = SolverSettings::standard());

Vec lp_layer_backward(const LayerTape& tape, const Vec& dl_dz);

// Robust linear program: minimize q^T z subject to a_i^T z + ||z||_2 <= b_i.
struct SocpLayerSpec {
  Vec q;
  std::vector<Vec> a;
  Vec b;

  Index dim() const { return q.size(); }
  Index num_constraints() const { return b.size(); }
};

struct SocpTape {
  SocpLayerSpec spec;
  Vec z;
  Vec lambda;
  std::vector<Index> active;  // constraints with lambda above threshold
};

struct SocpForward {
  Vec z;
  Vec lambda;
  SocpTape tape;
};

// Closed-form forward for the a_i = 0, single-constraint case the generators
// produce; general instances enter through attach_external_solution.
SocpForward socp_layer_forward(
    const SocpLayerSpec& spec,
    const SolverSettings& settings = SolverSettings::standard());

struct SocpGradients {
  Vec dq;
  std::vector<Vec> da;  // one entry per constraint, zero when inactive
  Vec db;
};

SocpGradients socp_layer_backward(const SocpTape& tape, const Vec& dl_dz,
                                  double delta = 1e-6);

// Builds a tape from a solution produced by any solver, after screening it
// against the KKT residual threshold.
LayerTape attach_external_solution(const QpProblem& problem, const Vec& z,
                                   const Vec& nu, const Vec& lambda,
                                   double kkt_tol = 1e-4);

SocpTape attach_external_solution(const SocpLayerSpec& spec, const Vec& z,
                                  const Vec& lambda, double kkt_tol = 1e-4);

}  // namespace bpqp
