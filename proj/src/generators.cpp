// SPDX-License-Identifier: Apache-2.0

#include "bpqp/generators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bpqp {

namespace {

Mat draw_matrix(RandomStream& stream, Index rows, Index cols) {
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = stream.normal();
    }
  }
  return out;
}

Vec draw_vector(RandomStream& stream, Index size) {
  Vec out(size);
  for (Index i = 0; i < size; ++i) {
    out(i) = stream.normal();
  }
  return out;
}

}  // namespace

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t x = base + 0x9E3779B97F4A7C15ull * (index + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

const char* to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::Qp:
      return "qp";
    case ProblemFamily::Lp:
      return "lp";
    case ProblemFamily::Socp:
      return "socp";
  }
  return "unknown";
}

ProblemFamily family_from_string(const std::string& name) {
  if (name == "qp") return ProblemFamily::Qp;
  if (name == "lp") return ProblemFamily::Lp;
  if (name == "socp") return ProblemFamily::Socp;
  throw std::invalid_argument("unknown problem family: " + name);
}

QpProblem gen_qp(const GenSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("d must be at least 1");
  RandomStream stream(spec.seed);
  QpProblem problem;
  const Mat p_root = draw_matrix(stream, spec.d, spec.d);
  const Mat gram = p_root.transpose() * p_root;
  // Exact symmetry regardless of how the product kernel ordered its sums.
  problem.p = 0.5 * (gram + gram.transpose());
  problem.p.diagonal().array() += spec.delta;
  problem.q = draw_vector(stream, spec.d);
  problem.a = draw_matrix(stream, spec.m_eq, spec.d);
  problem.b = draw_vector(stream, spec.m_eq);
  problem.g = draw_matrix(stream, spec.n_ineq, spec.d);
  // Slack trick: make z' feasible for the inequalities so instances are
  // never inequality-infeasible and slacks stay moderate.
  const Vec z_slack = draw_vector(stream, spec.d);
  problem.c = problem.g * z_slack;
  return problem;
}

LpLayerSpec gen_lp(const GenSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("d must be at least 1");
  RandomStream stream(spec.seed);
  LpLayerSpec lp;
  lp.eps = spec.eps;
  lp.theta = draw_vector(stream, spec.d);
  lp.a = draw_matrix(stream, spec.m_eq, spec.d);
  lp.b = draw_vector(stream, spec.m_eq);
  lp.g = draw_matrix(stream, spec.n_ineq, spec.d);
  const Vec z_slack = draw_vector(stream, spec.d);
  lp.h = lp.g * z_slack;
  return lp;
}

SocpLayerSpec gen_socp(const GenSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("d must be at least 1");
  RandomStream stream(spec.seed);
  SocpLayerSpec socp;
  socp.q = draw_vector(stream, spec.d);
  socp.a.assign(1, Vec::Zero(spec.d));
  double radius = stream.normal();
  while (radius <= 0.0) radius = stream.normal();
  socp.b = Vec::Constant(1, radius);
  return socp;
}

}  // namespace bpqp
