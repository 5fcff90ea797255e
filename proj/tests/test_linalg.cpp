// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bpqp/linalg.hpp"
#include "oracles.hpp"

using bpqp::Index;
using bpqp::KktSystem;
using bpqp::Mat;
using bpqp::Vec;

namespace {

Mat random_spd(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = normal(rng);
  }
  Mat spd = m.transpose() * m;
  spd = 0.5 * (spd + spd.transpose());
  spd.diagonal().array() += 1.0;
  return spd;
}

Mat random_mat(Index rows, Index cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

Vec random_vec(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

double unreg_residual(const KktSystem& system, const Vec& t, const Vec& rhs) {
  return (rhs - system.unregularized_product(t)).lpNorm<Eigen::Infinity>();
}

KktSystem scalar_equality_system(double delta) {
  Mat p(1, 1);
  p << 1.0;
  Mat a(1, 1);
  a << 1.0;
  const Mat g(0, 1);
  return KktSystem::assemble(p, g, a, delta);
}

}  // namespace

TEST_CASE("diagonal shifted solve") {
  const Mat p = Mat::Identity(2, 2);
  const KktSystem system = KktSystem::assemble(p, Mat(0, 2), Mat(0, 2), 1e-6);
  Vec rhs(2);
  rhs << 1.0, 0.0;
  const Vec t = bpqp::factor_and_solve(system, rhs);
  CHECK(t(0) == doctest::Approx(1.0 / (1.0 + 1e-6)).epsilon(1e-12));
  CHECK(t(1) == 0.0);
}

TEST_CASE("scalar equality block solve and refinement") {
  const KktSystem system = scalar_equality_system(1e-6);
  REQUIRE(system.blocks.size() == 2);
  Vec rhs(2);
  rhs << -1.0, 0.0;

  Vec expected(2);
  expected << 0.0, -1.0;

  const Vec raw = bpqp::factor_and_solve(system, rhs);
  CHECK((raw - expected).norm() <= 1e-5);

  const Vec refined = bpqp::iterative_refinement(system, rhs, 10, 1e-12);
  CHECK((refined - expected).norm() <= 1e-12);
  CHECK(unreg_residual(system, refined, rhs) <= 1e-12);
}

TEST_CASE("random quasi-definite solve matches elimination oracle") {
  const Index d = 3;
  const Mat p = random_spd(d, 11);
  const Mat g = random_mat(2, d, 12);
  const Mat a = random_mat(1, d, 13);
  const KktSystem system = KktSystem::assemble(p, g, a, 1e-6);
  const Vec rhs = random_vec(system.blocks.size(), 14);

  const Vec t = bpqp::factor_and_solve(system, rhs);
  CHECK((system.kkt * t - rhs).lpNorm<Eigen::Infinity>() <= 1e-10);

  const Vec reference = oracle::gauss_solve(system.kkt, rhs);
  CHECK((t - reference).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("zero shift refinement is a no-op") {
  const KktSystem system = scalar_equality_system(0.0);
  Vec rhs(2);
  rhs << -1.0, 0.0;
  const bpqp::KktSolver solver(system);
  int steps = -1;
  const Vec refined = solver.refine(rhs, 10, 1e-10, &steps);
  CHECK(steps == 0);
  const Vec direct = bpqp::factor_and_solve(system, rhs);
  CHECK(refined(0) == direct(0));
  CHECK(refined(1) == direct(1));
  CHECK(unreg_residual(system, refined, rhs) <= 1e-10);
}

TEST_CASE("refinement reaches tolerance within five steps on 10x10") {
  const Mat p = random_spd(5, 21);
  const Mat g = random_mat(3, 5, 22);
  const Mat a = random_mat(2, 5, 23);
  const KktSystem system = KktSystem::assemble(p, g, a, 1e-6);
  REQUIRE(system.blocks.size() == 10);
  const Vec rhs = random_vec(10, 24);

  const Vec t = bpqp::iterative_refinement(system, rhs, 5, 1e-10);
  CHECK(unreg_residual(system, t, rhs) <= 1e-10);
}

TEST_CASE("assembled matrix is exactly symmetric and deterministic") {
  const Mat p = random_spd(4, 31);
  const Mat g = random_mat(3, 4, 32);
  const Mat a = random_mat(2, 4, 33);
  const KktSystem s1 = KktSystem::assemble(p, g, a, 1e-6);
  const KktSystem s2 = KktSystem::assemble(p, g, a, 1e-6);
  for (Index i = 0; i < s1.kkt.rows(); ++i) {
    for (Index j = 0; j < s1.kkt.cols(); ++j) {
      CHECK(s1.kkt(i, j) == s1.kkt(j, i));
      CHECK(s1.kkt(i, j) == s2.kkt(i, j));
    }
  }
  const Vec rhs = random_vec(s1.blocks.size(), 34);
  const Vec t1 = bpqp::factor_and_solve(s1, rhs);
  const Vec t2 = bpqp::factor_and_solve(s2, rhs);
  for (Index i = 0; i < t1.size(); ++i) CHECK(t1(i) == t2(i));
}

TEST_CASE("refinement reports failure instead of returning a bad solve") {
  // A shift far larger than the matrix scale cannot be refined away within
  // one step; the budgeted call must throw rather than hand back the biased
  // solution.
  const KktSystem system = scalar_equality_system(0.5);
  Vec rhs(2);
  rhs << -1.0, 0.0;
  CHECK_THROWS_AS(bpqp::iterative_refinement(system, rhs, 0, 1e-14),
                  bpqp::RefinementStalled);
}
