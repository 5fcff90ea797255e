// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "bpqp/generators.hpp"
#include "bpqp/problem.hpp"

namespace bpqp {

struct DimsSpec {
  Index d = 10;
  Index m_eq = 5;
  Index n_ineq = 5;

  std::string canonical() const;  // "10x5x5"
  // Accepts "DxM" (inequality count defaults to M) or "DxMxN".
  static DimsSpec parse(const std::string& text);
};

enum class BenchMethod { Bpqp, ExactOracle };

const char* to_string(BenchMethod method);
BenchMethod method_from_string(const std::string& name);

enum class BenchLoss { OnesDotZ };

struct BenchConfig {
  std::vector<ProblemFamily> families = {ProblemFamily::Qp};
  std::vector<DimsSpec> dims = {DimsSpec{}};
  int runs = 200;
  std::vector<BenchMethod> methods = {BenchMethod::Bpqp,
                                      BenchMethod::ExactOracle};
  BenchLoss loss = BenchLoss::OnesDotZ;
  std::uint64_t seed = 0;
  // Finite-difference audit runs on the first fd_samples instances of each
  // cell; 0 disables it and reports nan.
  int fd_samples = 8;
  double fd_step = 1e-5;
  bool parallel = false;  // concurrent cells; timing quality degrades
};

struct BenchRow {
  std::string family;
  std::string dims;
  std::string method;
  double fwd_mean = 0.0;
  double fwd_std = 0.0;
  double bwd_mean = 0.0;
  double bwd_std = 0.0;
  double total_mean = 0.0;
  double total_std = 0.0;
  double cos_sim_mean = 0.0;
  double cos_sim_std = 0.0;
  double fd_rel_err = 0.0;
  int failures = 0;
};

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg);

// Central differences on every coordinate of q against the active-set
// backward gradient; relative L2 error. Perturbed solves must keep the base
// active set or the audit aborts with ActiveSetFlip.
double finite_difference_audit(
    const QpProblem& problem, BenchLoss loss, double h,
    const SolverSettings& settings = SolverSettings::standard());

std::string render_csv(const std::vector<BenchRow>& rows);
void emit_report(const std::vector<BenchRow>& rows, const std::string& format,
                 const std::string& path);

}  // namespace bpqp
