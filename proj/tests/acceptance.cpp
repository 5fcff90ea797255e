// SPDX-License-Identifier: Apache-2.0
// Release gate: every check prints exactly one PASS/FAIL line with its
// measured numbers, and the process exits nonzero if any check fails.
// Thresholds are pinned here on purpose; loosening one is a code change.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "bpqp/admm.hpp"
#include "bpqp/backward.hpp"
#include "bpqp/bench.hpp"
#include "bpqp/generators.hpp"
#include "bpqp/layers.hpp"
#include "bpqp/portfolio.hpp"
#include "bpqp/problem.hpp"
#include "oracles.hpp"

namespace {

using bpqp::GenSpec;
using bpqp::GradientBundle;
using bpqp::Index;
using bpqp::Mat;
using bpqp::QpProblem;
using bpqp::Solution;
using bpqp::SolverSettings;
using bpqp::Vec;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
  char buffer[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buffer, sizeof(buffer), pattern, args);
  va_end(args);
  return std::string(buffer);
}

GenSpec qp_spec(std::uint64_t seed) {
  GenSpec spec;
  spec.family = bpqp::ProblemFamily::Qp;
  spec.d = 10;
  spec.m_eq = 5;
  spec.n_ineq = 5;
  spec.seed = seed;
  return spec;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Mean cosine similarity between the active-set backward gradient dq and the
// dense full-system oracle over 200 generated problems.
Outcome check_qp_gradient_accuracy() {
  const auto start = Clock::now();
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < 200; ++i) {
    const QpProblem problem = bpqp::gen_qp(qp_spec(bpqp::derive_seed(0, i)));
    try {
      const auto [z, tape] = bpqp::qp_layer_forward(problem);
      const Vec dl = Vec::Ones(problem.dim());
      const GradientBundle fast = bpqp::qp_layer_backward(tape, dl);
      const GradientBundle exact =
          bpqp::exact_backward_oracle(problem, tape.solution(), dl);
      sum += bpqp::gradient_agreement(fast.dq, exact.dq);
      ++n;
    } catch (const std::exception&) {
      // unsolved or singular instances are counted by the solve-rate check
    }
  }
  const double mean = n > 0 ? sum / n : 0.0;
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = n >= 190 && mean >= 0.99 && elapsed <= 120.0;
  out.detail = fmt("mean cos %.6f over %d/200 instances, %.1f s (need >= 0.99 "
                   "on >= 190, <= 120 s)",
                   mean, n, elapsed);
  return out;
}

// Cone-constrained layer gradients against the analytic ball-projection
// formula at d = 100.
Outcome check_socp_gradient_accuracy() {
  const auto start = Clock::now();
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < 200; ++i) {
    GenSpec spec;
    spec.family = bpqp::ProblemFamily::Socp;
    spec.d = 100;
    spec.seed = bpqp::derive_seed(1, i);
    const bpqp::SocpLayerSpec socp = bpqp::gen_socp(spec);
    const bpqp::SocpForward fwd = bpqp::socp_layer_forward(socp);
    const Vec dl = Vec::Ones(spec.d);
    const bpqp::SocpGradients grads = bpqp::socp_layer_backward(fwd.tape, dl);
    const Vec unit = socp.q.normalized();
    const Vec reference =
        -(socp.b(0) / socp.q.norm()) * (dl - unit * unit.dot(dl));
    sum += bpqp::cosine_similarity(grads.dq, reference);
    ++n;
  }
  const double mean = n > 0 ? sum / n : 0.0;
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = n == 200 && mean >= 0.999 && elapsed <= 120.0;
  out.detail = fmt("mean cos %.8f over %d/200 instances, %.1f s (need >= "
                   "0.999, <= 120 s)",
                   mean, n, elapsed);
  return out;
}

// Median relative L2 error of dq against central differences on 50
// strictly complementary instances.
Outcome check_finite_difference_audit() {
  const auto start = Clock::now();
  std::vector<double> errors;
  int skipped = 0;
  for (std::uint64_t j = 0; j < 500 && errors.size() < 50; ++j) {
    const QpProblem problem = bpqp::gen_qp(qp_spec(bpqp::derive_seed(42, j)));
    const Solution sol = bpqp::admm_solve(problem, SolverSettings::standard());
    if (sol.status != bpqp::SolveStatus::Solved) {
      ++skipped;
      continue;
    }
    const bpqp::ActiveSet active = bpqp::detect_active_set(problem, sol);
    if (active.degenerate()) {
      ++skipped;
      continue;
    }
    try {
      errors.push_back(bpqp::finite_difference_audit(
          problem, bpqp::BenchLoss::OnesDotZ, 1e-5));
    } catch (const bpqp::ActiveSetFlip&) {
      ++skipped;
    }
  }
  const double median = errors.empty() ? 1.0 : median_of(errors);
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = errors.size() == 50 && median <= 1e-3;
  out.detail = fmt("median rel err %.3e over %zu instances (%d skipped), "
                   "%.1f s (need <= 1e-3 on 50)",
                   median, errors.size(), skipped, elapsed);
  return out;
}

// Backward timing: the active-set solve must beat the dense full-system
// oracle, by at least 3x at the larger scale.
Outcome check_backward_speed() {
  const auto start = Clock::now();
  bpqp::BenchConfig cfg;
  cfg.families = {bpqp::ProblemFamily::Qp};
  cfg.dims = {bpqp::DimsSpec{100, 20, 20}, bpqp::DimsSpec{500, 100, 100}};
  cfg.runs = 20;
  cfg.methods = {bpqp::BenchMethod::Bpqp, bpqp::BenchMethod::ExactOracle};
  cfg.seed = 7;
  cfg.fd_samples = 0;
  const std::vector<bpqp::BenchRow> rows = bpqp::run_benchmark(cfg);

  auto bwd_mean = [&](const std::string& dims, bpqp::BenchMethod method) {
    for (const bpqp::BenchRow& row : rows) {
      if (row.dims == dims && row.method == bpqp::to_string(method)) {
        return row.bwd_mean;
      }
    }
    return -1.0;
  };
  const double small_fast = bwd_mean("100x20x20", bpqp::BenchMethod::Bpqp);
  const double small_exact =
      bwd_mean("100x20x20", bpqp::BenchMethod::ExactOracle);
  const double large_fast = bwd_mean("500x100x100", bpqp::BenchMethod::Bpqp);
  const double large_exact =
      bwd_mean("500x100x100", bpqp::BenchMethod::ExactOracle);
  const double ratio = large_fast > 0.0 ? large_exact / large_fast : 0.0;
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = small_fast > 0.0 && large_fast > 0.0 &&
             small_fast < small_exact && large_fast < large_exact &&
             ratio >= 3.0 && elapsed <= 600.0;
  out.detail = fmt("100x20x20 %.2e vs %.2e s, 500x100x100 %.2e vs %.2e s, "
                   "ratio %.1fx, %.0f s (need faster at both, ratio >= 3)",
                   small_fast, small_exact, large_fast, large_exact, ratio,
                   elapsed);
  return out;
}

bool kkt_invariant_holds(const QpProblem& problem, const Solution& sol,
                         const SolverSettings& settings) {
  if (sol.lambda.size() > 0 && sol.lambda.minCoeff() < -settings.eps_abs) {
    return false;
  }
  if (problem.num_eq() > 0) {
    const Vec az = problem.a * sol.z;
    const double scale = std::max(az.lpNorm<Eigen::Infinity>(),
                                  problem.b.lpNorm<Eigen::Infinity>());
    const double err = (az - problem.b).lpNorm<Eigen::Infinity>();
    if (err > settings.eps_abs + settings.eps_rel * scale) return false;
  }
  if (problem.num_ineq() > 0) {
    const Vec gz = problem.g * sol.z;
    const Vec slack = gz - problem.c;
    const double scale = std::max(gz.lpNorm<Eigen::Infinity>(),
                                  problem.c.lpNorm<Eigen::Infinity>());
    if (slack.maxCoeff() > settings.eps_abs + settings.eps_rel * scale) {
      return false;
    }
    const double comp =
        (sol.lambda.array() * slack.array()).abs().maxCoeff();
    if (comp > settings.eps_abs) return false;
  }
  return true;
}

// Hand-checkable one-variable fixtures plus solve rate and the first-order
// optimality invariant over a 200-instance batch.
Outcome check_forward_correctness() {
  const auto start = Clock::now();
  const SolverSettings settings = SolverSettings::standard();
  std::string failure;

  {
    QpProblem p;
    p.p = Mat::Constant(1, 1, 1.0);
    p.q = Vec::Constant(1, 2.0);
    p.a = Mat::Zero(0, 1);
    p.b = Vec::Zero(0);
    p.g = Mat::Zero(0, 1);
    p.c = Vec::Zero(0);
    const Solution sol = bpqp::admm_solve(p, settings);
    if (sol.status != bpqp::SolveStatus::Solved ||
        std::abs(sol.z(0) + 2.0) > 1e-8) {
      failure = "unconstrained fixture";
    }
  }
  {
    QpProblem p;
    p.p = Mat::Constant(1, 1, 1.0);
    p.q = Vec::Zero(1);
    p.a = Mat::Constant(1, 1, 1.0);
    p.b = Vec::Constant(1, 1.0);
    p.g = Mat::Zero(0, 1);
    p.c = Vec::Zero(0);
    const Solution sol = bpqp::admm_solve(p, settings);
    if (sol.status != bpqp::SolveStatus::Solved ||
        std::abs(sol.z(0) - 1.0) > 1e-8 || std::abs(sol.nu(0) + 1.0) > 1e-8) {
      failure = "equality fixture";
    }
  }
  {
    QpProblem p;
    p.p = Mat::Constant(1, 1, 1.0);
    p.q = Vec::Constant(1, -2.0);
    p.a = Mat::Zero(0, 1);
    p.b = Vec::Zero(0);
    p.g = Mat::Constant(1, 1, 1.0);
    p.c = Vec::Constant(1, 1.0);
    const Solution sol = bpqp::admm_solve(p, settings);
    if (sol.status != bpqp::SolveStatus::Solved ||
        std::abs(sol.z(0) - 1.0) > 1e-8 ||
        std::abs(sol.lambda(0) - 1.0) > 1e-8) {
      failure = "inequality fixture";
    }
  }

  int solved = 0;
  int invariant_ok = 0;
  for (int i = 0; i < 200; ++i) {
    const QpProblem problem = bpqp::gen_qp(qp_spec(bpqp::derive_seed(0, i)));
    const Solution sol = bpqp::admm_solve(problem, settings);
    if (sol.status != bpqp::SolveStatus::Solved) continue;
    ++solved;
    if (kkt_invariant_holds(problem, sol, settings)) ++invariant_ok;
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = failure.empty() && solved >= 198 && invariant_ok == solved;
  out.detail = fmt("fixtures %s, solved %d/200, invariant %d/%d, %.1f s "
                   "(need fixtures at 1e-8, >= 198 solved, all invariant)",
                   failure.empty() ? "ok" : failure.c_str(), solved,
                   invariant_ok, solved, elapsed);
  return out;
}

// Gradients computed from an externally supplied optimum must agree with the
// integrated forward-backward path.
Outcome check_external_solution_decoupling() {
  const auto start = Clock::now();
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < 50; ++i) {
    const QpProblem problem = bpqp::gen_qp(qp_spec(bpqp::derive_seed(6, i)));
    try {
      const auto [z, tape] = bpqp::qp_layer_forward(problem);
      const Vec dl = Vec::Ones(problem.dim());
      const GradientBundle integrated = bpqp::qp_layer_backward(tape, dl);
      const oracle::QpSolve external = oracle::enumerate_qp(problem);
      if (!external.found) continue;
      const bpqp::LayerTape attached = bpqp::attach_external_solution(
          problem, external.z, external.nu, external.lambda);
      const GradientBundle decoupled = bpqp::qp_layer_backward(attached, dl);
      sum += bpqp::gradient_agreement(decoupled.dq, integrated.dq);
      ++n;
    } catch (const std::exception&) {
    }
  }
  const double mean = n > 0 ? sum / n : 0.0;
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = n >= 48 && mean >= 0.999;
  out.detail = fmt("mean cos %.8f over %d/50 instances, %.1f s (need >= "
                   "0.999 on >= 48)",
                   mean, n, elapsed);
  return out;
}

// Training through the allocation layer must beat the fit-then-optimize
// baseline on held-out regret for most seeds, with a decreasing loss curve.
Outcome check_end_to_end_ordering() {
  const auto start = Clock::now();
  int wins = 0;
  int curves_ok = 0;
  int diverged = 0;
  std::string pairs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    bpqp::SyntheticSpec spec;
    spec.d = 20;
    spec.days = 600;
    spec.seed = seed;
    const bpqp::ReturnsPanel panel = bpqp::gen_synthetic_panel(spec);
    bpqp::TrainConfig cfg;
    cfg.seed = seed;
    const bpqp::TrainReport e2e =
        bpqp::train_e2e(panel, cfg, bpqp::TrainMode::EndToEnd);
    const bpqp::TrainReport baseline =
        bpqp::train_e2e(panel, cfg, bpqp::TrainMode::TwoStage);
    if (e2e.diverged) {
      ++diverged;
      continue;
    }
    if (e2e.metrics.regret < baseline.metrics.regret) ++wins;
    if (e2e.curve.size() >= 2 &&
        e2e.curve.back().decision_loss <=
            0.5 * e2e.curve.front().decision_loss) {
      ++curves_ok;
    }
    pairs += fmt(" s%llu %.3e/%.3e", static_cast<unsigned long long>(seed),
                 e2e.metrics.regret, baseline.metrics.regret);
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass =
      wins >= 4 && curves_ok == 5 && diverged == 0 && elapsed <= 900.0;
  out.detail = fmt("regret wins %d/5, halved curves %d/5, diverged %d, "
                   "%.0f s (need >= 4 wins, 5 curves, <= 900 s);%s",
                   wins, curves_ok, diverged, elapsed, pairs.c_str());
  return out;
}

// Two identically seeded sweeps must agree byte for byte on the identity and
// accuracy columns of the report.
Outcome check_reproducibility() {
  const auto start = Clock::now();
  bpqp::BenchConfig cfg;
  cfg.families = {bpqp::ProblemFamily::Qp, bpqp::ProblemFamily::Lp,
                  bpqp::ProblemFamily::Socp};
  cfg.dims = {bpqp::DimsSpec{10, 5, 5}};
  cfg.runs = 200;
  cfg.seed = 0;
  cfg.fd_samples = 8;
  const std::string first = bpqp::render_csv(bpqp::run_benchmark(cfg));
  const std::string second = bpqp::render_csv(bpqp::run_benchmark(cfg));

  auto split = [](const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t from = 0;
    while (from <= text.size()) {
      const std::size_t to = text.find(sep, from);
      if (to == std::string::npos) {
        parts.push_back(text.substr(from));
        break;
      }
      parts.push_back(text.substr(from, to - from));
      from = to + 1;
    }
    return parts;
  };
  const std::vector<std::string> lines_a = split(first, '\n');
  const std::vector<std::string> lines_b = split(second, '\n');
  bool identical = lines_a.size() == lines_b.size();
  int mismatches = 0;
  // family, dims, method plus cos_sim_mean, cos_sim_std, fd_rel_err, failures
  const std::vector<std::size_t> compared = {0, 1, 2, 9, 10, 11, 12};
  for (std::size_t r = 0; identical && r < lines_a.size(); ++r) {
    if (lines_a[r].empty() && lines_b[r].empty()) continue;
    const std::vector<std::string> fa = split(lines_a[r], ',');
    const std::vector<std::string> fb = split(lines_b[r], ',');
    if (fa.size() != fb.size()) {
      identical = false;
      break;
    }
    for (const std::size_t idx : compared) {
      if (idx < fa.size() && fa[idx] != fb[idx]) ++mismatches;
    }
  }
  identical = identical && mismatches == 0;
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = identical && lines_a.size() > 2;
  out.detail = fmt("%zu report lines, %d accuracy-column mismatches, %.1f s "
                   "(need byte-identical)",
                   lines_a.size(), mismatches, elapsed);
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {"qp-gradient-accuracy", check_qp_gradient_accuracy},
      {"socp-gradient-accuracy", check_socp_gradient_accuracy},
      {"finite-difference-audit", check_finite_difference_audit},
      {"backward-speed-ordering", check_backward_speed},
      {"forward-solver-correctness", check_forward_correctness},
      {"external-solution-decoupling", check_external_solution_decoupling},
      {"end-to-end-ordering", check_end_to_end_ordering},
      {"report-reproducibility", check_reproducibility},
  };
  int failures = 0;
  int index = 1;
  for (const Entry& entry : entries) {
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.detail = fmt("exception: %s", err.what());
    }
    if (!outcome.pass) ++failures;
    std::printf("%s  %d. %s: %s\n", outcome.pass ? "PASS" : "FAIL", index,
                entry.name, outcome.detail.c_str());
    std::fflush(stdout);
    ++index;
  }
  if (failures > 0) {
    std::printf("%d of 8 checks failed\n", failures);
    return 1;
  }
  std::printf("all 8 checks passed\n");
  return 0;
}
