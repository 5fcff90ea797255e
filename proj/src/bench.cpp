// SPDX-License-Identifier: Apache-2.0

#include "bpqp/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bpqp/backward.hpp"
#include "bpqp/json_io.hpp"
#include "bpqp/layers.hpp"

namespace bpqp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return kNan;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Population standard deviation so single-run cells report 0 rather than nan.
double std_of(const std::vector<double>& xs) {
  if (xs.empty()) return kNan;
  const double mu = mean_of(xs);
  double sum = 0.0;
  for (double x : xs) sum += (x - mu) * (x - mu);
  return std::sqrt(sum / static_cast<double>(xs.size()));
}

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

Vec loss_gradient(BenchLoss loss, Index d) {
  switch (loss) {
    case BenchLoss::OnesDotZ:
      return Vec::Ones(d);
  }
  throw std::invalid_argument("unknown bench loss");
}

double loss_value(BenchLoss loss, const Vec& z) {
  switch (loss) {
    case BenchLoss::OnesDotZ:
      return z.sum();
  }
  throw std::invalid_argument("unknown bench loss");
}

Vec socp_exact_dq(const SocpLayerSpec& spec, const Vec& dl_dz) {
  const double q_norm = spec.q.norm();
  if (q_norm == 0.0) throw ZeroVector("socp oracle needs q != 0");
  const Vec q_hat = spec.q / q_norm;
  return -spec.b(0) / q_norm * (dl_dz - q_hat * q_hat.dot(dl_dz));
}

double socp_fd_audit(const SocpLayerSpec& spec, BenchLoss loss, double h,
                     const SolverSettings& settings) {
  const SocpForward base = socp_layer_forward(spec, settings);
  const Vec dl = loss_gradient(loss, spec.dim());
  const Vec dq = socp_layer_backward(base.tape, dl).dq;
  Vec fd(spec.dim());
  for (Index j = 0; j < spec.dim(); ++j) {
    SocpLayerSpec plus = spec;
    SocpLayerSpec minus = spec;
    plus.q(j) += h;
    minus.q(j) -= h;
    const double up = loss_value(loss, socp_layer_forward(plus, settings).z);
    const double dn = loss_value(loss, socp_layer_forward(minus, settings).z);
    fd(j) = (up - dn) / (2.0 * h);
  }
  return (fd - dq).norm() / std::max(fd.norm(), 1e-12);
}

struct CellAccumulator {
  std::vector<double> fwd, bwd, total, cos;
  int failures = 0;

  void record(double fwd_s, double bwd_s, double cos_sim) {
    fwd.push_back(fwd_s);
    bwd.push_back(bwd_s);
    total.push_back(fwd_s + bwd_s);
    cos.push_back(cos_sim);
  }
};

void run_qp_like_instance(const QpProblem& problem, BenchMethod method,
                          BenchLoss loss, const SolverSettings& settings,
                          CellAccumulator& acc) {
  auto start = Clock::now();
  const Solution sol = admm_solve(problem, settings);
  const double fwd_s = seconds_since(start);
  if (sol.status != SolveStatus::Solved) {
    ++acc.failures;
    return;
  }
  const Vec dl = loss_gradient(loss, problem.dim());

  Vec dq;
  double bwd_s = 0.0;
  if (method == BenchMethod::Bpqp) {
    start = Clock::now();
    const ActiveSet active = detect_active_set(problem, sol);
    const BackwardProblem bp =
        build_backward_problem(problem, sol, active, dl);
    const BackwardSolution bs = solve_backward(bp, settings.kkt_delta);
    const GradientBundle bundle = assemble_qp_gradients(sol, active, bs);
    bwd_s = seconds_since(start);
    dq = bundle.dq;
  } else {
    start = Clock::now();
    const GradientBundle bundle = exact_backward_oracle(problem, sol, dl);
    bwd_s = seconds_since(start);
    dq = bundle.dq;
  }

  const Vec oracle_dq = method == BenchMethod::ExactOracle
                            ? dq
                            : exact_backward_oracle(problem, sol, dl).dq;
  acc.record(fwd_s, bwd_s, gradient_agreement(dq, oracle_dq));
}

void run_socp_instance(const SocpLayerSpec& spec, BenchMethod method,
                       BenchLoss loss, const SolverSettings& settings,
                       CellAccumulator& acc) {
  auto start = Clock::now();
  const SocpForward fwd = socp_layer_forward(spec, settings);
  const double fwd_s = seconds_since(start);
  const Vec dl = loss_gradient(loss, spec.dim());

  Vec dq;
  double bwd_s = 0.0;
  if (method == BenchMethod::Bpqp) {
    start = Clock::now();
    dq = socp_layer_backward(fwd.tape, dl).dq;
    bwd_s = seconds_since(start);
  } else {
    start = Clock::now();
    dq = socp_exact_dq(spec, dl);
    bwd_s = seconds_since(start);
  }

  const Vec oracle_dq =
      method == BenchMethod::ExactOracle ? dq : socp_exact_dq(spec, dl);
  acc.record(fwd_s, bwd_s, gradient_agreement(dq, oracle_dq));
}

BenchRow run_cell(ProblemFamily family, const DimsSpec& dims,
                  BenchMethod method, const BenchConfig& cfg) {
  BenchRow row;
  row.family = to_string(family);
  row.dims = dims.canonical();
  row.method = to_string(method);

  const SolverSettings settings = SolverSettings::standard();
  GenSpec gspec;
  gspec.family = family;
  gspec.d = dims.d;
  gspec.m_eq = dims.m_eq;
  gspec.n_ineq = dims.n_ineq;

  CellAccumulator acc;
  auto run_one = [&](int index, CellAccumulator& target) {
    gspec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
    try {
      switch (family) {
        case ProblemFamily::Qp:
          run_qp_like_instance(gen_qp(gspec), method, cfg.loss, settings,
                               target);
          break;
        case ProblemFamily::Lp:
          run_qp_like_instance(lower_lp(gen_lp(gspec)), method, cfg.loss,
                               settings, target);
          break;
        case ProblemFamily::Socp:
          run_socp_instance(gen_socp(gspec), method, cfg.loss, settings,
                            target);
          break;
      }
    } catch (const std::exception&) {
      ++target.failures;
    }
  };

  CellAccumulator warmup;
  run_one(0, warmup);
  for (int r = 0; r < cfg.runs; ++r) {
    run_one(r, acc);
  }

  row.fwd_mean = mean_of(acc.fwd);
  row.fwd_std = std_of(acc.fwd);
  row.bwd_mean = mean_of(acc.bwd);
  row.bwd_std = std_of(acc.bwd);
  row.total_mean = mean_of(acc.total);
  row.total_std = std_of(acc.total);
  row.cos_sim_mean = mean_of(acc.cos);
  row.cos_sim_std = std_of(acc.cos);
  row.failures = acc.failures;

  std::vector<double> fd_errors;
  const int fd_count = std::min(cfg.fd_samples, cfg.runs);
  for (int k = 0; k < fd_count; ++k) {
    gspec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    try {
      switch (family) {
        case ProblemFamily::Qp:
          fd_errors.push_back(finite_difference_audit(
              gen_qp(gspec), cfg.loss, cfg.fd_step, settings));
          break;
        case ProblemFamily::Lp:
          fd_errors.push_back(finite_difference_audit(
              lower_lp(gen_lp(gspec)), cfg.loss, cfg.fd_step, settings));
          break;
        case ProblemFamily::Socp:
          fd_errors.push_back(
              socp_fd_audit(gen_socp(gspec), cfg.loss, cfg.fd_step, settings));
          break;
      }
    } catch (const std::exception&) {
      // Flipped or unsolved probes are excluded from the audit mean.
    }
  }
  row.fd_rel_err = mean_of(fd_errors);
  return row;
}

}  // namespace

std::string DimsSpec::canonical() const {
  std::ostringstream out;
  out << d << 'x' << m_eq << 'x' << n_ineq;
  return out.str();
}

DimsSpec DimsSpec::parse(const std::string& text) {
  DimsSpec dims;
  long long values[3] = {0, 0, -1};
  int count = 0;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, 'x')) {
    if (count >= 3 || token.empty()) {
      throw std::invalid_argument("bad dims spec: " + text);
    }
    values[count++] = std::stoll(token);
  }
  if (count < 2) {
    throw std::invalid_argument("bad dims spec: " + text);
  }
  dims.d = values[0];
  dims.m_eq = values[1];
  dims.n_ineq = count == 3 ? values[2] : values[1];
  if (dims.d < 1 || dims.m_eq < 0 || dims.n_ineq < 0) {
    throw std::invalid_argument("bad dims spec: " + text);
  }
  return dims;
}

const char* to_string(BenchMethod method) {
  return method == BenchMethod::Bpqp ? "bpqp" : "exact";
}

BenchMethod method_from_string(const std::string& name) {
  if (name == "bpqp") return BenchMethod::Bpqp;
  if (name == "exact") return BenchMethod::ExactOracle;
  throw std::invalid_argument("unknown method: " + name);
}

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("runs must be at least 1");
  struct Cell {
    ProblemFamily family;
    DimsSpec dims;
    BenchMethod method;
  };
  std::vector<Cell> cells;
  for (ProblemFamily family : cfg.families) {
    for (const DimsSpec& dims : cfg.dims) {
      for (BenchMethod method : cfg.methods) {
        cells.push_back({family, dims, method});
      }
    }
  }

  std::vector<BenchRow> rows(cells.size());
  if (cfg.parallel) {
    std::vector<std::future<BenchRow>> futures;
    futures.reserve(cells.size());
    for (const Cell& cell : cells) {
      futures.push_back(std::async(std::launch::async, [&cfg, cell] {
        return run_cell(cell.family, cell.dims, cell.method, cfg);
      }));
    }
    for (size_t i = 0; i < futures.size(); ++i) {
      rows[i] = futures[i].get();
    }
  } else {
    for (size_t i = 0; i < cells.size(); ++i) {
      rows[i] = run_cell(cells[i].family, cells[i].dims, cells[i].method, cfg);
    }
  }
  return rows;
}

double finite_difference_audit(const QpProblem& problem, BenchLoss loss,
                               double h, const SolverSettings& settings) {
  if (h <= 0) throw std::invalid_argument("fd step must be positive");
  // Probes must resolve solution shifts of order h, so the probe tolerance
  // tracks the step size well below it; at the caller's tolerance a probe can
  // stop on an iterate whose multipliers blur the active-set comparison.
  SolverSettings probe = settings;
  probe.eps_abs = std::max(std::min(settings.eps_abs, 1e-3 * h), 1e-12);
  probe.eps_rel = std::max(std::min(settings.eps_rel, 1e-3 * h), 1e-12);
  auto [z_base, tape] = qp_layer_forward(problem, probe);
  const Vec dl = loss_gradient(loss, problem.dim());
  const Vec dq = qp_layer_backward(tape, dl).dq;
  const std::vector<Index>& base_active = tape.active().indices;

  Vec fd(problem.dim());
  for (Index j = 0; j < problem.dim(); ++j) {
    QpProblem plus = problem;
    QpProblem minus = problem;
    plus.q(j) += h;
    minus.q(j) -= h;
    auto [z_plus, tape_plus] = qp_layer_forward(plus, probe);
    auto [z_minus, tape_minus] = qp_layer_forward(minus, probe);
    if (tape_plus.active().indices != base_active ||
        tape_minus.active().indices != base_active) {
      throw ActiveSetFlip("active set changed under perturbation of q[" +
                          std::to_string(j) + "]");
    }
    fd(j) = (loss_value(loss, z_plus) - loss_value(loss, z_minus)) / (2.0 * h);
  }
  return (fd - dq).norm() / std::max(fd.norm(), 1e-12);
}

std::string render_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "family,dims,method,fwd_mean,fwd_std,bwd_mean,bwd_std,total_mean,"
         "total_std,cos_sim_mean,cos_sim_std,fd_rel_err,failures\n";
  for (const BenchRow& row : rows) {
    out << row.family << ',' << row.dims << ',' << row.method << ','
        << format_g17(row.fwd_mean) << ',' << format_g17(row.fwd_std) << ','
        << format_g17(row.bwd_mean) << ',' << format_g17(row.bwd_std) << ','
        << format_g17(row.total_mean) << ',' << format_g17(row.total_std)
        << ',' << format_g17(row.cos_sim_mean) << ','
        << format_g17(row.cos_sim_std) << ',' << format_g17(row.fd_rel_err)
        << ',' << row.failures << '\n';
  }
  return out.str();
}

void emit_report(const std::vector<BenchRow>& rows, const std::string& format,
                 const std::string& path) {
  if (format == "csv") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << render_csv(rows);
    if (!out) throw std::runtime_error("write failed: " + path);
    return;
  }
  if (format == "json") {
    Json array = Json::array();
    for (const BenchRow& row : rows) {
      array.push_back(Json{{"family", row.family},
                           {"dims", row.dims},
                           {"method", row.method},
                           {"fwd_mean", row.fwd_mean},
                           {"fwd_std", row.fwd_std},
                           {"bwd_mean", row.bwd_mean},
                           {"bwd_std", row.bwd_std},
                           {"total_mean", row.total_mean},
                           {"total_std", row.total_std},
                           {"cos_sim_mean", row.cos_sim_mean},
                           {"cos_sim_std", row.cos_sim_std},
                           {"fd_rel_err", row.fd_rel_err},
                           {"failures", row.failures}});
    }
    write_json_file(path, array);
    return;
  }
  throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace bpqp
