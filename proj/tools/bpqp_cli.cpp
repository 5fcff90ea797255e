// SPDX-License-Identifier: Apache-2.0
// Command line front end: problem generation, benchmarking, the portfolio
// experiment, and one-shot solves over JSON files.

#include "CLI11.hpp"

#include "bpqp/admm.hpp"
#include "bpqp/bench.hpp"
#include "bpqp/generators.hpp"
#include "bpqp/json_io.hpp"
#include "bpqp/portfolio.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using bpqp::Index;

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

bpqp::ProblemFamily parse_family(const std::string& name) {
  return bpqp::family_from_string(name);
}

std::string instance_filename(const bpqp::GenSpec& spec, int index) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s_%ldx%ldx%ld_%04d.json",
                bpqp::to_string(spec.family), static_cast<long>(spec.d),
                static_cast<long>(spec.m_eq), static_cast<long>(spec.n_ineq),
                index);
  return buf;
}

int run_gen(const std::string& family_str, const std::string& dims_str,
            int count, std::uint64_t seed, const std::string& out_dir) {
  const bpqp::ProblemFamily family = parse_family(family_str);
  const bpqp::DimsSpec dims = bpqp::DimsSpec::parse(dims_str);
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    bpqp::GenSpec spec;
    spec.family = family;
    spec.d = dims.d;
    spec.m_eq = dims.m_eq;
    spec.n_ineq = dims.n_ineq;
    spec.seed = bpqp::derive_seed(seed, static_cast<std::uint64_t>(i));
    const std::filesystem::path path =
        std::filesystem::path(out_dir) / instance_filename(spec, i);
    bpqp::Json doc;
    switch (family) {
      case bpqp::ProblemFamily::Qp:
        doc = bpqp::to_json(bpqp::gen_qp(spec));
        break;
      case bpqp::ProblemFamily::Lp:
        doc = bpqp::to_json(bpqp::gen_lp(spec));
        break;
      case bpqp::ProblemFamily::Socp:
        doc = bpqp::to_json(bpqp::gen_socp(spec));
        break;
    }
    bpqp::write_json_file(path.string(), doc);
  }
  std::cout << "wrote " << count << " " << bpqp::to_string(family)
            << " instances to " << out_dir << "\n";
  return 0;
}

int run_bench(const std::string& families_str, const std::string& dims_str,
              int runs, std::uint64_t seed, const std::string& out_path,
              const std::string& format, const std::string& methods_str,
              int fd_samples, double fd_step, bool parallel) {
  bpqp::BenchConfig cfg;
  cfg.families.clear();
  for (const auto& name : split_commas(families_str)) {
    cfg.families.push_back(parse_family(name));
  }
  cfg.dims.clear();
  for (const auto& token : split_commas(dims_str)) {
    cfg.dims.push_back(bpqp::DimsSpec::parse(token));
  }
  cfg.methods.clear();
  for (const auto& name : split_commas(methods_str)) {
    if (name == "bpqp") {
      cfg.methods.push_back(bpqp::BenchMethod::Bpqp);
    } else if (name == "exact") {
      cfg.methods.push_back(bpqp::BenchMethod::ExactOracle);
    } else {
      throw std::invalid_argument("unknown method: " + name);
    }
  }
  cfg.runs = runs;
  cfg.seed = seed;
  cfg.fd_samples = fd_samples;
  cfg.fd_step = fd_step;
  cfg.parallel = parallel;

  const std::vector<bpqp::BenchRow> rows = bpqp::run_benchmark(cfg);
  bpqp::emit_report(rows, format, out_path);
  std::cout << bpqp::render_csv(rows);

  int total_failures = 0;
  for (const auto& row : rows) total_failures += row.failures;
  if (total_failures > 0) {
    std::cerr << "bench: " << total_failures << " instance failures\n";
    return 2;
  }
  return 0;
}

bpqp::SyntheticSpec parse_synthetic(const std::string& text) {
  bpqp::SyntheticSpec spec;
  for (const auto& pair : split_commas(text)) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("expected key=value in --synthetic: " + pair);
    }
    const std::string key = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    if (key == "d") {
      spec.d = std::stol(value);
    } else if (key == "T") {
      spec.days = std::stol(value);
    } else if (key == "F") {
      spec.num_features = std::stol(value);
    } else if (key == "snr") {
      spec.snr = std::stod(value);
    } else {
      throw std::invalid_argument("unknown synthetic key: " + key);
    }
  }
  return spec;
}

bpqp::Json metrics_to_json(const bpqp::MetricsReport& metrics) {
  return bpqp::Json{{"ic", metrics.ic},
                    {"icir", metrics.icir},
                    {"annualized_return", metrics.ann_ret},
                    {"sharpe", metrics.sharpe},
                    {"regret", metrics.regret}};
}

int run_portfolio(const std::string& synthetic_str, const std::string& mode_str,
                  int epochs, std::uint64_t seed, double learning_rate,
                  double beta, const std::string& out_path) {
  bpqp::SyntheticSpec spec = parse_synthetic(synthetic_str);
  spec.seed = seed;
  const bpqp::ReturnsPanel panel = bpqp::gen_synthetic_panel(spec);

  bpqp::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.learning_rate = learning_rate;
  cfg.beta = beta;

  bpqp::TrainMode mode;
  if (mode_str == "e2e") {
    mode = bpqp::TrainMode::EndToEnd;
  } else if (mode_str == "two-stage") {
    mode = bpqp::TrainMode::TwoStage;
  } else {
    throw std::invalid_argument("mode must be e2e or two-stage");
  }

  const bpqp::TrainReport result = bpqp::train_e2e(panel, cfg, mode);

  bpqp::Json curve = bpqp::Json::array();
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    curve.push_back({{"epoch", i},
                     {"prediction_loss", result.curve[i].prediction_loss},
                     {"decision_loss", result.curve[i].decision_loss}});
  }
  bpqp::Json doc{{"mode", mode_str},
                 {"synthetic",
                  {{"d", spec.d},
                   {"T", spec.days},
                   {"F", spec.num_features},
                   {"snr", spec.snr},
                   {"seed", spec.seed}}},
                 {"curve", curve},
                 {"metrics", metrics_to_json(result.metrics)},
                 {"predictor",
                  {{"weights", bpqp::to_json(result.weights)},
                   {"bias", result.bias}}},
                 {"diverged", result.diverged}};
  if (!out_path.empty()) bpqp::write_json_file(out_path, doc);

  std::cout << "mode=" << mode_str << " test_regret=" << result.metrics.regret
            << " sharpe=" << result.metrics.sharpe
            << " ic=" << result.metrics.ic << "\n";
  return result.diverged ? 2 : 0;
}

int run_solve(const std::string& problem_path, const std::string& out_path,
              const std::string& preset) {
  const bpqp::Json doc = bpqp::read_json_file(problem_path);
  const bpqp::QpProblem problem = bpqp::qp_from_json(doc);
  const bpqp::SolverSettings settings = preset == "portfolio"
                                            ? bpqp::SolverSettings::portfolio()
                                            : bpqp::SolverSettings::standard();
  const bpqp::Solution sol = bpqp::admm_solve(problem, settings);
  std::cout << "status=" << bpqp::to_string(sol.status)
            << " iterations=" << sol.iterations
            << " prim_res=" << sol.primal_residual
            << " dual_res=" << sol.dual_residual
            << " kkt=" << bpqp::kkt_residual_norm(problem, sol.z, sol.nu, sol.lambda)
            << "\n";
  if (!out_path.empty()) bpqp::write_json_file(out_path, bpqp::to_json(sol));
  return sol.status == bpqp::SolveStatus::Solved ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable convex optimization toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate random problem instances");
  std::string gen_family = "qp";
  std::string gen_dims = "10x5x5";
  int gen_count = 10;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "instances";
  gen->add_option("--family", gen_family, "qp, lp, or socp");
  gen->add_option("--dims", gen_dims, "DxM or DxMxN (vars x eq x ineq)");
  gen->add_option("--count", gen_count, "number of instances");
  gen->add_option("--seed", gen_seed, "base seed");
  gen->add_option("--out", gen_out, "output directory");

  auto* bench = app.add_subcommand("bench", "Run the gradient benchmark");
  std::string bench_families = "qp";
  std::string bench_dims = "10x5x5";
  int bench_runs = 200;
  std::uint64_t bench_seed = 0;
  std::string bench_out = "results.csv";
  std::string bench_format = "csv";
  std::string bench_methods = "bpqp,exact";
  int bench_fd_samples = 8;
  double bench_fd_step = 1e-5;
  bool bench_parallel = false;
  bench->add_option("--family", bench_families, "comma list: qp,lp,socp");
  bench->add_option("--dims", bench_dims, "comma list of DxM or DxMxN");
  bench->add_option("--runs", bench_runs, "timed instances per cell");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--out", bench_out, "report path");
  bench->add_option("--format", bench_format, "csv or json");
  bench->add_option("--methods", bench_methods, "comma list: bpqp,exact");
  bench->add_option("--fd-samples", bench_fd_samples,
                    "instances audited by finite differences");
  bench->add_option("--fd-step", bench_fd_step, "finite difference step");
  bench->add_flag("--parallel", bench_parallel, "run cells concurrently");

  auto* portfolio =
      app.add_subcommand("portfolio", "Train and evaluate the portfolio demo");
  std::string pf_synth = "d=20,T=600,snr=0.3";
  std::string pf_mode = "e2e";
  int pf_epochs = 20;
  std::uint64_t pf_seed = 0;
  double pf_lr = 0.05;
  double pf_beta = 0.1;
  std::string pf_out;
  portfolio->add_option("--synthetic", pf_synth,
                        "panel spec, e.g. d=20,T=600,snr=0.3");
  portfolio->add_option("--mode", pf_mode, "e2e or two-stage");
  portfolio->add_option("--epochs", pf_epochs, "training epochs");
  portfolio->add_option("--seed", pf_seed, "panel and training seed");
  portfolio->add_option("--lr", pf_lr, "gradient descent learning rate");
  portfolio->add_option("--beta", pf_beta, "prediction loss weight");
  portfolio->add_option("--out", pf_out, "JSON report path");

  auto* solve = app.add_subcommand("solve", "Solve one problem from JSON");
  std::string solve_problem;
  std::string solve_out;
  std::string solve_preset = "standard";
  solve->add_option("--problem", solve_problem, "input problem JSON")
      ->required();
  solve->add_option("--out", solve_out, "solution JSON path");
  solve->add_option("--preset", solve_preset, "standard or portfolio");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      return run_gen(gen_family, gen_dims, gen_count, gen_seed, gen_out);
    }
    if (*bench) {
      return run_bench(bench_families, bench_dims, bench_runs, bench_seed,
                       bench_out, bench_format, bench_methods, bench_fd_samples,
                       bench_fd_step, bench_parallel);
    }
    if (*portfolio) {
      return run_portfolio(pf_synth, pf_mode, pf_epochs, pf_seed, pf_lr,
                           pf_beta, pf_out);
    }
    if (*solve) {
      return run_solve(solve_problem, solve_out, solve_preset);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
