// SPDX-License-Identifier: Apache-2.0

#include "bpqp/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace bpqp {

Json to_json(const Mat& matrix) {
  Json rows = Json::array();
  for (Index i = 0; i < matrix.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < matrix.cols(); ++j) {
      row.push_back(matrix(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vec& vector) {
  Json values = Json::array();
  for (Index i = 0; i < vector.size(); ++i) {
    values.push_back(vector(i));
  }
  return values;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix JSON must be an array");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  const Index cols = static_cast<Index>(j.at(0).size());
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<size_t>(i));
    if (static_cast<Index>(row.size()) != cols) {
      throw std::invalid_argument("ragged matrix JSON");
    }
    for (Index k = 0; k < cols; ++k) {
      out(i, k) = row.at(static_cast<size_t>(k)).get<double>();
    }
  }
  return out;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector JSON must be an array");
  Vec out(static_cast<Index>(j.size()));
  for (Index i = 0; i < out.size(); ++i) {
    out(i) = j.at(static_cast<size_t>(i)).get<double>();
  }
  return out;
}

Json to_json(const QpProblem& problem) {
  return Json{{"P", to_json(problem.p)}, {"q", to_json(problem.q)},
              {"A", to_json(problem.a)}, {"b", to_json(problem.b)},
              {"G", to_json(problem.g)}, {"c", to_json(problem.c)}};
}

QpProblem qp_from_json(const Json& j) {
  QpProblem problem;
  problem.p = mat_from_json(j.at("P"));
  problem.q = vec_from_json(j.at("q"));
  problem.a = mat_from_json(j.at("A"));
  problem.b = vec_from_json(j.at("b"));
  problem.g = mat_from_json(j.at("G"));
  problem.c = vec_from_json(j.at("c"));
  if (problem.a.rows() == 0) problem.a.resize(0, problem.dim());
  if (problem.g.rows() == 0) problem.g.resize(0, problem.dim());
  problem.validate();
  return problem;
}

Json to_json(const Solution& solution) {
  return Json{{"z_star", to_json(solution.z)},
              {"nu_star", to_json(solution.nu)},
              {"lambda_star", to_json(solution.lambda)},
              {"status", to_string(solution.status)},
              {"iterations", solution.iterations},
              {"prim_res", solution.primal_residual},
              {"dual_res", solution.dual_residual}};
}

Solution solution_from_json(const Json& j) {
  Solution solution;
  solution.z = vec_from_json(j.at("z_star"));
  solution.nu = vec_from_json(j.at("nu_star"));
  solution.lambda = vec_from_json(j.at("lambda_star"));
  solution.status = status_from_string(j.at("status").get<std::string>());
  solution.iterations = j.value("iterations", 0);
  solution.primal_residual = j.value("prim_res", 0.0);
  solution.dual_residual = j.value("dual_res", 0.0);
  return solution;
}

Json to_json(const LpLayerSpec& spec) {
  return Json{{"theta", to_json(spec.theta)}, {"eps", spec.eps},
              {"A", to_json(spec.a)},         {"b", to_json(spec.b)},
              {"G", to_json(spec.g)},         {"h", to_json(spec.h)}};
}

LpLayerSpec lp_from_json(const Json& j) {
  LpLayerSpec spec;
  spec.theta = vec_from_json(j.at("theta"));
  spec.eps = j.value("eps", 1e-6);
  spec.a = mat_from_json(j.at("A"));
  spec.b = vec_from_json(j.at("b"));
  spec.g = mat_from_json(j.at("G"));
  spec.h = vec_from_json(j.at("h"));
  if (spec.a.rows() == 0) spec.a.resize(0, spec.theta.size());
  if (spec.g.rows() == 0) spec.g.resize(0, spec.theta.size());
  return spec;
}

Json to_json(const SocpLayerSpec& spec) {
  Json a_rows = Json::array();
  for (const Vec& a_i : spec.a) {
    a_rows.push_back(to_json(a_i));
  }
  return Json{{"q", to_json(spec.q)}, {"a", std::move(a_rows)},
              {"b", to_json(spec.b)}};
}

SocpLayerSpec socp_from_json(const Json& j) {
  SocpLayerSpec spec;
  spec.q = vec_from_json(j.at("q"));
  for (const Json& row : j.at("a")) {
    spec.a.push_back(vec_from_json(row));
  }
  spec.b = vec_from_json(j.at("b"));
  return spec;
}

Json to_json(const GradientBundle& bundle) {
  Json active = Json::array();
  for (Index i : bundle.active_indices) active.push_back(i);
  return Json{{"dP", to_json(bundle.dP)},
              {"dq", to_json(bundle.dq)},
              {"dA", to_json(bundle.dA)},
              {"db", to_json(bundle.db)},
              {"dG", to_json(bundle.dG)},
              {"dc", to_json(bundle.dc)},
              {"active_indices", std::move(active)},
              {"kkt_residual", bundle.kkt_residual}};
}

SolveStatus status_from_string(const std::string& name) {
  if (name == "solved") return SolveStatus::Solved;
  if (name == "solved_inaccurate") return SolveStatus::SolvedInaccurate;
  if (name == "max_iter_reached") return SolveStatus::MaxIterReached;
  if (name == "primal_infeasible") return SolveStatus::PrimalInfeasible;
  if (name == "dual_infeasible") return SolveStatus::DualInfeasible;
  throw std::invalid_argument("unknown status: " + name);
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  Json j;
  in >> j;
  return j;
}

}  // namespace bpqp
