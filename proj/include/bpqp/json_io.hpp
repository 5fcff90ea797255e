// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "bpqp/backward.hpp"
#include "bpqp/layers.hpp"
#include "bpqp/problem.hpp"

namespace bpqp {

using Json = nlohmann::json;

Json to_json(const Mat& matrix);  // row-major nested arrays
Json to_json(const Vec& vector);
Mat mat_from_json(const Json& j);
Vec vec_from_json(const Json& j);

Json to_json(const QpProblem& problem);
QpProblem qp_from_json(const Json& j);

Json to_json(const Solution& solution);
Solution solution_from_json(const Json& j);

Json to_json(const LpLayerSpec& spec);
LpLayerSpec lp_from_json(const Json& j);

Json to_json(const SocpLayerSpec& spec);
SocpLayerSpec socp_from_json(const Json& j);

Json to_json(const GradientBundle& bundle);

SolveStatus status_from_string(const std::string& name);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace bpqp
