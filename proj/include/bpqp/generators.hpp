// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "bpqp/layers.hpp"
#include "bpqp/problem.hpp"

namespace bpqp {

enum class ProblemFamily { Qp, Lp, Socp };

const char* to_string(ProblemFamily family);
ProblemFamily family_from_string(const std::string& name);

struct GenSpec {
  ProblemFamily family = ProblemFamily::Qp;
  Index d = 10;
  Index m_eq = 5;
  Index n_ineq = 5;
  std::uint64_t seed = 0;
  double eps = 1e-6;    // LP smoothing strength
  double delta = 1e-6;  // QP positive-definite shift
};

// Mersenne engine (bit-portable by the standard) with an explicit Box-Muller
// transform, because library normal distributions differ across platforms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }
  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Decorrelated per-instance seed for element `index` of a batch.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Entries are drawn row-major in field order: gen_qp draws P', q, A, b, G,
// then the slack point z' defining c = G z'; gen_lp draws theta, A, b, G, z';
// gen_socp draws q then resamples b_1 until positive.
QpProblem gen_qp(const GenSpec& spec);
LpLayerSpec gen_lp(const GenSpec& spec);
SocpLayerSpec gen_socp(const GenSpec& spec);

}  // namespace bpqp
