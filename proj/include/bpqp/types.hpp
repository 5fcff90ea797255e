// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace bpqp {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Factorization hit a pivot too small to divide by.
struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative refinement failed to reach its residual tolerance.
struct RefinementStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Active-set KKT system is singular even after regularization.
struct SingularBackwardSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vector that must be nonzero (e.g. a cone-constraint linear term) is zero.
struct ZeroVector : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SOCP instance outside the supported subclass.
struct UnsupportedSocp : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Externally supplied solution fails the KKT feasibility screen.
struct InvalidExternalSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Layer forward solve did not reach an acceptable status.
struct LayerForwardFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Finite-difference audit perturbed a constraint in or out of the active set.
struct ActiveSetFlip : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Return series is constant or otherwise degenerate for the requested metric.
struct DegenerateSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough history rows to fit the risk model at the requested date.
struct InsufficientHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bpqp
