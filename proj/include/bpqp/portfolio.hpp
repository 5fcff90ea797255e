// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bpqp/layers.hpp"
#include "bpqp/problem.hpp"

namespace bpqp {

struct MvoSpec {
  double gamma = 1.0;  // risk aversion
  Mat sigma;           // asset covariance, PSD
};

// Long-only fully-invested mean-variance allocation:
//   maximize mu^T w - (gamma/2) w^T Sigma w  s.t.  1^T w = 1, w >= 0,
// lowered to the standard QP form (P = gamma Sigma, q = -mu).
std::pair<Vec, LayerTape> mvo_forward(
    const Vec& mu_hat, const MvoSpec& spec,
    const SolverSettings& settings = SolverSettings::portfolio());

// dL/dmu; the sign flip undoes q = -mu.
Vec mvo_backward(const LayerTape& tape, const Vec& dl_dw);

struct RegretLoss {
  double loss = 0.0;             // regret_term + beta * prediction_term
  double regret_term = 0.0;      // (f_y(w(mu_hat)) - f_y(w(y)))^2
  double prediction_term = 0.0;  // ||y - mu_hat||^2
  Vec dmu;                       // d loss / d mu_hat
};

RegretLoss regret_prediction_loss(
    const Vec& mu_hat, const Vec& y, const MvoSpec& spec, double beta,
    const SolverSettings& settings = SolverSettings::portfolio());

// PCA factor covariance: top-k eigenpairs of the sample covariance of the
// window plus the diagonal of the residual. k >= d returns the sample
// covariance itself.
Mat statistical_risk_model(const Mat& returns_window, Index k = 10);

// Synthetic panel: per-day features and same-day realized returns, in
// percent units. The return signal is a saturated (tanh) function of a
// linear factor plus a market factor and idiosyncratic noise; the factor
// loading tilts one way on low-risk assets and the other way on high-risk
// ones, so a single least-squares linear fit is deliberately misspecified
// in a direction that matters for allocation.
struct ReturnsPanel {
  Mat realized;               // days x assets
  std::vector<Mat> features;  // one (assets x factors) matrix per day

  Index num_days() const { return realized.rows(); }
  Index num_assets() const { return realized.cols(); }
  Index num_features() const {
    return features.empty() ? 0 : features.front().cols();
  }
};

struct SyntheticSpec {
  Index d = 20;
  Index days = 600;
  Index num_features = 5;
  double snr = 2.0;  // signal std over noise std
  std::uint64_t seed = 0;
};

ReturnsPanel gen_synthetic_panel(const SyntheticSpec& spec);

struct TrainConfig {
  double beta = 0.1;        // prediction-term weight
  double alpha_reg = 0.0;   // weight decay
  double learning_rate = 0.01;
  int epochs = 20;
  int rebalance_every = 5;
  std::uint64_t seed = 0;
  Index risk_window = 240;
  Index risk_k = 10;
  double train_fraction = 0.6;  // of rebalance days; the rest is test
  double gamma = 1.0;
};

enum class TrainMode { EndToEnd, TwoStage };

struct EpochPoint {
  double prediction_loss = 0.0;  // mean ||y - mu_hat||^2 over train days
  double decision_loss = 0.0;    // mean squared regret over train days
};

struct MetricsReport {
  double ic = 0.0;
  double icir = 0.0;
  double ann_ret = 0.0;
  double sharpe = 0.0;
  double regret = 0.0;
};

struct TrainReport {
  Vec weights;  // linear predictor, one coefficient per feature
  double bias = 0.0;
  std::vector<EpochPoint> curve;
  MetricsReport metrics;  // on the held-out test span
  bool diverged = false;
};

// Trains the linear predictor through the allocation layer (EndToEnd) or on
// pure mean squared error (TwoStage), then evaluates on the test span.
TrainReport train_e2e(const ReturnsPanel& panel, const TrainConfig& cfg,
                      TrainMode mode);

// Aligned evaluation series: one row per decision point for predictions,
// targets and regret terms; one row per held day for weights and returns.
struct PerformanceSeries {
  Mat predictions;
  Mat targets;
  Vec regret_terms;
  Mat daily_weights;
  Mat daily_returns;
};

// IC averages the per-decision cross-sectional Pearson correlation; ICIR
// divides by its sample std; annualization uses 252 trading days; Sharpe is
// AnnRet over AnnVol; Regret averages the squared decision errors.
MetricsReport portfolio_metrics(const PerformanceSeries& series);

}  // namespace bpqp
