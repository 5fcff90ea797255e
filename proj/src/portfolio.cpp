// SPDX-License-Identifier: Apache-2.0

#include "bpqp/portfolio.hpp"

#include <cmath>

#include "bpqp/generators.hpp"

namespace bpqp {

namespace {

QpProblem lower_mvo(const Vec& mu_hat, double gamma, const Mat& sigma) {
  const Index d = mu_hat.size();
  QpProblem problem;
  problem.p = gamma * sigma;
  problem.q = -mu_hat;
  problem.a = Mat::Ones(1, d);
  problem.b = Vec::Ones(1);
  problem.g = -Mat::Identity(d, d);
  problem.c = Vec::Zero(d);
  return problem;
}

double risk_adjusted_value(const Vec& y, const Vec& w, double gamma,
                           const Mat& sigma) {
  return y.dot(w) - 0.5 * gamma * w.dot(sigma * w);
}

double pearson(const Vec& a, const Vec& b) {
  const Index n = a.size();
  const Vec ac = a.array() - a.mean();
  const Vec bc = b.array() - b.mean();
  const double denom = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
  if (denom == 0.0 || n < 2) {
    throw DegenerateSeries("constant series in correlation");
  }
  return ac.dot(bc) / denom;
}

double sample_std(const Vec& xs) {
  if (xs.size() < 2) {
    throw DegenerateSeries("need at least two samples for a std");
  }
  const Vec centered = xs.array() - xs.mean();
  return std::sqrt(centered.squaredNorm() / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::pair<Vec, LayerTape> mvo_forward(const Vec& mu_hat, const MvoSpec& spec,
                                      const SolverSettings& settings) {
  if (spec.gamma <= 0) {
    throw std::invalid_argument("risk aversion must be positive");
  }
  if (spec.sigma.rows() != mu_hat.size() ||
      spec.sigma.cols() != mu_hat.size()) {
    throw std::invalid_argument("covariance dimensions disagree");
  }
  return qp_layer_forward(lower_mvo(mu_hat, spec.gamma, spec.sigma), settings);
}

Vec mvo_backward(const LayerTape& tape, const Vec& dl_dw) {
  return -qp_layer_backward(tape, dl_dw).dq;
}

RegretLoss regret_prediction_loss(const Vec& mu_hat, const Vec& y,
                                  const MvoSpec& spec, double beta,
                                  const SolverSettings& settings) {
  auto [w_hat, tape_hat] = mvo_forward(mu_hat, spec, settings);
  auto [w_ideal, tape_ideal] = mvo_forward(y, spec, settings);

  const double value_hat = risk_adjusted_value(y, w_hat, spec.gamma, spec.sigma);
  const double value_ideal =
      risk_adjusted_value(y, w_ideal, spec.gamma, spec.sigma);
  const double gap = value_hat - value_ideal;

  RegretLoss result;
  result.regret_term = gap * gap;
  result.prediction_term = (y - mu_hat).squaredNorm();
  result.loss = result.regret_term + beta * result.prediction_term;

  const Vec dl_dw = 2.0 * gap * (y - spec.gamma * (spec.sigma * w_hat));
  result.dmu = mvo_backward(tape_hat, dl_dw) + 2.0 * beta * (mu_hat - y);
  return result;
}

Mat statistical_risk_model(const Mat& returns_window, Index k) {
  const Index rows = returns_window.rows();
  const Index d = returns_window.cols();
  if (rows < 2 || rows < k) {
    throw InsufficientHistory("window of " + std::to_string(rows) +
                              " rows is too short");
  }
  const Mat centered = returns_window.rowwise() - returns_window.colwise().mean();
  const Mat sample =
      centered.transpose() * centered / static_cast<double>(rows - 1);
  if (k >= d) {
    return sample;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eigen(sample);
  if (eigen.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  // Eigenvalues ascend; factor candidates are the trailing k of them. A
  // candidate counts as structure only above the Marchenko-Pastur bulk edge
  // for this window's aspect ratio (with sampling-fluctuation headroom), so
  // pure noise keeps a flat spectrum instead of fabricating factors.
  const double sigma_bar =
      std::max(eigen.eigenvalues().cwiseMax(0.0).mean(), 0.0);
  const double aspect = static_cast<double>(d) / static_cast<double>(rows);
  const double sqrt_edge = 1.0 + std::sqrt(aspect);
  const double mp_edge = 1.1 * sigma_bar * sqrt_edge * sqrt_edge;
  Mat factor_part = Mat::Zero(d, d);
  for (Index i = d - k; i < d; ++i) {
    const double value = eigen.eigenvalues()(i);
    if (value <= mp_edge) continue;
    factor_part +=
        value * eigen.eigenvectors().col(i) * eigen.eigenvectors().col(i).transpose();
  }
  Vec residual = (sample - factor_part).diagonal().cwiseMax(0.0);
  Mat sigma = factor_part;
  sigma.diagonal() += residual;
  return 0.5 * (sigma + sigma.transpose());
}

ReturnsPanel gen_synthetic_panel(const SyntheticSpec& spec) {
  if (spec.d < 2 || spec.days < 10 || spec.num_features < 1) {
    throw std::invalid_argument("panel dimensions too small");
  }
  if (spec.snr <= 0) {
    throw std::invalid_argument("snr must be positive");
  }
  RandomStream stream(spec.seed);

  Vec factor_beta(spec.num_features);
  for (Index j = 0; j < spec.num_features; ++j) {
    factor_beta(j) = stream.normal();
  }
  // Half the assets carry a loading tilt orthogonal to the common factor and
  // the other half the opposite tilt, so the average response stays on the
  // common direction while each group answers to its own. The tilted group
  // with low idiosyncratic risk is the one worth allocating to, which is what
  // separates a decision-aware fit from a plain least-squares fit.
  Vec tilt = Vec::Zero(spec.num_features);
  if (spec.num_features > 1) {
    for (Index j = 0; j < spec.num_features; ++j) {
      tilt(j) = stream.normal();
    }
    tilt -= tilt.dot(factor_beta) / factor_beta.squaredNorm() * factor_beta;
    if (tilt.norm() > 1e-12) {
      tilt *= factor_beta.norm() / tilt.norm();
    }
  }
  Vec market_loading(spec.d);
  for (Index i = 0; i < spec.d; ++i) {
    market_loading(i) = 1.0 + 0.3 * stream.normal();
  }

  // Returns are in percent units so a unit risk aversion trades return
  // against risk instead of drowning the risk term at daily scale. Signal is
  // ~1 percent; noise is set by the snr knob and split between a market
  // factor and idiosyncratic moves. Group idio scales keep unit mean-square
  // so the snr knob keeps its meaning.
  const double signal_scale = 1.0;
  const double noise_scale = signal_scale / spec.snr;
  const double market_scale = noise_scale * std::sqrt(0.3);
  const double idio_scale = noise_scale * std::sqrt(0.7);
  const double low_risk_scale = std::sqrt(0.2);
  const double high_risk_scale = std::sqrt(1.8);

  ReturnsPanel panel;
  panel.realized.resize(spec.days, spec.d);
  panel.features.reserve(static_cast<size_t>(spec.days));
  for (Index t = 0; t < spec.days; ++t) {
    Mat x(spec.d, spec.num_features);
    for (Index i = 0; i < spec.d; ++i) {
      for (Index j = 0; j < spec.num_features; ++j) {
        x(i, j) = stream.normal();
      }
    }
    const double market = stream.normal();
    for (Index i = 0; i < spec.d; ++i) {
      const bool low_risk = i < spec.d / 2;
      const Vec beta_i = low_risk ? Vec(factor_beta + tilt)
                                  : Vec(factor_beta - tilt);
      const double idio_i = low_risk ? low_risk_scale : high_risk_scale;
      const double raw_signal = x.row(i).dot(beta_i);
      panel.realized(t, i) = signal_scale * std::tanh(raw_signal) +
                             market_scale * market_loading(i) * market +
                             idio_scale * idio_i * stream.normal();
    }
    panel.features.push_back(std::move(x));
  }
  return panel;
}

namespace {

struct SplitDays {
  std::vector<Index> train;
  std::vector<Index> test;
};

SplitDays rebalance_split(const ReturnsPanel& panel, const TrainConfig& cfg) {
  SplitDays split;
  std::vector<Index> all;
  for (Index t = cfg.risk_window; t < panel.num_days();
       t += cfg.rebalance_every) {
    all.push_back(t);
  }
  if (all.size() < 4) {
    throw InsufficientHistory("panel leaves too few rebalance days");
  }
  const size_t cut = static_cast<size_t>(
      std::max(1.0, cfg.train_fraction * static_cast<double>(all.size())));
  for (size_t i = 0; i < all.size(); ++i) {
    (i < cut ? split.train : split.test).push_back(all[i]);
  }
  if (split.test.empty()) {
    throw InsufficientHistory("no test days left after the split");
  }
  return split;
}

struct DayContext {
  MvoSpec spec;        // day-specific covariance
  Vec ideal_weights;   // allocation under the realized returns
  double ideal_value;  // its risk-adjusted value
};

DayContext make_day_context(const ReturnsPanel& panel, const TrainConfig& cfg,
                            Index day, const SolverSettings& settings) {
  DayContext ctx;
  ctx.spec.gamma = cfg.gamma;
  ctx.spec.sigma = statistical_risk_model(
      panel.realized.middleRows(day - cfg.risk_window, cfg.risk_window),
      cfg.risk_k);
  const Vec y = panel.realized.row(day).transpose();
  auto [w_ideal, tape] = mvo_forward(y, ctx.spec, settings);
  ctx.ideal_weights = w_ideal;
  ctx.ideal_value = risk_adjusted_value(y, w_ideal, cfg.gamma, ctx.spec.sigma);
  return ctx;
}

Vec predict(const Mat& features, const Vec& weights, double bias) {
  return (features * weights).array() + bias;
}

// Ridge least squares of stacked per-asset rows [features, 1] -> return.
void fit_two_stage(const ReturnsPanel& panel, const std::vector<Index>& days,
                   double alpha_reg, Vec& weights, double& bias) {
  const Index f = panel.num_features();
  Mat normal = Mat::Zero(f + 1, f + 1);
  Vec moment = Vec::Zero(f + 1);
  for (Index day : days) {
    const Mat& x = panel.features[static_cast<size_t>(day)];
    for (Index i = 0; i < x.rows(); ++i) {
      Vec row(f + 1);
      row.head(f) = x.row(i).transpose();
      row(f) = 1.0;
      normal += row * row.transpose();
      moment += panel.realized(day, i) * row;
    }
  }
  normal.topLeftCorner(f, f).diagonal().array() += alpha_reg;
  const Vec solution = normal.ldlt().solve(moment);
  weights = solution.head(f);
  bias = solution(f);
}

}  // namespace

TrainReport train_e2e(const ReturnsPanel& panel, const TrainConfig& cfg,
                      TrainMode mode) {
  if (panel.num_days() < cfg.risk_window + 2 || panel.features.empty()) {
    throw InsufficientHistory("panel shorter than the risk window");
  }
  const SolverSettings settings = SolverSettings::portfolio();
  const SplitDays split = rebalance_split(panel, cfg);

  std::vector<DayContext> train_ctx;
  train_ctx.reserve(split.train.size());
  for (Index day : split.train) {
    train_ctx.push_back(make_day_context(panel, cfg, day, settings));
  }

  TrainReport report;
  report.weights = Vec::Zero(panel.num_features());
  report.bias = 0.0;

  if (mode == TrainMode::TwoStage) {
    fit_two_stage(panel, split.train, cfg.alpha_reg, report.weights,
                  report.bias);
    EpochPoint point;
    double regret_sum = 0.0, pred_sum = 0.0;
    for (size_t k = 0; k < split.train.size(); ++k) {
      const Index day = split.train[k];
      const Vec y = panel.realized.row(day).transpose();
      const Vec mu = predict(panel.features[static_cast<size_t>(day)],
                             report.weights, report.bias);
      auto [w_hat, tape] = mvo_forward(mu, train_ctx[k].spec, settings);
      const double gap =
          risk_adjusted_value(y, w_hat, cfg.gamma, train_ctx[k].spec.sigma) -
          train_ctx[k].ideal_value;
      regret_sum += gap * gap;
      pred_sum += (y - mu).squaredNorm();
    }
    point.decision_loss = regret_sum / static_cast<double>(split.train.size());
    point.prediction_loss = pred_sum / static_cast<double>(split.train.size());
    report.curve.push_back(point);
  } else {
    const double count = static_cast<double>(split.train.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      Vec grad_w = Vec::Zero(panel.num_features());
      double grad_b = 0.0;
      EpochPoint point;
      for (size_t k = 0; k < split.train.size(); ++k) {
        const Index day = split.train[k];
        const DayContext& ctx = train_ctx[k];
        const Vec y = panel.realized.row(day).transpose();
        const Mat& x = panel.features[static_cast<size_t>(day)];
        const Vec mu = predict(x, report.weights, report.bias);

        auto [w_hat, tape] = mvo_forward(mu, ctx.spec, settings);
        const double gap =
            risk_adjusted_value(y, w_hat, cfg.gamma, ctx.spec.sigma) -
            ctx.ideal_value;
        const Vec dl_dw =
            2.0 * gap * (y - cfg.gamma * (ctx.spec.sigma * w_hat));
        const Vec dmu =
            mvo_backward(tape, dl_dw) + 2.0 * cfg.beta * (mu - y);

        point.decision_loss += gap * gap / count;
        point.prediction_loss += (y - mu).squaredNorm() / count;
        grad_w += x.transpose() * dmu / count;
        grad_b += dmu.sum() / count;
      }
      grad_w += 2.0 * cfg.alpha_reg * report.weights;
      if (!std::isfinite(point.decision_loss) ||
          !std::isfinite(point.prediction_loss) || !grad_w.allFinite()) {
        report.diverged = true;
        break;
      }
      report.curve.push_back(point);
      report.weights -= cfg.learning_rate * grad_w;
      report.bias -= cfg.learning_rate * grad_b;
    }
  }

  // Held-out evaluation: weights decided per rebalance day are held until
  // the next one.
  PerformanceSeries series;
  const Index d = panel.num_assets();
  const size_t num_test = split.test.size();
  series.predictions.resize(static_cast<Index>(num_test), d);
  series.targets.resize(static_cast<Index>(num_test), d);
  series.regret_terms.resize(static_cast<Index>(num_test));
  std::vector<Vec> daily_w;
  std::vector<Vec> daily_r;
  for (size_t k = 0; k < num_test; ++k) {
    const Index day = split.test[k];
    const DayContext ctx = make_day_context(panel, cfg, day, settings);
    const Vec y = panel.realized.row(day).transpose();
    const Vec mu = predict(panel.features[static_cast<size_t>(day)],
                           report.weights, report.bias);
    auto [w_hat, tape] = mvo_forward(mu, ctx.spec, settings);
    const double gap =
        risk_adjusted_value(y, w_hat, cfg.gamma, ctx.spec.sigma) -
        ctx.ideal_value;
    series.predictions.row(static_cast<Index>(k)) = mu.transpose();
    series.targets.row(static_cast<Index>(k)) = y.transpose();
    series.regret_terms(static_cast<Index>(k)) = gap * gap;
    const Index hold_end =
        k + 1 < num_test ? split.test[k + 1] : std::min(
            day + cfg.rebalance_every, panel.num_days());
    for (Index s = day; s < hold_end; ++s) {
      daily_w.push_back(w_hat);
      daily_r.push_back(panel.realized.row(s).transpose());
    }
  }
  series.daily_weights.resize(static_cast<Index>(daily_w.size()), d);
  series.daily_returns.resize(static_cast<Index>(daily_r.size()), d);
  for (size_t k = 0; k < daily_w.size(); ++k) {
    series.daily_weights.row(static_cast<Index>(k)) = daily_w[k].transpose();
    series.daily_returns.row(static_cast<Index>(k)) = daily_r[k].transpose();
  }
  report.metrics = portfolio_metrics(series);
  return report;
}

MetricsReport portfolio_metrics(const PerformanceSeries& series) {
  const Index decisions = series.predictions.rows();
  if (decisions < 2 || series.daily_weights.rows() < 2) {
    throw DegenerateSeries("too few observations for metrics");
  }
  if (series.targets.rows() != decisions ||
      series.regret_terms.size() != decisions ||
      series.daily_returns.rows() != series.daily_weights.rows()) {
    throw std::invalid_argument("misaligned metric series");
  }

  Vec ics(decisions);
  for (Index t = 0; t < decisions; ++t) {
    ics(t) = pearson(series.predictions.row(t).transpose(),
                     series.targets.row(t).transpose());
  }

  MetricsReport metrics;
  metrics.ic = ics.mean();
  const double ic_std = sample_std(ics);
  if (ic_std == 0.0) {
    throw DegenerateSeries("IC series is constant");
  }
  metrics.icir = metrics.ic / ic_std;

  Vec daily(series.daily_weights.rows());
  for (Index s = 0; s < daily.size(); ++s) {
    daily(s) = series.daily_weights.row(s).dot(series.daily_returns.row(s));
  }
  metrics.ann_ret = daily.mean() * 252.0;
  const double daily_std = sample_std(daily);
  if (daily_std == 0.0) {
    throw DegenerateSeries("portfolio return series is constant");
  }
  metrics.sharpe = metrics.ann_ret / (daily_std * std::sqrt(252.0));
  metrics.regret = series.regret_terms.mean();
  return metrics;
}

}  // namespace bpqp
