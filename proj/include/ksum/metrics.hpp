#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace ksum {

/// Out-of-sample performance measures. Ratios with a zero denominator
/// come back as std::nullopt rather than NaN.

double mean_return(const Eigen::VectorXd& returns);
double volatility(const Eigen::VectorXd& returns);

/// mean / standard deviation, risk-free rate zero.
std::optional<double> sharpe(const Eigen::VectorXd& returns);

/// Wealth path W_0 = 1, W_t = W_{t-1} (1 + r_t).
Eigen::VectorXd wealth_path(const Eigen::VectorXd& returns);

/// Drawdown series DD_t = (W_t - peak_t) / peak_t for t >= 1.
Eigen::VectorXd drawdowns(const Eigen::VectorXd& wealth);

/// Most negative drawdown; <= 0, via a single running-max pass.
double max_drawdown(const Eigen::VectorXd& wealth);

/// Root mean square of the drawdown series.
double ulcer(const Eigen::VectorXd& wealth);

/// Mean of the best 10% of returns over the magnitude of the mean of the
/// worst 10%; tail size ceil(0.10 L).
std::optional<double> rachev10(const Eigen::VectorXd& returns);

/// (1/Q) sum_q ||x_q - x_{q-1}||_1 over the Q weight changes; the first
/// row counts as the pre-existing allocation, so constant weights give 0.
double turnover(const std::vector<Eigen::VectorXd>& weight_history);

/// Intercept of the regression of portfolio on index returns.
std::optional<double> jensen_alpha(const Eigen::VectorXd& returns,
                                   const Eigen::VectorXd& index_returns);

/// mean(R - R_I) / std(R - R_I).
std::optional<double> info_ratio(const Eigen::VectorXd& returns,
                                 const Eigen::VectorXd& index_returns);

/// (floor(0.05 L) + 1)-th largest loss.
double var5(const Eigen::VectorXd& returns);

/// E[max(0, R)] / E[-min(0, R)].
std::optional<double> omega(const Eigen::VectorXd& returns);

/// Mean count of weights above the threshold across rebalances.
double avg_holdings(const std::vector<Eigen::VectorXd>& weight_history,
                    double threshold = 1e-6);

/// Rolling return over a fixed horizon of the wealth path, plus its
/// summary distribution.
struct RoiSummary {
  Eigen::VectorXd series;
  double mean = 0.0;
  double stddev = 0.0;
  double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
  bool defined = false;  // false when the horizon exceeds the path
};

RoiSummary roi(const Eigen::VectorXd& wealth, int horizon);

/// Inclusive linear-interpolation percentile (rank p (N-1)).
double percentile(const Eigen::VectorXd& values, double p);

/// One strategy's row of the report table.
struct MetricRow {
  std::string strategy;
  double exp_ret = 0.0;
  double vol = 0.0;
  std::optional<double> sharpe;
  double mdd = 0.0;
  double ulcer = 0.0;
  std::optional<double> rachev10;
  double turnover = 0.0;
  std::optional<double> alpha_j;
  std::optional<double> info_ratio;
  double var5 = 0.0;
  std::optional<double> omega;
  double avg_holdings = 0.0;
};

MetricRow compute_metric_row(const std::string& strategy, const Eigen::VectorXd& returns,
                             const std::vector<Eigen::VectorXd>& weight_history,
                             const Eigen::VectorXd& index_returns,
                             double holding_threshold = 1e-6);

/// CSV with the column order
/// Approach,ExpRet,Vol,Sharpe,MDD,Ulcer,Rachev10,Turn,AlphaJ,InfoRatio,VaR5,Omega,ave#
void write_metric_table(const std::vector<MetricRow>& rows, const std::string& path);

struct RoiRow {
  std::string strategy;
  RoiSummary summary;
};

/// CSV with the column order Approach,ExpRet,Vol,5%-perc,...,95%-perc.
void write_roi_table(const std::vector<RoiRow>& rows, const std::string& path);

}  // namespace ksum
