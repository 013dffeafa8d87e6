#include "ksum/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ksum/detail/text.hpp"
#include "ksum/errors.hpp"

namespace ksum {

namespace {

void require_observations(const Eigen::VectorXd& v, int least, const char* what) {
  if (v.size() < least)
    throw InsufficientDataError(std::string(what) + " needs at least " +
                                std::to_string(least) + " observations");
}

std::string cell(double v) { return detail::format_double(v); }
std::string cell(const std::optional<double>& v) { return v ? cell(*v) : "NA"; }

// Denominators this close to zero (relative to the data scale) are noise
// from accumulating a constant series; the ratio is flagged undefined.
bool vanishing(double denom, double scale) {
  return std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(scale));
}

}  // namespace

double mean_return(const Eigen::VectorXd& returns) {
  require_observations(returns, 1, "mean");
  return returns.mean();
}

double volatility(const Eigen::VectorXd& returns) {
  require_observations(returns, 2, "volatility");
  const double m = returns.mean();
  return std::sqrt((returns.array() - m).square().sum() / (returns.size() - 1));
}

std::optional<double> sharpe(const Eigen::VectorXd& returns) {
  const double vol = volatility(returns);
  const double mean = returns.mean();
  if (vanishing(vol, mean)) return std::nullopt;
  return mean / vol;
}

Eigen::VectorXd wealth_path(const Eigen::VectorXd& returns) {
  Eigen::VectorXd w(returns.size() + 1);
  w(0) = 1.0;
  for (int t = 0; t < returns.size(); ++t) w(t + 1) = w(t) * (1.0 + returns(t));
  return w;
}

Eigen::VectorXd drawdowns(const Eigen::VectorXd& wealth) {
  require_observations(wealth, 2, "drawdown");
  Eigen::VectorXd dd(wealth.size() - 1);
  double peak = wealth(0);
  for (int t = 1; t < wealth.size(); ++t) {
    peak = std::max(peak, wealth(t));
    dd(t - 1) = (wealth(t) - peak) / peak;
  }
  return dd;
}

double max_drawdown(const Eigen::VectorXd& wealth) {
  return drawdowns(wealth).minCoeff();
}

double ulcer(const Eigen::VectorXd& wealth) {
  const Eigen::VectorXd dd = drawdowns(wealth);
  return std::sqrt(dd.array().square().mean());
}

std::optional<double> rachev10(const Eigen::VectorXd& returns) {
  const int L = static_cast<int>(returns.size());
  require_observations(returns, 10, "rachev10");
  const int tail = static_cast<int>(std::ceil(0.10 * L));
  std::vector<double> sorted(returns.data(), returns.data() + L);
  std::sort(sorted.begin(), sorted.end());

  double worst = 0.0, best = 0.0;
  for (int i = 0; i < tail; ++i) {
    worst += sorted[i];
    best += sorted[L - 1 - i];
  }
  worst /= tail;
  best /= tail;
  if (worst == 0.0) return std::nullopt;
  return best / std::abs(worst);
}

double turnover(const std::vector<Eigen::VectorXd>& weight_history) {
  if (weight_history.empty()) throw InsufficientDataError("turnover needs a weight history");
  const int transitions = static_cast<int>(weight_history.size()) - 1;
  if (transitions == 0) return 0.0;
  double total = 0.0;
  for (int q = 1; q <= transitions; ++q)
    total += (weight_history[q] - weight_history[q - 1]).lpNorm<1>();
  return total / transitions;
}

std::optional<double> jensen_alpha(const Eigen::VectorXd& returns,
                                   const Eigen::VectorXd& index_returns) {
  if (returns.size() != index_returns.size()) throw ShapeError("series length mismatch");
  require_observations(returns, 2, "jensen_alpha");
  const double mi = index_returns.mean();
  const double var_i = (index_returns.array() - mi).square().sum() / (returns.size() - 1);
  if (vanishing(var_i, mi * mi)) return std::nullopt;
  const double mr = returns.mean();
  const double cov =
      ((returns.array() - mr) * (index_returns.array() - mi)).sum() / (returns.size() - 1);
  return mr - (cov / var_i) * mi;
}

std::optional<double> info_ratio(const Eigen::VectorXd& returns,
                                 const Eigen::VectorXd& index_returns) {
  if (returns.size() != index_returns.size()) throw ShapeError("series length mismatch");
  const Eigen::VectorXd diff = returns - index_returns;
  const double sd = volatility(diff);
  if (vanishing(sd, diff.mean())) return std::nullopt;
  return diff.mean() / sd;
}

double var5(const Eigen::VectorXd& returns) {
  const int L = static_cast<int>(returns.size());
  require_observations(returns, 1, "var5");
  std::vector<double> losses(L);
  for (int i = 0; i < L; ++i) losses[i] = -returns(i);
  std::sort(losses.begin(), losses.end(), std::greater<>());
  const int rank = static_cast<int>(std::floor(0.05 * L)) + 1;  // 1-based order statistic
  return losses[std::min(rank, L) - 1];
}

std::optional<double> omega(const Eigen::VectorXd& returns) {
  require_observations(returns, 1, "omega");
  const double gains = returns.array().max(0.0).mean();
  const double losses = (-returns.array()).max(0.0).mean();
  if (losses == 0.0) return std::nullopt;
  return gains / losses;
}

double avg_holdings(const std::vector<Eigen::VectorXd>& weight_history, double threshold) {
  if (weight_history.empty()) throw InsufficientDataError("avg_holdings needs weights");
  double total = 0.0;
  for (const auto& w : weight_history) total += (w.array() > threshold).count();
  return total / static_cast<double>(weight_history.size());
}

double percentile(const Eigen::VectorXd& values, double p) {
  require_observations(values, 1, "percentile");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double rank = p * (sorted.size() - 1);
  const int lo = static_cast<int>(std::floor(rank));
  const int hi = static_cast<int>(std::ceil(rank));
  const double frac = rank - lo;
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RoiSummary roi(const Eigen::VectorXd& wealth, int horizon) {
  RoiSummary out;
  const int T = static_cast<int>(wealth.size()) - 1;  // steps, wealth has T+1 entries
  if (horizon < 1 || horizon >= T) return out;

  out.series.resize(T - horizon);
  for (int tau = horizon + 1; tau <= T; ++tau)
    out.series(tau - horizon - 1) = (wealth(tau) - wealth(tau - horizon)) / wealth(tau - horizon);

  out.defined = true;
  out.mean = out.series.mean();
  out.stddev = out.series.size() > 1
                   ? std::sqrt((out.series.array() - out.mean).square().sum() /
                               (out.series.size() - 1))
                   : 0.0;
  out.p5 = percentile(out.series, 0.05);
  out.p25 = percentile(out.series, 0.25);
  out.p50 = percentile(out.series, 0.50);
  out.p75 = percentile(out.series, 0.75);
  out.p95 = percentile(out.series, 0.95);
  return out;
}

MetricRow compute_metric_row(const std::string& strategy, const Eigen::VectorXd& returns,
                             const std::vector<Eigen::VectorXd>& weight_history,
                             const Eigen::VectorXd& index_returns, double holding_threshold) {
  MetricRow row;
  row.strategy = strategy;
  row.exp_ret = mean_return(returns);
  row.vol = volatility(returns);
  row.sharpe = sharpe(returns);
  const Eigen::VectorXd wealth = wealth_path(returns);
  row.mdd = max_drawdown(wealth);
  row.ulcer = ulcer(wealth);
  row.rachev10 = rachev10(returns);
  row.turnover = turnover(weight_history);
  row.alpha_j = jensen_alpha(returns, index_returns);
  row.info_ratio = info_ratio(returns, index_returns);
  row.var5 = var5(returns);
  row.omega = omega(returns);
  row.avg_holdings = avg_holdings(weight_history, holding_threshold);
  return row;
}

void write_metric_table(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write metric table: " + path);
  out << "Approach,ExpRet,Vol,Sharpe,MDD,Ulcer,Rachev10,Turn,AlphaJ,InfoRatio,VaR5,Omega,"
         "ave#\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << cell(r.exp_ret) << ',' << cell(r.vol) << ',' << cell(r.sharpe)
        << ',' << cell(r.mdd) << ',' << cell(r.ulcer) << ',' << cell(r.rachev10) << ','
        << cell(r.turnover) << ',' << cell(r.alpha_j) << ',' << cell(r.info_ratio) << ','
        << cell(r.var5) << ',' << cell(r.omega) << ',' << cell(r.avg_holdings) << '\n';
  }
}

void write_roi_table(const std::vector<RoiRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write ROI table: " + path);
  out << "Approach,ExpRet,Vol,5%-perc,25%-perc,50%-perc,75%-perc,95%-perc\n";
  for (const auto& r : rows) {
    out << r.strategy << ',';
    if (r.summary.defined) {
      out << cell(r.summary.mean) << ',' << cell(r.summary.stddev) << ',' << cell(r.summary.p5)
          << ',' << cell(r.summary.p25) << ',' << cell(r.summary.p50) << ','
          << cell(r.summary.p75) << ',' << cell(r.summary.p95);
    } else {
      out << "NA,NA,NA,NA,NA,NA,NA";
    }
    out << '\n';
  }
}

}  // namespace ksum
