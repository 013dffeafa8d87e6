#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ksum/baselines.hpp"
#include "ksum/market_data.hpp"
#include "ksum/qp.hpp"
#include "ksum/scores.hpp"

namespace ksum {

/// A score panel in force from `date` onward (last observation carried
/// forward until a newer panel appears).
struct DatedScorePanel {
  std::string date;  // ISO-8601
  NonEsgPanel panel;
};

struct BacktestConfig {
  int in_sample_length = 500;  // return observations per estimation window
  int rebalance_period = 21;   // trading days per holding period
  std::vector<StrategySpec> strategies;
  qp::Settings solver;
};

/// One strategy's out-of-sample track record.
struct StrategyResult {
  StrategySpec spec;
  Eigen::VectorXd returns;                   // daily, over the out-of-sample span
  std::vector<Eigen::VectorXd> weights;      // one row per rebalance
  std::vector<std::string> rebalance_dates;
  std::vector<std::string> window_status;    // solver status per rebalance
  int failed_windows = 0;
};

struct BacktestReport {
  std::vector<StrategyResult> strategies;
  std::vector<int> rebalance_rows;     // return-row index of each rebalance
  std::vector<std::string> oos_dates;  // date of each out-of-sample return
  Eigen::VectorXd index_returns;       // equally-weighted universe benchmark
};

/// Most recent panel dated <= date. Throws ConfigError when none exists.
const NonEsgPanel& align_scores(const std::vector<DatedScorePanel>& panels,
                                const std::string& date);

/// Rolling-window evaluation: at each rebalance estimate moments on the
/// trailing window, pick the score panel in force, solve every strategy,
/// then hold the weights fixed for the next rebalance_period days. A
/// failed solve keeps the previous weights (first window: equal weights)
/// and is logged in window_status.
BacktestReport run_backtest(const MarketData& data,
                            const std::vector<DatedScorePanel>& score_history,
                            const BacktestConfig& config);

}  // namespace ksum
