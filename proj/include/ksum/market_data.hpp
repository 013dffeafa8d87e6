#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ksum {

/// Aligned price/return history for a set of assets.
///
/// `prices` is T x n with strictly positive entries and strictly
/// increasing `dates`; `returns` is the (T-1) x n matrix of arithmetic
/// returns, returns(t, j) = prices(t+1, j) / prices(t, j) - 1.
struct MarketData {
  std::vector<std::string> asset_ids;
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  Eigen::MatrixXd prices;
  Eigen::MatrixXd returns;

  int n_assets() const { return static_cast<int>(asset_ids.size()); }
  int n_dates() const { return static_cast<int>(dates.size()); }
};

/// Sample mean vector and covariance matrix over a return window.
struct MomentEstimate {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  int window_start = 0;  // inclusive return-row index
  int window_end = 0;    // exclusive
};

struct LoadReport {
  std::vector<std::string> dropped_assets;  // had missing prices in the span
};

/// Read a price CSV (`date,<ticker1>,<ticker2>,...`, ISO dates, decimal
/// point). Assets with any missing cell are dropped and listed in the
/// report. Throws ParseError on malformed cells (named by row/column) and
/// InsufficientDataError when fewer than 2 dates survive.
MarketData load_prices(const std::string& path, LoadReport* report = nullptr);

/// Build a MarketData from already-parsed columns; validates invariants
/// and fills in the return matrix.
MarketData make_market_data(std::vector<std::string> asset_ids,
                            std::vector<std::string> dates,
                            Eigen::MatrixXd prices);

/// Write back in the same CSV format; load_prices(write_prices_csv(...))
/// reproduces the matrices bit for bit.
void write_prices_csv(const MarketData& data, const std::string& path);

/// Sample mean and covariance (denominator: window length - 1) of the
/// return rows [start, end). Throws InsufficientDataError for windows
/// shorter than 2.
MomentEstimate estimate_moments(const MarketData& data, int start, int end);

/// Same, on a raw return matrix.
MomentEstimate estimate_moments(const Eigen::MatrixXd& returns, int start, int end);

}  // namespace ksum
