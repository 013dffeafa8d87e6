#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ksum/market_data.hpp"
#include "ksum/scores.hpp"

namespace ksum {

/// Parameters of the synthetic dataset generator. Everything downstream
/// of the seed is reproducible bit for bit (the generator uses its own
/// uniform/normal transforms, not the implementation-defined std ones).
struct SynthConfig {
  int n_assets = 20;
  int n_dates = 750;  // price rows; returns rows are one fewer
  int n_agencies = 4;
  std::uint64_t seed = 42;

  /// Scale of the per-agency deviation around each asset's consensus
  /// score, on the [0, 1] scale. 0 makes all agency rows identical.
  double disagreement = 0.25;

  /// Couples an asset's consensus greenness to its return quality:
  /// annualized drift spread (and a milder volatility discount) between
  /// the greenest and brownest names. 0 (default) leaves scores and
  /// returns independent.
  double esg_return_link = 0.0;

  int score_panel_period = 63;  // trading days between panels
  std::string start_date = "2016-01-04";

  double annual_vol_min = 0.10;
  double annual_vol_max = 0.40;
  double annual_drift_min = 0.02;
  double annual_drift_max = 0.12;

  /// Publish the last agency on an inverted scale (risk-style scores).
  bool flip_last_agency = false;
};

struct SynthDataset {
  MarketData market;
  std::vector<AgencyMeta> agencies;
  std::vector<std::pair<std::string, ScorePanel>> score_panels;  // (date, raw panel)
  Eigen::MatrixXd target_sigma;  // daily covariance the returns were drawn from
};

SynthDataset generate_synthetic(const SynthConfig& config);

/// Weekday following `iso_date` by `steps` trading days (weekends skipped,
/// no holiday calendar).
std::string advance_trading_days(const std::string& iso_date, int steps);

/// Deterministic generator used by the synthesizer; exposed for tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();

 private:
  std::uint64_t next();
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ksum
