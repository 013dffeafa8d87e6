#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ksum/ksum_models.hpp"
#include "ksum/qp.hpp"

namespace ksum {

/// Feasible band of return targets. mu_min is the larger of the returns
/// of the minimum-variance and minimum-score portfolios; mu_max is the
/// best single-asset expected return.
struct MuRange {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double min_variance_return = 0.0;  // return of the GMinV portfolio
  double min_score_return = 0.0;     // return of the minimum-score portfolio
};

/// Score-target band at a fixed return floor: gamma_min is the best
/// achievable k-worst score, gamma_max the score of the plain
/// minimum-variance portfolio at that floor.
struct GammaRange {
  double gamma_min = 0.0;
  double gamma_max = 0.0;
};

struct FrontierPoint {
  double mu_bar = 0.0;
  double gamma_bar = 0.0;
  Eigen::VectorXd weights;
  double variance = 0.0;
  double expected_return = 0.0;
  double kworst = 0.0;
  qp::Status status = qp::Status::max_iterations;
  // Slack targets mark the point as possibly weakly efficient; such
  // points are flagged, never dropped.
  bool return_floor_binding = false;
  bool score_cap_binding = false;
};

struct FrontierSurface {
  MuRange mu_range;
  std::vector<double> mu_grid;
  std::vector<GammaRange> gamma_ranges;            // one per mu level
  std::vector<std::vector<double>> gamma_grids;    // one row per mu level
  std::vector<std::vector<FrontierPoint>> points;  // [mu][gamma]

  /// Minimum-variance weights at the mu_min floor; identical to the GMinV
  /// portfolio whenever the GMinV return clears mu_min.
  Eigen::VectorXd gminv_weights;
  double gminv_weight_gap = 0.0;   // || corner point - gminv_weights ||_inf
  double vertex_weight_gap = 0.0;  // max-return row vs best-return vertex
  int failed_points = 0;
  int total_points = 0;
};

/// Target-return profile used by the backtest strategies: return level
/// mu_min + alpha (mu_max - mu_min), score level two fifths of the way
/// from gamma_min to gamma_max.
struct TargetProfile {
  double alpha = 0.0;
  double mu_bar = 0.0;
  double gamma_bar = 0.0;
};

MuRange compute_mu_range(const KsumInstance& instance, const qp::Settings& settings = {});

/// Throws ConfigError when mu_bar lies outside [mu_min, mu_max].
GammaRange compute_gamma_range(const KsumInstance& instance, double mu_bar,
                               const qp::Settings& settings = {});

/// Sweep a uniform n_mu x n_gamma grid of (return floor, score cap)
/// targets and solve the variance-minimization model at each cell.
/// Individual solver failures are recorded per point, never thrown.
FrontierSurface trace_surface(const KsumInstance& instance, int n_mu, int n_gamma,
                              const qp::Settings& settings = {});

/// The four (mu_bar_alpha, gamma_bar_2/5) pairs, alpha in {0, 1/4, 1/2, 3/4}.
std::array<TargetProfile, 4> select_profiles(const KsumInstance& instance,
                                             const qp::Settings& settings = {});

void write_surface_csv(const FrontierSurface& surface, const std::string& path);
void write_surface_manifest(const FrontierSurface& surface, const KsumInstance& instance,
                            const std::string& path);

/// Content hash of (sigma, mu, S, k); stable across runs.
std::string instance_hash(const KsumInstance& instance);

}  // namespace ksum
