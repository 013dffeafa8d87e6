#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ksum {

/// Whether an agency's raw scale improves upward or downward.
/// Risk-style scores (0 = greenest) are GreenerIsLower.
enum class Orientation { GreenerIsHigher, GreenerIsLower };

struct AgencyMeta {
  std::string id;
  double range_min = 0.0;
  double range_max = 100.0;
  Orientation orientation = Orientation::GreenerIsHigher;
};

/// Raw agency x asset score matrix on each agency's native scale.
struct ScorePanel {
  std::vector<AgencyMeta> agencies;
  std::vector<std::string> asset_ids;
  Eigen::MatrixXd raw;  // m x n

  int n_agencies() const { return static_cast<int>(agencies.size()); }
  int n_assets() const { return static_cast<int>(asset_ids.size()); }

  /// Check every cell against its agency's declared range.
  void validate() const;

  /// Reorder/restrict columns to `target_ids`; throws ConfigError if an
  /// id has no score.
  ScorePanel align(const std::vector<std::string>& target_ids) const;
};

/// Scores mapped to [0, 1] with a common direction: lower is greener.
struct NonEsgPanel {
  std::vector<std::string> agency_ids;
  std::vector<std::string> asset_ids;
  Eigen::MatrixXd s;  // m x n, entries in [0, 1]

  int n_agencies() const { return static_cast<int>(agency_ids.size()); }
  int n_assets() const { return static_cast<int>(asset_ids.size()); }
};

struct NormalizeOptions {
  /// When an agency scored every asset identically, min-max scaling is
  /// undefined. Off (default): DegenerateRowError. On: that row becomes
  /// a flat 0.5.
  bool constant_row_fallback = false;
};

/// Min-max scale each agency row across assets, then orient so that lower
/// means greener (complement for GreenerIsHigher agencies).
NonEsgPanel normalize(const ScorePanel& panel, const NormalizeOptions& opts = {});

/// Dot product s_i . x for a portfolio on the simplex.
double portfolio_score(const Eigen::VectorXd& agency_scores, const Eigen::VectorXd& weights);

enum class DisagreementMetric { Euclidean, Chebychev, Cosine, Correlation };

/// Pairwise agency distance matrix plus the mean over unordered pairs.
/// Correlation distance is undefined for pairs involving a constant row;
/// such pairs are flagged and excluded from the average.
struct DisagreementResult {
  Eigen::MatrixXd distance;                        // m x m, symmetric, zero diagonal
  std::vector<std::vector<bool>> defined;          // m x m
  double average = 0.0;
  bool average_defined = false;
};

DisagreementResult disagreement(const NonEsgPanel& panel, DisagreementMetric metric);

/// Load `agency,asset,score` rows plus the JSON sidecar declaring each
/// agency's range and orientation.
ScorePanel load_score_panel(const std::string& csv_path, const std::string& meta_path);

void write_score_panel(const ScorePanel& panel, const std::string& csv_path);
void write_score_metadata(const std::vector<AgencyMeta>& agencies, const std::string& meta_path);

}  // namespace ksum
