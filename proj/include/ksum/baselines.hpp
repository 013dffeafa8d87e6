#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "ksum/qp.hpp"

namespace ksum {

/// Clamp negatives (>= -1e-10) to zero and renormalize to sum 1.
Eigen::VectorXd clamp_to_simplex(Eigen::VectorXd weights);

/// x_j = 1/n.
Eigen::VectorXd equally_weighted(int n);

/// Long-only equal-risk-contribution portfolio: x_i (Sigma x)_i equal for
/// all i, sum 1, x > 0. Newton iteration on the log-barrier first-order
/// conditions; requires Sigma positive definite.
Eigen::VectorXd risk_parity(const Eigen::MatrixXd& sigma);

/// Maximizer of (sum_j x_j sigma_j) / sqrt(x' Sigma x) over the simplex,
/// via min y'Sy s.t. sigma'y = 1, y >= 0, renormalized. A rank-one Sigma
/// (all correlations one) makes every vertex optimal; the lowest-index
/// vertex is returned in that case.
Eigen::VectorXd most_diversified(const Eigen::MatrixXd& sigma);

/// Markowitz model with a floor on one agency's portfolio ESG evaluation:
/// min x'Sx s.t. mu'x >= mu_bar, esg'x >= eta_bar, simplex. esg_row holds
/// normalized greener-is-higher scores in [0, 1].
qp::Solution mv_esg(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& esg_row, double mu_bar, double eta_bar,
                    const qp::Settings& settings = {});

/// Strategy roster entry for backtests.
struct StrategySpec {
  enum class Kind { GMinV, EW, RP, MDP, MvEsg, KWorst };

  Kind kind = Kind::EW;
  // MvEsg: which agency row and which return-level profile.
  int agency = 0;
  // MvEsg / KWorst: return-target profile alpha in {0, 1/4, 1/2, 3/4}.
  double alpha = 0.0;
  // KWorst: tail size.
  int k = 1;

  std::string label() const;
};

}  // namespace ksum
