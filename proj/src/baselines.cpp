#include "ksum/baselines.hpp"

#include <cmath>

#include "ksum/errors.hpp"
#include "ksum/ksum_models.hpp"

namespace ksum {

Eigen::VectorXd clamp_to_simplex(Eigen::VectorXd weights) {
  if (weights.minCoeff() < -1e-10)
    throw ShapeError("weights too far below zero to clamp");
  weights = weights.cwiseMax(0.0);
  const double total = weights.sum();
  if (total <= 0.0) throw ShapeError("weights sum to zero");
  return weights / total;
}

Eigen::VectorXd equally_weighted(int n) {
  if (n < 1) throw ShapeError("need at least one asset");
  return Eigen::VectorXd::Constant(n, 1.0 / n);
}

namespace {

void require_positive_definite(const Eigen::MatrixXd& sigma) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw ShapeError("covariance must be positive definite");
}

}  // namespace

Eigen::VectorXd risk_parity(const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(sigma.rows());
  if (sigma.cols() != n || n < 1) throw ShapeError("sigma must be square");
  require_positive_definite(sigma);

  // Minimize 0.5 y'Sy - sum log y_i; at the stationary point y_i (S y)_i = 1
  // for every i, so y / sum(y) equalizes risk contributions.
  Eigen::VectorXd y = sigma.diagonal().cwiseSqrt().cwiseInverse();
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd grad = sigma * y - y.cwiseInverse();
    if (grad.cwiseAbs().maxCoeff() < 1e-13) break;
    Eigen::MatrixXd hess = sigma;
    hess.diagonal() += y.array().square().inverse().matrix();
    const Eigen::VectorXd step = hess.ldlt().solve(-grad);

    double alpha = 1.0;
    for (int i = 0; i < n; ++i)
      if (step(i) < 0.0) alpha = std::min(alpha, -0.99 * y(i) / step(i));
    y += alpha * step;
  }
  return y / y.sum();
}

Eigen::VectorXd most_diversified(const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(sigma.rows());
  if (sigma.cols() != n || n < 1) throw ShapeError("sigma must be square");
  const Eigen::VectorXd vol = sigma.diagonal().cwiseSqrt();
  if ((vol.array() <= 0.0).any()) throw ShapeError("asset with zero variance");

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * eig.eigenvalues().maxCoeff()) {
    // All-correlations-one input: Sigma = vol vol', every portfolio has
    // diversification ratio 1. Deterministic tie-break: lowest-index vertex.
    if ((sigma - vol * vol.transpose()).cwiseAbs().maxCoeff() <
        1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      x(0) = 1.0;
      return x;
    }
    throw ShapeError("covariance must be positive definite");
  }

  qp::Problem p;
  p.P = 2.0 * qp::ensure_psd(sigma);
  p.q = Eigen::VectorXd::Zero(n);
  p.a_eq = vol.transpose();
  p.b_eq = Eigen::VectorXd::Ones(1);
  p.a_in = -Eigen::MatrixXd::Identity(n, n);
  p.b_in = Eigen::VectorXd::Zero(n);

  const qp::Solution sol = qp::solve(p);
  if (sol.status != qp::Status::optimal)
    throw ShapeError("most-diversified solve failed: " + std::string(qp::to_string(sol.status)));
  return clamp_to_simplex(sol.y);
}

qp::Solution mv_esg(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& esg_row, double mu_bar, double eta_bar,
                    const qp::Settings& settings) {
  const int n = static_cast<int>(mu.size());
  if (esg_row.size() != n) throw ShapeError("ESG row length mismatch");
  if (esg_row.minCoeff() < -1e-12 || esg_row.maxCoeff() > 1.0 + 1e-12)
    throw ShapeError("ESG row must lie in [0, 1]");

  qp::Problem p = min_variance_problem(sigma, mu, mu_bar);
  // append esg'x >= eta_bar
  const int rows = static_cast<int>(p.b_in.size());
  p.a_in.conservativeResize(rows + 1, n);
  p.b_in.conservativeResize(rows + 1);
  p.a_in.row(rows) = -esg_row.transpose();
  p.b_in(rows) = -eta_bar;
  return qp::solve(p, settings);
}

std::string StrategySpec::label() const {
  const auto profile_index = [this] { return static_cast<int>(alpha * 4.0) + 1; };
  switch (kind) {
    case Kind::GMinV: return "GMinV";
    case Kind::EW: return "EW";
    case Kind::RP: return "RP";
    case Kind::MDP: return "MDP";
    case Kind::MvEsg: return "Sust_" + std::to_string(profile_index());
    case Kind::KWorst: return "Sust_" + std::to_string(profile_index()) + "_kWorst";
  }
  return "?";
}

}  // namespace ksum
