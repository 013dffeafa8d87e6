#include "ksum/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ksum/errors.hpp"
#include "ksum/frontier.hpp"
#include "ksum/ksum_models.hpp"

namespace ksum {

const NonEsgPanel& align_scores(const std::vector<DatedScorePanel>& panels,
                                const std::string& date) {
  const NonEsgPanel* best = nullptr;
  std::string best_date;
  for (const auto& p : panels) {
    if (p.date <= date && (!best || p.date > best_date)) {
      best = &p.panel;
      best_date = p.date;
    }
  }
  if (!best) throw ConfigError("no score panel dated on or before " + date);
  return *best;
}

namespace {

bool needs_scores(const StrategySpec& spec) {
  return spec.kind == StrategySpec::Kind::MvEsg || spec.kind == StrategySpec::Kind::KWorst;
}

struct WindowContext {
  Eigen::MatrixXd sigma;
  Eigen::VectorXd mu;
  const NonEsgPanel* scores = nullptr;
  qp::Settings solver;

  // ranges shared across the strategies of one window
  std::map<int, MuRange> kworst_mu_range;  // by k
  std::map<int, MuRange> mv_esg_mu_range;  // by agency
};

// Return band for the single-agency model: the floor of the band is the
// larger of the GMinV return and the return of the greenest vertex.
MuRange mv_esg_range(const WindowContext& ctx, const Eigen::VectorXd& esg) {
  MuRange r;
  const qp::Solution gminv = qp::solve(min_variance_problem(ctx.sigma, ctx.mu), ctx.solver);
  r.min_variance_return = ctx.mu.dot(gminv.y);
  int greenest = 0;
  for (int j = 1; j < esg.size(); ++j)
    if (esg(j) > esg(greenest)) greenest = j;
  r.min_score_return = ctx.mu(greenest);
  r.mu_min = std::min(std::max(r.min_variance_return, r.min_score_return), ctx.mu.maxCoeff());
  r.mu_max = ctx.mu.maxCoeff();
  return r;
}

qp::Status solve_mv_esg(WindowContext& ctx, const StrategySpec& spec, Eigen::VectorXd& out) {
  const Eigen::VectorXd esg =
      (1.0 - ctx.scores->s.row(spec.agency).array()).matrix();  // greener-is-higher

  auto it = ctx.mv_esg_mu_range.find(spec.agency);
  if (it == ctx.mv_esg_mu_range.end())
    it = ctx.mv_esg_mu_range.emplace(spec.agency, mv_esg_range(ctx, esg)).first;
  const MuRange& mr = it->second;
  const double mu_bar = mr.mu_min + spec.alpha * (mr.mu_max - mr.mu_min);

  // eta band at this floor: best achievable ESG vs the ESG of the plain
  // minimum-variance portfolio; target two fifths below the best.
  qp::Problem best_esg = min_variance_problem(ctx.sigma, ctx.mu, mu_bar);
  best_esg.P.setZero();
  best_esg.q = -esg;
  const qp::Solution esg_sol = qp::solve(best_esg, ctx.solver);
  if (esg_sol.status != qp::Status::optimal) return esg_sol.status;
  const double eta_max = -esg_sol.objective;

  const qp::Solution mv_sol =
      qp::solve(min_variance_problem(ctx.sigma, ctx.mu, mu_bar), ctx.solver);
  if (mv_sol.status != qp::Status::optimal) return mv_sol.status;
  const double eta_min = std::min(esg.dot(mv_sol.y), eta_max);
  const double eta_bar = eta_max - 0.4 * (eta_max - eta_min);

  const qp::Solution sol = mv_esg(ctx.sigma, ctx.mu, esg, mu_bar, eta_bar, ctx.solver);
  if (sol.status == qp::Status::optimal) out = clamp_to_simplex(sol.y);
  return sol.status;
}

qp::Status solve_kworst(WindowContext& ctx, const StrategySpec& spec, Eigen::VectorXd& out) {
  KsumInstance instance{ctx.sigma, ctx.mu, ctx.scores->s, spec.k};

  auto it = ctx.kworst_mu_range.find(spec.k);
  if (it == ctx.kworst_mu_range.end())
    it = ctx.kworst_mu_range.emplace(spec.k, compute_mu_range(instance, ctx.solver)).first;
  const MuRange& mr = it->second;
  const double mu_bar = mr.mu_min + spec.alpha * (mr.mu_max - mr.mu_min);
  const GammaRange gr = compute_gamma_range(instance, mu_bar, ctx.solver);
  const double gamma_bar = gr.gamma_min + 0.4 * (gr.gamma_max - gr.gamma_min);

  const qp::Problem p = epsilon_constraint_problem(instance, mu_bar, gamma_bar);
  const qp::Solution sol = qp::solve(p, ctx.solver);
  if (sol.status == qp::Status::optimal)
    out = clamp_to_simplex(sol.y.head(instance.n_assets()));
  return sol.status;
}

qp::Status solve_strategy(WindowContext& ctx, const StrategySpec& spec, int n,
                          Eigen::VectorXd& out) {
  switch (spec.kind) {
    case StrategySpec::Kind::EW:
      out = equally_weighted(n);
      return qp::Status::optimal;
    case StrategySpec::Kind::GMinV: {
      const qp::Solution sol = qp::solve(min_variance_problem(ctx.sigma, ctx.mu), ctx.solver);
      if (sol.status == qp::Status::optimal) out = clamp_to_simplex(sol.y);
      return sol.status;
    }
    case StrategySpec::Kind::RP:
      out = risk_parity(ctx.sigma);
      return qp::Status::optimal;
    case StrategySpec::Kind::MDP:
      out = most_diversified(ctx.sigma);
      return qp::Status::optimal;
    case StrategySpec::Kind::MvEsg:
      return solve_mv_esg(ctx, spec, out);
    case StrategySpec::Kind::KWorst:
      return solve_kworst(ctx, spec, out);
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace

BacktestReport run_backtest(const MarketData& data,
                            const std::vector<DatedScorePanel>& score_history,
                            const BacktestConfig& config) {
  const int n = data.n_assets();
  const int n_rows = static_cast<int>(data.returns.rows());
  if (config.in_sample_length < 2 || config.rebalance_period < 1)
    throw ConfigError("in_sample_length must be >= 2 and rebalance_period >= 1");
  if (n_rows < config.in_sample_length + config.rebalance_period)
    throw ConfigError("history too short: " + std::to_string(n_rows) +
                      " return rows for in-sample " + std::to_string(config.in_sample_length) +
                      " + holding " + std::to_string(config.rebalance_period));
  const bool any_scored = std::any_of(config.strategies.begin(), config.strategies.end(),
                                      [](const StrategySpec& s) { return needs_scores(s); });
  for (const auto& s : score_history) {
    if (s.panel.n_assets() != n)
      throw ConfigError("score panel dated " + s.date + " does not match the asset universe");
  }

  BacktestReport report;
  for (int row = config.in_sample_length; row < n_rows; row += config.rebalance_period)
    report.rebalance_rows.push_back(row);

  const int oos_len = n_rows - config.in_sample_length;
  for (int t = config.in_sample_length; t < n_rows; ++t)
    report.oos_dates.push_back(data.dates[t + 1]);  // return row t realizes at date t+1
  report.index_returns = data.returns.bottomRows(oos_len).rowwise().mean();

  const int n_strategies = static_cast<int>(config.strategies.size());
  report.strategies.resize(n_strategies);
  std::vector<Eigen::VectorXd> current(n_strategies, equally_weighted(n));
  for (int s = 0; s < n_strategies; ++s) {
    report.strategies[s].spec = config.strategies[s];
    report.strategies[s].returns.resize(oos_len);
  }

  for (int row : report.rebalance_rows) {
    WindowContext ctx;
    const MomentEstimate est = estimate_moments(data, row - config.in_sample_length, row);
    ctx.sigma = est.sigma;
    ctx.mu = est.mu;
    ctx.solver = config.solver;
    const std::string& date = data.dates[row];
    if (any_scored) ctx.scores = &align_scores(score_history, date);

    const int hold_end = std::min(row + config.rebalance_period, n_rows);
    for (int s = 0; s < n_strategies; ++s) {
      StrategyResult& res = report.strategies[s];
      Eigen::VectorXd next;
      qp::Status status;
      try {
        status = solve_strategy(ctx, res.spec, n, next);
      } catch (const Error&) {
        status = qp::Status::max_iterations;
      }
      if (status == qp::Status::optimal) {
        current[s] = next;
      } else {
        ++res.failed_windows;  // carry the previous weights forward
      }
      res.weights.push_back(current[s]);
      res.rebalance_dates.push_back(date);
      res.window_status.emplace_back(qp::to_string(status));

      for (int t = row; t < hold_end; ++t)
        res.returns(t - config.in_sample_length) = current[s].dot(data.returns.row(t));
    }
  }
  return report;
}

}  // namespace ksum
