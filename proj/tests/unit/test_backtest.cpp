#include <Eigen/Dense>

#include "doctest.h"
#include "ksum/backtest.hpp"
#include "ksum/errors.hpp"
#include "ksum/metrics.hpp"
#include "ksum/synth.hpp"
#include "support/generators.hpp"

using namespace ksum;

namespace {

std::vector<DatedScorePanel> normalized_panels(const SynthDataset& ds) {
  std::vector<DatedScorePanel> panels;
  for (const auto& [date, raw] : ds.score_panels)
    panels.push_back({date, normalize(raw)});
  return panels;
}

SynthDataset small_dataset(std::uint64_t seed, int n = 5, int T = 200) {
  SynthConfig cfg;
  cfg.n_assets = n;
  cfg.n_dates = T;
  cfg.n_agencies = 3;
  cfg.seed = seed;
  cfg.score_panel_period = 40;
  return generate_synthetic(cfg);
}

BacktestConfig quick_config(std::vector<StrategySpec> strategies) {
  BacktestConfig cfg;
  cfg.in_sample_length = 60;
  cfg.rebalance_period = 21;
  cfg.strategies = std::move(strategies);
  return cfg;
}

}  // namespace

TEST_CASE("score alignment carries the last panel forward") {
  NonEsgPanel jan, feb;
  jan.agency_ids = feb.agency_ids = {"AG"};
  jan.asset_ids = feb.asset_ids = {"A"};
  jan.s = Eigen::MatrixXd::Constant(1, 1, 0.25);
  feb.s = Eigen::MatrixXd::Constant(1, 1, 0.75);
  const std::vector<DatedScorePanel> panels{{"2020-01-01", jan}, {"2020-02-01", feb}};

  CHECK(align_scores(panels, "2020-01-15").s(0, 0) == doctest::Approx(0.25));
  CHECK(align_scores(panels, "2020-02-01").s(0, 0) == doctest::Approx(0.75));  // inclusive
  CHECK(align_scores(panels, "2021-06-30").s(0, 0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(align_scores(panels, "2019-12-31"), ConfigError);
}

TEST_CASE("equally weighted strategy reproduces cross-sectional means") {
  const SynthDataset ds = small_dataset(21);
  const BacktestConfig cfg = quick_config({StrategySpec{StrategySpec::Kind::EW}});
  const BacktestReport report = run_backtest(ds.market, normalized_panels(ds), cfg);

  REQUIRE(report.strategies.size() == 1);
  const auto& res = report.strategies[0];
  const int oos = static_cast<int>(res.returns.size());
  REQUIRE(oos == ds.market.returns.rows() - cfg.in_sample_length);
  for (int t = 0; t < oos; ++t) {
    const double expected = ds.market.returns.row(cfg.in_sample_length + t).mean();
    CHECK(res.returns(t) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK((res.returns - report.index_returns).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("a single window covers exactly the holding period") {
  SynthConfig sc;
  sc.n_assets = 3;
  sc.n_dates = 82;  // 81 return rows: 60 in-sample + one 21-day window
  sc.n_agencies = 2;
  sc.seed = 22;
  sc.score_panel_period = 40;
  const SynthDataset ds = generate_synthetic(sc);

  const BacktestConfig cfg = quick_config({StrategySpec{StrategySpec::Kind::GMinV}});
  const BacktestReport report = run_backtest(ds.market, normalized_panels(ds), cfg);
  CHECK(report.rebalance_rows.size() == 1);
  CHECK(report.strategies[0].returns.size() == 21);
  CHECK(report.strategies[0].weights.size() == 1);
}

TEST_CASE("weight histories stay on the simplex for every strategy") {
  const SynthDataset ds = small_dataset(23);
  std::vector<StrategySpec> roster{
      StrategySpec{StrategySpec::Kind::GMinV}, StrategySpec{StrategySpec::Kind::EW},
      StrategySpec{StrategySpec::Kind::RP}, StrategySpec{StrategySpec::Kind::MDP}};
  StrategySpec mv{StrategySpec::Kind::MvEsg};
  mv.alpha = 0.25;
  roster.push_back(mv);
  StrategySpec kw{StrategySpec::Kind::KWorst};
  kw.alpha = 0.5;
  kw.k = 2;
  roster.push_back(kw);

  const BacktestReport report = run_backtest(ds.market, normalized_panels(ds),
                                             quick_config(roster));
  for (const auto& res : report.strategies) {
    CHECK(res.failed_windows == 0);
    for (const auto& w : res.weights) {
      CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(w.minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("the report is deterministic") {
  const SynthDataset ds = small_dataset(24);
  StrategySpec kw{StrategySpec::Kind::KWorst};
  kw.alpha = 0.25;
  kw.k = 2;
  const BacktestConfig cfg = quick_config({kw, StrategySpec{StrategySpec::Kind::GMinV}});

  const BacktestReport a = run_backtest(ds.market, normalized_panels(ds), cfg);
  const BacktestReport b = run_backtest(ds.market, normalized_panels(ds), cfg);
  for (std::size_t s = 0; s < a.strategies.size(); ++s) {
    CHECK((a.strategies[s].returns.array() == b.strategies[s].returns.array()).all());
    for (std::size_t q = 0; q < a.strategies[s].weights.size(); ++q)
      CHECK((a.strategies[s].weights[q].array() ==
             b.strategies[s].weights[q].array()).all());
  }
}

TEST_CASE("splitting at a rebalance boundary leaves the track record unchanged") {
  const SynthDataset ds = small_dataset(25, 4, 228);  // 227 returns
  const BacktestConfig cfg = quick_config({StrategySpec{StrategySpec::Kind::GMinV}});
  // windows start at row 60 and step by 21; row 144 = 60 + 4*21 is a boundary
  const int boundary = 144;

  const BacktestReport whole = run_backtest(ds.market, normalized_panels(ds), cfg);

  const auto slice_market = [&](int row_begin, int row_end) {
    // price rows [row_begin, row_end]: return rows [row_begin, row_end)
    const int rows = row_end - row_begin + 1;
    Eigen::MatrixXd prices = ds.market.prices.middleRows(row_begin, rows);
    std::vector<std::string> dates(ds.market.dates.begin() + row_begin,
                                   ds.market.dates.begin() + row_end + 1);
    return make_market_data(ds.market.asset_ids, dates, std::move(prices));
  };

  const BacktestReport first =
      run_backtest(slice_market(0, boundary), normalized_panels(ds), cfg);
  const BacktestReport second = run_backtest(
      slice_market(boundary - cfg.in_sample_length,
                   static_cast<int>(ds.market.returns.rows())),
      normalized_panels(ds), cfg);

  Eigen::VectorXd spliced(first.strategies[0].returns.size() +
                          second.strategies[0].returns.size());
  spliced << first.strategies[0].returns, second.strategies[0].returns;
  REQUIRE(spliced.size() == whole.strategies[0].returns.size());
  CHECK((spliced.array() == whole.strategies[0].returns.array()).all());
}

TEST_CASE("gminv beats equal weighting on variance most of the time") {
  int wins = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    SynthConfig sc;
    sc.n_assets = 5;
    sc.n_dates = 700;
    sc.n_agencies = 2;
    sc.seed = 3000 + trial;
    sc.score_panel_period = 200;
    const SynthDataset ds = generate_synthetic(sc);

    BacktestConfig cfg = quick_config({StrategySpec{StrategySpec::Kind::GMinV},
                                       StrategySpec{StrategySpec::Kind::EW}});
    cfg.in_sample_length = 500;
    const BacktestReport report = run_backtest(ds.market, normalized_panels(ds), cfg);
    if (volatility(report.strategies[0].returns) <= volatility(report.strategies[1].returns))
      ++wins;
  }
  CHECK(wins >= static_cast<int>(0.8 * trials));
}

TEST_CASE("too-short histories and missing panels are configuration errors") {
  const SynthDataset ds = small_dataset(26, 3, 70);
  BacktestConfig cfg = quick_config({StrategySpec{StrategySpec::Kind::EW}});
  cfg.in_sample_length = 60;
  cfg.rebalance_period = 21;  // needs 81 return rows, has 69
  CHECK_THROWS_AS(run_backtest(ds.market, normalized_panels(ds), cfg), ConfigError);

  const SynthDataset ok = small_dataset(27);
  StrategySpec kw{StrategySpec::Kind::KWorst};
  kw.k = 1;
  auto panels = normalized_panels(ok);
  for (auto& p : panels) p.date = "2099-01-01";  // all panels after the last rebalance
  CHECK_THROWS_AS(run_backtest(ok.market, panels, quick_config({kw})), ConfigError);
}
