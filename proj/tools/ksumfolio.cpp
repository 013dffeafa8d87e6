// Command-line front end: synthesize datasets, report agency disagreement,
// trace efficient surfaces, and run rolling-window backtests.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "ksum/backtest.hpp"
#include "ksum/baselines.hpp"
#include "ksum/detail/text.hpp"
#include "ksum/errors.hpp"
#include "ksum/frontier.hpp"
#include "ksum/ksum_models.hpp"
#include "ksum/market_data.hpp"
#include "ksum/metrics.hpp"
#include "ksum/scores.hpp"
#include "ksum/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartialSolve = 2;
constexpr int kExitIo = 3;

struct RunConfig {
  json raw;
  fs::path base;  // directory of the config file; relative paths resolve here

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  }
};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ksum::ConfigError("cannot open config: " + path);
  RunConfig cfg;
  try {
    in >> cfg.raw;
  } catch (const json::exception& e) {
    throw ksum::ConfigError("bad config JSON: " + std::string(e.what()));
  }
  cfg.base = fs::absolute(path).parent_path();

  if (cfg.raw.contains("dataset")) {
    const fs::path ds_path = cfg.resolve(cfg.raw["dataset"].get<std::string>());
    std::ifstream ds_in(ds_path);
    if (!ds_in) throw ksum::ConfigError("cannot open dataset manifest: " + ds_path.string());
    json ds;
    ds_in >> ds;
    const fs::path ds_base = ds_path.parent_path();
    const auto rebase = [&](const std::string& p) {
      fs::path q(p);
      return (q.is_absolute() ? q : ds_base / q).string();
    };
    cfg.raw["prices"] = rebase(ds.at("prices").get<std::string>());
    cfg.raw["scores_meta"] = rebase(ds.at("scores_meta").get<std::string>());
    json scores = json::array();
    for (const auto& s : ds.at("scores"))
      scores.push_back({{"date", s.at("date")}, {"file", rebase(s.at("file").get<std::string>())}});
    cfg.raw["scores"] = scores;
    cfg.base = "";  // paths are now absolute
  }
  return cfg;
}

std::string config_hash(const json& raw) {
  ksum::detail::Fnv1a h;
  h.update(raw.dump());
  return h.hex();
}

struct LoadedData {
  ksum::MarketData market;
  std::vector<ksum::DatedScorePanel> panels;   // aligned + normalized
  std::vector<std::string> agency_ids;
  std::vector<std::string> dropped_assets;
};

// Intersect the market universe with every score panel, preserving market
// order; assets missing anywhere are dropped and reported.
LoadedData load_inputs(const RunConfig& cfg) {
  LoadedData out;
  if (!cfg.raw.contains("prices")) throw ksum::ConfigError("config needs 'prices'");
  ksum::LoadReport price_report;
  ksum::MarketData market =
      ksum::load_prices(cfg.resolve(cfg.raw["prices"].get<std::string>()).string(),
                        &price_report);
  out.dropped_assets = price_report.dropped_assets;

  if (!cfg.raw.contains("scores") || !cfg.raw.contains("scores_meta"))
    throw ksum::ConfigError("config needs 'scores' and 'scores_meta'");
  const std::string meta = cfg.resolve(cfg.raw["scores_meta"].get<std::string>()).string();

  std::vector<std::pair<std::string, ksum::ScorePanel>> raw_panels;
  for (const auto& entry : cfg.raw["scores"]) {
    raw_panels.emplace_back(
        entry.at("date").get<std::string>(),
        ksum::load_score_panel(cfg.resolve(entry.at("file").get<std::string>()).string(), meta));
  }
  if (raw_panels.empty()) throw ksum::ConfigError("config lists no score panels");

  std::vector<std::string> common;
  for (const auto& id : market.asset_ids) {
    const bool everywhere = std::all_of(
        raw_panels.begin(), raw_panels.end(), [&](const auto& p) {
          const auto& ids = p.second.asset_ids;
          return std::find(ids.begin(), ids.end(), id) != ids.end();
        });
    if (everywhere)
      common.push_back(id);
    else
      out.dropped_assets.push_back(id);
  }
  if (common.size() < 2) throw ksum::ConfigError("fewer than 2 assets have full data");

  if (common.size() != market.asset_ids.size()) {
    std::vector<int> keep;
    for (std::size_t j = 0; j < market.asset_ids.size(); ++j)
      if (std::find(common.begin(), common.end(), market.asset_ids[j]) != common.end())
        keep.push_back(static_cast<int>(j));
    Eigen::MatrixXd prices(market.prices.rows(), static_cast<int>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) prices.col(c) = market.prices.col(keep[c]);
    market = ksum::make_market_data(common, market.dates, std::move(prices));
  }
  out.market = std::move(market);

  std::optional<std::vector<std::string>> subset;
  if (cfg.raw.contains("agencies"))
    subset = cfg.raw["agencies"].get<std::vector<std::string>>();

  for (auto& [date, panel] : raw_panels) {
    ksum::ScorePanel aligned = panel.align(out.market.asset_ids);
    if (subset) {
      std::vector<int> rows;
      for (const auto& want : *subset) {
        bool found = false;
        for (int i = 0; i < aligned.n_agencies(); ++i)
          if (aligned.agencies[i].id == want) {
            rows.push_back(i);
            found = true;
          }
        if (!found) throw ksum::ConfigError("agency '" + want + "' not in score panel");
      }
      ksum::ScorePanel filtered;
      filtered.asset_ids = aligned.asset_ids;
      filtered.raw.resize(static_cast<int>(rows.size()), aligned.n_assets());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        filtered.agencies.push_back(aligned.agencies[rows[r]]);
        filtered.raw.row(static_cast<int>(r)) = aligned.raw.row(rows[r]);
      }
      aligned = std::move(filtered);
    }
    ksum::NormalizeOptions opts;
    opts.constant_row_fallback = cfg.raw.value("constant_row_fallback", false);
    out.panels.push_back({date, ksum::normalize(aligned, opts)});
  }
  out.agency_ids = out.panels.front().panel.agency_ids;
  std::sort(out.panels.begin(), out.panels.end(),
            [](const auto& a, const auto& b) { return a.date < b.date; });
  return out;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, json extra) {
  extra["artifact_version"] = kVersion;
  extra["config_hash"] = config_hash(cfg.raw);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ksum::ConfigError("cannot write manifest in " + dir.string());
  out << extra.dump(2) << '\n';
}

// ---------------------------------------------------------------- synth

int cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
  ksum::SynthConfig sc;
  const json s = cfg.raw.value("synth", json::object());
  sc.n_assets = s.value("n_assets", sc.n_assets);
  sc.n_dates = s.value("n_dates", sc.n_dates);
  sc.n_agencies = s.value("n_agencies", sc.n_agencies);
  sc.seed = cfg.raw.value("seed", static_cast<std::uint64_t>(42));
  sc.disagreement = s.value("disagreement", sc.disagreement);
  sc.score_panel_period = s.value("score_panel_period", sc.score_panel_period);
  sc.start_date = s.value("start_date", sc.start_date);
  sc.flip_last_agency = s.value("flip_last_agency", sc.flip_last_agency);

  const ksum::SynthDataset ds = ksum::generate_synthetic(sc);
  fs::create_directories(out_dir);
  ksum::write_prices_csv(ds.market, (out_dir / "prices.csv").string());
  ksum::write_score_metadata(ds.agencies, (out_dir / "score_meta.json").string());

  json scores = json::array();
  for (const auto& [date, panel] : ds.score_panels) {
    const std::string name = "scores_" + date + ".csv";
    ksum::write_score_panel(panel, (out_dir / name).string());
    scores.push_back({{"date", date}, {"file", name}});
  }
  json manifest = {{"prices", "prices.csv"},
                   {"scores_meta", "score_meta.json"},
                   {"scores", scores},
                   {"seed", sc.seed},
                   {"n_assets", sc.n_assets},
                   {"n_dates", sc.n_dates},
                   {"n_agencies", sc.n_agencies},
                   {"disagreement", sc.disagreement}};
  std::ofstream mf(out_dir / "dataset.json");
  mf << manifest.dump(2) << '\n';
  std::cout << "wrote synthetic dataset to " << out_dir.string() << "\n";
  return kExitOk;
}

// --------------------------------------------------------- disagreement

int cmd_disagreement(const RunConfig& cfg, const fs::path& out_dir) {
  const LoadedData data = load_inputs(cfg);
  fs::create_directories(out_dir);

  const std::array<std::pair<ksum::DisagreementMetric, const char*>, 4> metrics{{
      {ksum::DisagreementMetric::Euclidean, "euclidean"},
      {ksum::DisagreementMetric::Chebychev, "chebychev"},
      {ksum::DisagreementMetric::Cosine, "cosine"},
      {ksum::DisagreementMetric::Correlation, "correlation"},
  }};

  std::ofstream pairs(out_dir / "disagreement_pairs.csv");
  std::ofstream summary(out_dir / "disagreement_summary.csv");
  if (!pairs || !summary) throw ksum::ConfigError("cannot write disagreement reports");
  pairs << "panel_date,metric,agency_i,agency_j,distance,distance_x100,defined\n";
  summary << "panel_date,metric,average,average_x100,defined_pairs,pairs\n";

  for (const auto& dated : data.panels) {
    ksum::NonEsgPanel scaled = dated.panel;
    scaled.s *= 100.0;
    for (const auto& [metric, name] : metrics) {
      const ksum::DisagreementResult unit = ksum::disagreement(dated.panel, metric);
      const ksum::DisagreementResult x100 = ksum::disagreement(scaled, metric);
      const int m = dated.panel.n_agencies();
      int defined_pairs = 0;
      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
          if (unit.defined[i][j]) ++defined_pairs;
          pairs << dated.date << ',' << name << ',' << data.agency_ids[i] << ','
                << data.agency_ids[j] << ','
                << (unit.defined[i][j] ? ksum::detail::format_double(unit.distance(i, j)) : "NA")
                << ','
                << (x100.defined[i][j] ? ksum::detail::format_double(x100.distance(i, j)) : "NA")
                << ',' << (unit.defined[i][j] ? "yes" : "no") << '\n';
        }
      }
      summary << dated.date << ',' << name << ','
              << (unit.average_defined ? ksum::detail::format_double(unit.average) : "NA") << ','
              << (x100.average_defined ? ksum::detail::format_double(x100.average) : "NA") << ','
              << defined_pairs << ',' << m * (m - 1) / 2 << '\n';
    }
  }
  write_manifest(out_dir, cfg,
                 {{"command", "disagreement"},
                  {"panels", data.panels.size()},
                  {"agencies", data.agency_ids},
                  {"dropped_assets", data.dropped_assets}});
  return kExitOk;
}

// ------------------------------------------------------------- frontier

int cmd_frontier(const RunConfig& cfg, const fs::path& out_dir, int k_override) {
  const LoadedData data = load_inputs(cfg);
  fs::create_directories(out_dir);

  const json fr = cfg.raw.value("frontier", json::object());
  const int n_mu = fr.value("mu_levels", 20);
  const int n_gamma = fr.value("gamma_levels", 20);
  const int in_sample = std::min<int>(
      cfg.raw.value("backtest", json::object()).value("in_sample_length", 500),
      static_cast<int>(data.market.returns.rows()));

  const int end = static_cast<int>(data.market.returns.rows());
  const ksum::MomentEstimate est = ksum::estimate_moments(data.market, end - in_sample, end);
  const ksum::NonEsgPanel& panel =
      ksum::align_scores(data.panels, data.market.dates.back());

  ksum::KsumInstance instance{est.sigma, est.mu, panel.s,
                              k_override > 0 ? k_override : cfg.raw.value("k", 1)};
  const ksum::FrontierSurface surf = ksum::trace_surface(instance, n_mu, n_gamma);

  ksum::write_surface_csv(surf, (out_dir / "surface.csv").string());
  ksum::write_surface_manifest(surf, instance, (out_dir / "surface_manifest.json").string());
  write_manifest(out_dir, cfg,
                 {{"command", "frontier"},
                  {"k", instance.k},
                  {"failed_points", surf.failed_points},
                  {"total_points", surf.total_points}});

  std::cout << "surface: " << surf.total_points << " points, " << surf.failed_points
            << " failed\n";
  if (surf.failed_points * 10 > surf.total_points) return kExitPartialSolve;
  return kExitOk;
}

// ------------------------------------------------------------- backtest

std::vector<ksum::StrategySpec> build_roster(const json& names, int k, int mv_esg_agency) {
  using Kind = ksum::StrategySpec::Kind;
  std::vector<ksum::StrategySpec> roster;
  const std::array<double, 4> alphas{0.0, 0.25, 0.5, 0.75};
  for (const auto& entry : names) {
    const std::string name = entry.get<std::string>();
    if (name == "GMinV") roster.push_back({Kind::GMinV});
    else if (name == "EW") roster.push_back({Kind::EW});
    else if (name == "RP") roster.push_back({Kind::RP});
    else if (name == "MDP") roster.push_back({Kind::MDP});
    else if (name == "MvEsg") {
      for (double a : alphas) {
        ksum::StrategySpec s{Kind::MvEsg};
        s.agency = mv_esg_agency;
        s.alpha = a;
        roster.push_back(s);
      }
    } else if (name == "KWorst") {
      for (double a : alphas) {
        ksum::StrategySpec s{Kind::KWorst};
        s.alpha = a;
        s.k = k;
        roster.push_back(s);
      }
    } else {
      throw ksum::ConfigError("unknown strategy '" + name + "'");
    }
  }
  if (roster.empty()) throw ksum::ConfigError("empty strategy roster");
  return roster;
}

void write_series_csv(const fs::path& path, const std::vector<std::string>& dates,
                      const Eigen::VectorXd& values) {
  std::ofstream out(path);
  if (!out) throw ksum::ConfigError("cannot write " + path.string());
  out << "date,return\n";
  for (int t = 0; t < values.size(); ++t)
    out << dates[t] << ',' << ksum::detail::format_double(values(t)) << '\n';
}

void write_weights_csv(const fs::path& path, const std::vector<std::string>& asset_ids,
                       const std::vector<std::string>& dates,
                       const std::vector<Eigen::VectorXd>& weights) {
  std::ofstream out(path);
  if (!out) throw ksum::ConfigError("cannot write " + path.string());
  out << "date";
  for (const auto& id : asset_ids) out << ',' << id;
  out << '\n';
  for (std::size_t q = 0; q < weights.size(); ++q) {
    out << dates[q];
    for (int j = 0; j < weights[q].size(); ++j)
      out << ',' << ksum::detail::format_double(weights[q](j));
    out << '\n';
  }
}

int cmd_backtest(const RunConfig& cfg, const fs::path& out_dir) {
  const LoadedData data = load_inputs(cfg);
  fs::create_directories(out_dir);

  const json bt = cfg.raw.value("backtest", json::object());
  ksum::BacktestConfig base;
  base.in_sample_length = bt.value("in_sample_length", 500);
  base.rebalance_period = bt.value("rebalance_period", 21);
  const json names = bt.value(
      "strategies", json::array({"GMinV", "EW", "RP", "MDP", "MvEsg", "KWorst"}));

  std::vector<int> ks;
  if (cfg.raw.contains("ks"))
    ks = cfg.raw["ks"].get<std::vector<int>>();
  else
    ks.push_back(cfg.raw.value("k", 1));

  int mv_esg_agency = 0;
  if (cfg.raw.contains("mv_esg_agency")) {
    const std::string want = cfg.raw["mv_esg_agency"].get<std::string>();
    const auto it = std::find(data.agency_ids.begin(), data.agency_ids.end(), want);
    if (it == data.agency_ids.end())
      throw ksum::ConfigError("mv_esg_agency '" + want + "' not found");
    mv_esg_agency = static_cast<int>(it - data.agency_ids.begin());
  }
  const int roi_horizon = cfg.raw.value("roi_horizon", 756);

  int total_failed = 0;
  json per_k = json::array();
  for (int k : ks) {
    const int m = static_cast<int>(data.agency_ids.size());
    if (k < 1 || k > m)
      throw ksum::ConfigError("k=" + std::to_string(k) + " outside [1, " + std::to_string(m) + "]");
    ksum::BacktestConfig config = base;
    config.strategies = build_roster(names, k, mv_esg_agency);

    const ksum::BacktestReport report = ksum::run_backtest(data.market, data.panels, config);

    const fs::path k_dir = out_dir / ("k" + std::to_string(k));
    fs::create_directories(k_dir);

    std::vector<ksum::MetricRow> rows;
    std::vector<ksum::RoiRow> roi_rows;
    json failures = json::object();
    for (const auto& res : report.strategies) {
      const std::string label = res.spec.label();
      rows.push_back(ksum::compute_metric_row(label, res.returns, res.weights,
                                              report.index_returns));
      roi_rows.push_back({label, ksum::roi(ksum::wealth_path(res.returns), roi_horizon)});
      write_series_csv(k_dir / ("returns_" + label + ".csv"), report.oos_dates, res.returns);
      write_weights_csv(k_dir / ("weights_" + label + ".csv"), data.market.asset_ids,
                        res.rebalance_dates, res.weights);
      failures[label] = res.failed_windows;
      total_failed += res.failed_windows;
    }
    ksum::write_metric_table(rows, (k_dir / "metrics.csv").string());
    ksum::write_roi_table(roi_rows, (k_dir / "roi.csv").string());
    per_k.push_back({{"k", k}, {"failed_windows", failures}});
  }

  write_manifest(out_dir, cfg,
                 {{"command", "backtest"},
                  {"ks", ks},
                  {"in_sample_length", base.in_sample_length},
                  {"rebalance_period", base.rebalance_period},
                  {"roi_horizon", roi_horizon},
                  {"dropped_assets", data.dropped_assets},
                  {"runs", per_k}});
  std::cout << "backtest complete; failed windows: " << total_failed << "\n";
  return total_failed > 0 ? kExitPartialSolve : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agency ESG portfolio selection toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int k_override = 0;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", config_path, "run configuration (JSON)");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--k", k_override, "override the k-worst tail size");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed_override = s; seed_given = true; },
        "override the dataset seed");
  };

  add_common(app.add_subcommand("synth", "generate a seeded synthetic dataset"));
  add_common(app.add_subcommand("disagreement", "report cross-agency rating divergence"));
  add_common(app.add_subcommand("frontier", "trace the efficient surface"));
  add_common(app.add_subcommand("backtest", "rolling-window strategy comparison"));

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path);
    if (seed_given) cfg.raw["seed"] = seed_override;
    if (k_override > 0) {
      cfg.raw["k"] = k_override;
      cfg.raw.erase("ks");  // a single explicit k wins over the config list
    }
    fs::path out = out_dir.empty() ? cfg.resolve(cfg.raw.value("out", "out")) : fs::path(out_dir);

    if (app.got_subcommand("synth")) return cmd_synth(cfg, out);
    if (app.got_subcommand("disagreement")) return cmd_disagreement(cfg, out);
    if (app.got_subcommand("frontier")) return cmd_frontier(cfg, out, k_override);
    if (app.got_subcommand("backtest")) return cmd_backtest(cfg, out);
  } catch (const ksum::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ksum::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ksum::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
