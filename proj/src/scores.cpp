#include "ksum/scores.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "ksum/detail/text.hpp"
#include "ksum/errors.hpp"

namespace ksum {

void ScorePanel::validate() const {
  const int m = n_agencies();
  const int n = n_assets();
  if (raw.rows() != m || raw.cols() != n)
    throw ShapeError("score matrix does not match agency/asset lists");
  for (int i = 0; i < m; ++i) {
    const auto& a = agencies[i];
    if (!(a.range_min < a.range_max))
      throw ConfigError("agency '" + a.id + "' has empty score range");
    for (int j = 0; j < n; ++j) {
      const double v = raw(i, j);
      if (v < a.range_min || v > a.range_max)
        throw ConfigError("score " + detail::format_double(v) + " for agency '" + a.id +
                          "', asset '" + asset_ids[j] + "' outside declared range");
    }
  }
}

ScorePanel ScorePanel::align(const std::vector<std::string>& target_ids) const {
  std::map<std::string, int> index;
  for (int j = 0; j < n_assets(); ++j) index[asset_ids[j]] = j;

  ScorePanel out;
  out.agencies = agencies;
  out.asset_ids = target_ids;
  out.raw.resize(n_agencies(), static_cast<int>(target_ids.size()));
  for (std::size_t c = 0; c < target_ids.size(); ++c) {
    auto it = index.find(target_ids[c]);
    if (it == index.end())
      throw ConfigError("no score for asset '" + target_ids[c] + "'");
    out.raw.col(static_cast<int>(c)) = raw.col(it->second);
  }
  return out;
}

NonEsgPanel normalize(const ScorePanel& panel, const NormalizeOptions& opts) {
  const int m = panel.n_agencies();
  const int n = panel.n_assets();
  if (m == 0 || n == 0) throw ShapeError("empty score panel");

  NonEsgPanel out;
  out.asset_ids = panel.asset_ids;
  out.agency_ids.reserve(m);
  for (const auto& a : panel.agencies) out.agency_ids.push_back(a.id);
  out.s.resize(m, n);

  for (int i = 0; i < m; ++i) {
    const double lo = panel.raw.row(i).minCoeff();
    const double hi = panel.raw.row(i).maxCoeff();
    if (lo == hi) {
      if (!opts.constant_row_fallback)
        throw DegenerateRowError("agency '" + panel.agencies[i].id +
                                 "' scored every asset identically");
      out.s.row(i).setConstant(0.5);
      continue;
    }
    for (int j = 0; j < n; ++j) {
      const double scaled = (panel.raw(i, j) - lo) / (hi - lo);
      out.s(i, j) = panel.agencies[i].orientation == Orientation::GreenerIsHigher
                        ? 1.0 - scaled
                        : scaled;
    }
  }
  return out;
}

double portfolio_score(const Eigen::VectorXd& agency_scores, const Eigen::VectorXd& weights) {
  if (agency_scores.size() != weights.size())
    throw ShapeError("score vector has " + std::to_string(agency_scores.size()) +
                     " entries, weights " + std::to_string(weights.size()));
  return agency_scores.dot(weights);
}

namespace {

bool pair_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   DisagreementMetric metric, double& out) {
  switch (metric) {
    case DisagreementMetric::Euclidean:
      out = (a - b).norm();
      return true;
    case DisagreementMetric::Chebychev:
      out = (a - b).cwiseAbs().maxCoeff();
      return true;
    case DisagreementMetric::Cosine: {
      const double na = a.norm(), nb = b.norm();
      if (na == 0.0 || nb == 0.0) return false;
      out = 1.0 - a.dot(b) / (na * nb);
      return true;
    }
    case DisagreementMetric::Correlation: {
      const Eigen::VectorXd da = a.array() - a.mean();
      const Eigen::VectorXd db = b.array() - b.mean();
      const double na = da.norm(), nb = db.norm();
      if (na == 0.0 || nb == 0.0) return false;  // constant row, undefined
      out = 1.0 - da.dot(db) / (na * nb);
      return true;
    }
  }
  return false;
}

}  // namespace

DisagreementResult disagreement(const NonEsgPanel& panel, DisagreementMetric metric) {
  const int m = panel.n_agencies();
  if (m < 2) throw ShapeError("disagreement needs at least 2 agencies");

  DisagreementResult res;
  res.distance = Eigen::MatrixXd::Zero(m, m);
  res.defined.assign(m, std::vector<bool>(m, true));

  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      double d = 0.0;
      const bool ok = pair_distance(panel.s.row(i), panel.s.row(k), metric, d);
      res.defined[i][k] = res.defined[k][i] = ok;
      if (ok) {
        res.distance(i, k) = res.distance(k, i) = d;
        sum += d;
        ++pairs;
      }
    }
  }
  res.average_defined = pairs > 0;
  res.average = pairs > 0 ? sum / pairs : 0.0;
  return res;
}

ScorePanel load_score_panel(const std::string& csv_path, const std::string& meta_path) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw ConfigError("cannot open score metadata: " + meta_path);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad score metadata JSON (" + meta_path + "): " + e.what());
  }

  ScorePanel panel;
  std::map<std::string, int> agency_index;
  for (const auto& entry : meta.at("agencies")) {
    AgencyMeta a;
    a.id = entry.at("id").get<std::string>();
    a.range_min = entry.at("range_min").get<double>();
    a.range_max = entry.at("range_max").get<double>();
    const std::string orient = entry.at("orientation").get<std::string>();
    if (orient == "greener_is_higher")
      a.orientation = Orientation::GreenerIsHigher;
    else if (orient == "greener_is_lower")
      a.orientation = Orientation::GreenerIsLower;
    else
      throw ConfigError("unknown orientation '" + orient + "' in " + meta_path);
    agency_index[a.id] = panel.n_agencies();
    panel.agencies.push_back(a);
  }
  if (panel.agencies.empty()) throw ConfigError("score metadata lists no agencies");

  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open score file: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty score file: " + csv_path);
  auto header = detail::split(detail::strip(line), ',');
  if (header.size() != 3 || detail::strip(header[0]) != "agency" ||
      detail::strip(header[1]) != "asset" || detail::strip(header[2]) != "score")
    throw ParseError("score header must be 'agency,asset,score'");

  std::map<std::string, int> asset_index;
  std::vector<std::string> asset_order;
  std::map<std::pair<int, int>, double> cells;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    auto parts = detail::split(stripped, ',');
    if (parts.size() != 3)
      throw ParseError("score row " + std::to_string(lineno) + " needs 3 cells");
    const std::string agency = detail::strip(parts[0]);
    const std::string asset = detail::strip(parts[1]);
    auto ai = agency_index.find(agency);
    if (ai == agency_index.end())
      throw ParseError("row " + std::to_string(lineno) + ": agency '" + agency +
                       "' not declared in metadata");
    char* end = nullptr;
    const std::string cell = detail::strip(parts[2]);
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
      throw ParseError("malformed score at row " + std::to_string(lineno) + ": '" + cell + "'");
    if (!asset_index.count(asset)) {
      asset_index[asset] = static_cast<int>(asset_order.size());
      asset_order.push_back(asset);
    }
    cells[{ai->second, asset_index[asset]}] = v;
  }

  panel.asset_ids = asset_order;
  panel.raw.resize(panel.n_agencies(), panel.n_assets());
  for (int i = 0; i < panel.n_agencies(); ++i) {
    for (int j = 0; j < panel.n_assets(); ++j) {
      auto it = cells.find({i, j});
      if (it == cells.end())
        throw ParseError("missing score for agency '" + panel.agencies[i].id +
                         "', asset '" + panel.asset_ids[j] + "'");
      panel.raw(i, j) = it->second;
    }
  }
  panel.validate();
  return panel;
}

void write_score_panel(const ScorePanel& panel, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw ConfigError("cannot write score file: " + csv_path);
  out << "agency,asset,score\n";
  for (int i = 0; i < panel.n_agencies(); ++i)
    for (int j = 0; j < panel.n_assets(); ++j)
      out << panel.agencies[i].id << ',' << panel.asset_ids[j] << ','
          << detail::format_double(panel.raw(i, j)) << '\n';
}

void write_score_metadata(const std::vector<AgencyMeta>& agencies, const std::string& meta_path) {
  nlohmann::json meta;
  meta["agencies"] = nlohmann::json::array();
  for (const auto& a : agencies) {
    meta["agencies"].push_back(
        {{"id", a.id},
         {"range_min", a.range_min},
         {"range_max", a.range_max},
         {"orientation", a.orientation == Orientation::GreenerIsHigher ? "greener_is_higher"
                                                                       : "greener_is_lower"}});
  }
  std::ofstream out(meta_path);
  if (!out) throw ConfigError("cannot write score metadata: " + meta_path);
  out << meta.dump(2) << '\n';
}

}  // namespace ksum
