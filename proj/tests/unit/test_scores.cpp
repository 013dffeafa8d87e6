#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ksum/errors.hpp"
#include "ksum/scores.hpp"
#include "ksum/synth.hpp"
#include "support/generators.hpp"

using namespace ksum;

namespace {

ScorePanel one_agency_panel(const Eigen::RowVectorXd& raw, Orientation orientation,
                            double lo = 0.0, double hi = 100.0) {
  ScorePanel panel;
  panel.agencies = {AgencyMeta{"AG", lo, hi, orientation}};
  for (int j = 0; j < raw.size(); ++j) panel.asset_ids.push_back("A" + std::to_string(j));
  panel.raw = raw;
  return panel;
}

}  // namespace

TEST_CASE("feature scaling endpoints and orientation") {
  Eigen::RowVectorXd raw(3);
  raw << 0.0, 50.0, 100.0;

  const NonEsgPanel higher = normalize(one_agency_panel(raw, Orientation::GreenerIsHigher));
  CHECK(higher.s(0, 0) == doctest::Approx(1.0));
  CHECK(higher.s(0, 1) == doctest::Approx(0.5));
  CHECK(higher.s(0, 2) == doctest::Approx(0.0));

  const NonEsgPanel lower = normalize(one_agency_panel(raw, Orientation::GreenerIsLower));
  CHECK(lower.s(0, 0) == doctest::Approx(0.0));
  CHECK(lower.s(0, 1) == doctest::Approx(0.5));
  CHECK(lower.s(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("normalization matches the per-cell formula on a random panel") {
  Rng rng(9101);
  ScorePanel panel;
  panel.raw.resize(4, 10);
  for (int i = 0; i < 4; ++i) {
    panel.agencies.push_back({"AG" + std::to_string(i), 0.0, 100.0,
                              i % 2 ? Orientation::GreenerIsLower
                                    : Orientation::GreenerIsHigher});
    for (int j = 0; j < 10; ++j) panel.raw(i, j) = rng.uniform(0.0, 100.0);
  }
  for (int j = 0; j < 10; ++j) panel.asset_ids.push_back("A" + std::to_string(j));

  const NonEsgPanel result = normalize(panel);
  for (int i = 0; i < 4; ++i) {
    const double lo = panel.raw.row(i).minCoeff();
    const double hi = panel.raw.row(i).maxCoeff();
    for (int j = 0; j < 10; ++j) {
      const double scaled = (panel.raw(i, j) - lo) / (hi - lo);
      const double expected = i % 2 ? scaled : 1.0 - scaled;
      CHECK(result.s(i, j) == doctest::Approx(expected).epsilon(1e-15));
    }
    // scaled rows always span [0, 1]
    CHECK(result.s.row(i).minCoeff() == doctest::Approx(0.0));
    CHECK(result.s.row(i).maxCoeff() == doctest::Approx(1.0));
  }
}

TEST_CASE("normalization ignores positive affine rescalings of a row") {
  Rng rng(9102);
  ScorePanel panel;
  panel.agencies = {AgencyMeta{"AG", -1000.0, 1000.0, Orientation::GreenerIsHigher}};
  panel.raw.resize(1, 8);
  for (int j = 0; j < 8; ++j) {
    panel.raw(0, j) = rng.uniform(10.0, 90.0);
    panel.asset_ids.push_back("A" + std::to_string(j));
  }
  const NonEsgPanel base = normalize(panel);

  ScorePanel scaled = panel;
  scaled.raw = (3.7 * panel.raw.array() - 42.0).matrix();
  const NonEsgPanel after = normalize(scaled);
  CHECK((base.s - after.s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant agency rows need the explicit fallback") {
  Eigen::RowVectorXd raw = Eigen::RowVectorXd::Constant(4, 55.0);
  const ScorePanel panel = one_agency_panel(raw, Orientation::GreenerIsHigher);
  CHECK_THROWS_AS(normalize(panel), DegenerateRowError);

  NormalizeOptions opts;
  opts.constant_row_fallback = true;
  const NonEsgPanel result = normalize(panel, opts);
  CHECK((result.s.array() == 0.5).all());
}

TEST_CASE("portfolio score is the plain dot product") {
  Eigen::VectorXd s(2), x(2);
  s << 0.2, 0.8;
  x << 1.0, 0.0;
  CHECK(portfolio_score(s, x) == doctest::Approx(0.2));
  x << 0.5, 0.5;
  CHECK(portfolio_score(s, x) == doctest::Approx(0.5));

  Eigen::VectorXd wrong(3);
  CHECK_THROWS_AS(portfolio_score(s, wrong), ShapeError);

  Rng rng(9103);
  const Eigen::VectorXd big_s = gen::random_vector(rng, 20, 0.0, 1.0);
  const Eigen::VectorXd big_x = gen::random_simplex(rng, 20);
  double manual = 0.0;
  for (int j = 0; j < 20; ++j) manual += big_s(j) * big_x(j);
  CHECK(portfolio_score(big_s, big_x) == doctest::Approx(manual).epsilon(1e-15));
  CHECK(portfolio_score(big_s, big_x) >= big_s.minCoeff() - 1e-15);
  CHECK(portfolio_score(big_s, big_x) <= big_s.maxCoeff() + 1e-15);
}

TEST_CASE("disagreement distances on crafted rows") {
  NonEsgPanel panel;
  panel.agency_ids = {"P", "Q"};
  panel.asset_ids = {"A0", "A1"};
  panel.s.resize(2, 2);

  SUBCASE("identical non-constant rows are at distance zero") {
    panel.s << 0.2, 0.7,
               0.2, 0.7;
    for (auto metric : {DisagreementMetric::Euclidean, DisagreementMetric::Chebychev,
                        DisagreementMetric::Cosine, DisagreementMetric::Correlation}) {
      const DisagreementResult res = disagreement(panel, metric);
      REQUIRE(res.average_defined);
      CHECK(res.average == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("identical constant rows leave correlation undefined") {
    panel.s << 0.4, 0.4,
               0.4, 0.4;
    const DisagreementResult corr = disagreement(panel, DisagreementMetric::Correlation);
    CHECK_FALSE(corr.defined[0][1]);
    CHECK_FALSE(corr.average_defined);
    const DisagreementResult euc = disagreement(panel, DisagreementMetric::Euclidean);
    CHECK(euc.average == doctest::Approx(0.0));
  }

  SUBCASE("opposed unit rows") {
    panel.s << 1.0, 0.0,
               0.0, 1.0;
    CHECK(disagreement(panel, DisagreementMetric::Euclidean).average ==
          doctest::Approx(std::sqrt(2.0)));
    CHECK(disagreement(panel, DisagreementMetric::Chebychev).average == doctest::Approx(1.0));
  }
}

TEST_CASE("disagreement matches an independent pairwise recomputation") {
  Rng rng(9104);
  NonEsgPanel panel;
  panel.s.resize(4, 50);
  for (int i = 0; i < 4; ++i) {
    panel.agency_ids.push_back("AG" + std::to_string(i));
    for (int j = 0; j < 50; ++j) panel.s(i, j) = rng.uniform01();
  }
  for (int j = 0; j < 50; ++j) panel.asset_ids.push_back("A" + std::to_string(j));

  const DisagreementResult euc = disagreement(panel, DisagreementMetric::Euclidean);
  const DisagreementResult che = disagreement(panel, DisagreementMetric::Chebychev);
  const DisagreementResult cos = disagreement(panel, DisagreementMetric::Cosine);
  const DisagreementResult cor = disagreement(panel, DisagreementMetric::Correlation);

  for (int i = 0; i < 4; ++i) {
    CHECK(euc.distance(i, i) == 0.0);
    for (int k = i + 1; k < 4; ++k) {
      double sq = 0.0, cheb = 0.0, dot = 0.0, ni = 0.0, nk = 0.0;
      double mi = panel.s.row(i).mean(), mk = panel.s.row(k).mean();
      double cv = 0.0, vi = 0.0, vk = 0.0;
      for (int j = 0; j < 50; ++j) {
        const double a = panel.s(i, j), b = panel.s(k, j);
        sq += (a - b) * (a - b);
        cheb = std::max(cheb, std::abs(a - b));
        dot += a * b;
        ni += a * a;
        nk += b * b;
        cv += (a - mi) * (b - mk);
        vi += (a - mi) * (a - mi);
        vk += (b - mk) * (b - mk);
      }
      CHECK(euc.distance(i, k) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
      CHECK(euc.distance(k, i) == euc.distance(i, k));  // symmetry
      CHECK(che.distance(i, k) == doctest::Approx(cheb).epsilon(1e-12));
      CHECK(cos.distance(i, k) ==
            doctest::Approx(1.0 - dot / std::sqrt(ni * nk)).epsilon(1e-12));
      CHECK(cor.distance(i, k) ==
            doctest::Approx(1.0 - cv / std::sqrt(vi * vk)).epsilon(1e-12));
    }
  }

  // triangle inequality on the metric distances
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        CHECK(euc.distance(a, c) <= euc.distance(a, b) + euc.distance(b, c) + 1e-12);
        CHECK(che.distance(a, c) <= che.distance(a, b) + che.distance(b, c) + 1e-12);
      }
}

TEST_CASE("score csv and metadata round trip through the loader") {
  namespace fs = std::filesystem;
  const fs::path csv = fs::temp_directory_path() / "ksum_scores.csv";
  const fs::path meta = fs::temp_directory_path() / "ksum_scores_meta.json";

  ScorePanel panel;
  panel.agencies = {AgencyMeta{"RFT", 0.0, 100.0, Orientation::GreenerIsHigher},
                    AgencyMeta{"MNG", 0.0, 100.0, Orientation::GreenerIsLower}};
  panel.asset_ids = {"AAA", "BBB", "CCC"};
  panel.raw.resize(2, 3);
  panel.raw << 10.5, 55.25, 90.0,
               80.0, 43.5, 12.125;

  write_score_panel(panel, csv.string());
  write_score_metadata(panel.agencies, meta.string());
  const ScorePanel loaded = load_score_panel(csv.string(), meta.string());

  CHECK(loaded.asset_ids == panel.asset_ids);
  CHECK((loaded.raw.array() == panel.raw.array()).all());
  CHECK(loaded.agencies[1].orientation == Orientation::GreenerIsLower);

  const ScorePanel aligned = loaded.align({"CCC", "AAA"});
  CHECK(aligned.raw(0, 0) == doctest::Approx(90.0));
  CHECK(aligned.raw(0, 1) == doctest::Approx(10.5));
  CHECK_THROWS_AS(loaded.align({"ZZZ"}), ConfigError);

  fs::remove(csv);
  fs::remove(meta);
}

TEST_CASE("panel validation enforces the declared range") {
  ScorePanel panel = one_agency_panel(Eigen::RowVectorXd::Constant(2, 105.0),
                                      Orientation::GreenerIsHigher);
  CHECK_THROWS_AS(panel.validate(), ConfigError);
}
