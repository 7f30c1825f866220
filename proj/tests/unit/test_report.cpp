#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "tailcal/error.hpp"
#include "tailcal/report.hpp"

using namespace tailcal;

namespace {

// Five models; model k has capability k and a score that falls with k at
// every horizon, except at h=30 where the middle pair swaps.
ModelPanel five_panel() {
  std::vector<PanelModel> m;
  for (int k = 1; k <= 5; ++k) {
    m.push_back({"m" + std::to_string(k), "p" + std::to_string(k % 3), "l" + std::to_string(k), double(k)});
  }
  m.push_back({"excluded", "px", "lx", 99.0, false});
  return ModelPanel(m);
}

ScoreTable falling_scores(std::initializer_list<std::string> metrics) {
  ScoreTable t;
  for (const auto& metric : metrics) {
    for (int h : {30, 90}) {
      for (int k = 1; k <= 5; ++k) {
        for (int s = 0; s < 3; ++s) {
          double v = 10.0 - k + 0.1 * s;
          if (h == 30 && k == 2) v = 10.0 - 3 + 0.1 * s;
          if (h == 30 && k == 3) v = 10.0 - 2 + 0.1 * s;
          t.add({{"m" + std::to_string(k), "s" + std::to_string(s), h, metric}, v});
        }
        t.add({{"m" + std::to_string(k), "bad", h, metric}, std::nullopt, ParseStatus::failed});
      }
      // A strong model outside the included set must not count.
      t.add({{"excluded", "s0", h, metric}, 1e6});
    }
  }
  return t;
}

CurveOptions quick() {
  CurveOptions o;
  o.bootstrap.resamples = 500;
  o.bootstrap.seed = 3;
  return o;
}

}  // namespace

TEST(HorizonCurve, RhoMatchesSignedSpearman) {
  const auto panel = five_panel();
  const auto table = falling_scores({"crps"});
  const std::vector<std::string> metrics{"crps"};
  const auto curve = horizon_curve(table, panel, metrics, quick());
  ASSERT_EQ(curve.rows.size(), 2u);
  EXPECT_TRUE(curve.flagged.empty());
  for (const auto& row : curve.rows) {
    const auto data = align_scores(panel, table.model_means(row.horizon, "crps"));
    EXPECT_EQ(row.n, 5u);
    EXPECT_DOUBLE_EQ(*row.rho, spearman_signed(data.capabilities, data.scores, Orientation::lower_better));
    EXPECT_DOUBLE_EQ(*row.rho, -oracle::spearman(data.capabilities, data.scores));
    EXPECT_LE(*row.ci_low, *row.ci_high);
    EXPECT_EQ(row.method, "spearman/bootstrap/exact_perm");
  }
  EXPECT_EQ(curve.rows[0].horizon, 30);
  EXPECT_DOUBLE_EQ(*curve.rows[0].rho, 0.9);
  EXPECT_DOUBLE_EQ(*curve.rows[1].rho, 1.0);
  EXPECT_NEAR(*curve.rows[1].p, 2.0 / 120.0, 1e-12);
}

TEST(HorizonCurve, UndersizedHorizonsAreFlagged) {
  ModelPanel panel({{"a", "p", "l", 1}, {"b", "p", "l", 2}});
  ScoreTable t;
  t.add({{"a", "s", 30, "crps"}, 1.0});
  t.add({{"b", "s", 30, "crps"}, 2.0});
  const std::vector<std::string> metrics{"crps"};
  const auto curve = horizon_curve(t, panel, metrics, quick());
  EXPECT_TRUE(curve.rows.empty());
  ASSERT_EQ(curve.flagged.size(), 1u);
  EXPECT_EQ(curve.flagged[0], "crps@30: 2 models, need 3");
}

TEST(HorizonCurve, TiedScoresAreFlagged) {
  const auto panel = five_panel();
  ScoreTable t;
  for (int k = 1; k <= 5; ++k) t.add({{"m" + std::to_string(k), "s", 30, "crps"}, 4.0});
  const std::vector<std::string> metrics{"crps"};
  const auto curve = horizon_curve(t, panel, metrics, quick());
  EXPECT_TRUE(curve.rows.empty());
  EXPECT_EQ(curve.flagged.size(), 1u);
}

TEST(AnalysisCsv, RoundTrip) {
  std::vector<AnalysisRow> rows{
      {"crps", 30, 0.9, 0.3, 1.0, 5, 1.0 / 60.0, "spearman/bootstrap/exact_perm"},
      {"brier_q10", 0, std::nullopt, std::nullopt, std::nullopt, 4, std::nullopt, "with, comma"},
      {"crps", 210, -0.123456789012345, -1.0, 0.5, 12, 0.0501, "spearman/bootstrap/mc_perm"},
  };
  std::stringstream buf;
  write_analysis_csv(buf, rows);
  EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')), "analysis,horizon,rho,ci_low,ci_high,n,p,method");
  EXPECT_EQ(read_analysis_csv(buf), rows);
  std::stringstream bad("analysis,horizon,rho,ci_low,ci_high,n,p,method\ncrps,30,x,0,0,1,0,m\n");
  EXPECT_THROW(read_analysis_csv(bad), FormatError);
}

TEST(Pinball, LevelsInOrderWithWarnings) {
  const auto panel = five_panel();
  const auto full = falling_scores({"pinball_p90", "pinball_p10", "pinball_p50", "pinball_p25", "pinball_p75"});
  const auto d = pinball_decomposition(full, panel, quick());
  EXPECT_TRUE(d.warnings.empty());
  ASSERT_EQ(d.curve.rows.size(), 10u);
  const std::vector<std::string> order{"pinball_p10", "pinball_p25", "pinball_p50", "pinball_p75", "pinball_p90"};
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(d.curve.rows[2 * i].analysis, order[i]);

  const auto partial = falling_scores({"pinball_p10", "pinball_p90"});
  const auto p = pinball_decomposition(partial, panel, quick());
  EXPECT_EQ(p.warnings.size(), 3u);
  EXPECT_EQ(p.curve.rows.size(), 4u);
}

TEST(Sweep, NineRowsWithSignedRho) {
  const auto panel = five_panel();
  std::vector<CohortItem> cohort;
  // Wider forecasts for weaker models.
  for (int k = 1; k <= 5; ++k) {
    for (int s = 0; s < 20; ++s) {
      const double y = s;
      const double w = 2.0 * (6 - k);
      cohort.push_back({"m" + std::to_string(k), "s" + std::to_string(s),
                        QuantileForecast({y - 2 * w, y - w, y, y + w, y + 2 * w}), y + 0.5});
    }
  }
  const auto sweep = threshold_sweep(cohort);
  const auto rows = sweep_table(sweep, panel, 1);
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_DOUBLE_EQ(rows[k].level, kSweepLevels[k]);
    EXPECT_DOUBLE_EQ(rows[k].threshold, sweep.thresholds[k]);
    EXPECT_EQ(rows[k].n, 5u);
    ASSERT_TRUE(rows[k].rho.has_value()) << rows[k].flag;
    std::map<std::string, double> means;
    for (const auto& [m, v] : sweep.mean_scores) means[m] = v[k];
    const auto data = align_scores(panel, means);
    EXPECT_DOUBLE_EQ(*rows[k].rho, -oracle::spearman(data.capabilities, data.scores));
  }
  std::stringstream buf;
  write_sweep_csv(buf, rows);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(buf, line)) ++lines;
  EXPECT_EQ(lines, 10u);
}

TEST(Sweep, PerfectForecastsAreFlagged) {
  const auto panel = five_panel();
  std::vector<CohortItem> cohort;
  for (int k = 1; k <= 5; ++k) {
    for (int s = 0; s < 10; ++s) {
      const double y = 3.0 * s;
      cohort.push_back({"m" + std::to_string(k), "s" + std::to_string(s), QuantileForecast({y, y, y, y, y}), y});
    }
  }
  const auto rows = sweep_table(threshold_sweep(cohort), panel);
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.rho.has_value());
    EXPECT_FALSE(r.flag.empty());
  }
}

TEST(Sweep, DegenerateCohortFlagsEveryRow) {
  const auto panel = five_panel();
  std::vector<CohortItem> cohort;
  for (int k = 1; k <= 5; ++k) {
    cohort.push_back({"m" + std::to_string(k), "s", QuantileForecast({0, 1, 2, 3, double(4 + k)}), 2.0});
  }
  for (const auto& r : sweep_table(threshold_sweep(cohort), panel)) {
    EXPECT_EQ(r.flag, "degenerate threshold: every outcome identical");
  }
}

namespace {

TwoByTwoCells cells_from(const std::vector<std::array<double, 4>>& v) {
  TwoByTwoCells c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto id = "s" + std::to_string(i);
    c.base_small[id] = v[i][0];
    c.instruct_small[id] = v[i][1];
    c.base_large[id] = v[i][2];
    c.instruct_large[id] = v[i][3];
  }
  return c;
}

}  // namespace

TEST(TwoByTwo, EqualCellsGiveUnitRatiosAndNoStars) {
  const auto rows = two_by_two_report(did_interaction(cells_from({{2, 2, 2, 2}, {3, 3, 3, 3}, {5, 5, 5, 5}})));
  ASSERT_EQ(rows.size(), 9u);
  const std::vector<std::string> labels{"base_small",          "instruct_small",      "base_large",
                                        "instruct_large",      "post_training_small", "post_training_large",
                                        "scale_base",          "scale_instruct",      "interaction"};
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].label, labels[i]);
  for (std::size_t i = 4; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(*rows[i].mean, 1.0) << rows[i].label;
    EXPECT_DOUBLE_EQ(*rows[i].median, 1.0);
    EXPECT_TRUE(rows[i].stars.empty());
    EXPECT_FALSE(rows[i].p.has_value());
  }
  EXPECT_DOUBLE_EQ(*rows[4].tail_fraction, 0.0);
}

TEST(TwoByTwo, StarsFollowWilcoxonP) {
  // Instruct is ten times base everywhere; large adds more on top.
  std::vector<std::array<double, 4>> v;
  for (int i = 1; i <= 8; ++i) v.push_back({double(i), 10.0 * i, 2.0 * i, 40.0 * i + i});
  const auto result = did_interaction(cells_from(v));
  const auto rows = two_by_two_report(result);
  const auto& pt_small = rows[4];
  EXPECT_NEAR(*pt_small.p, result.raw.post_training_small.test.p_value, 0);
  EXPECT_NEAR(*pt_small.p, oracle::wilcoxon_p(result.raw.post_training_small.deltas), 1e-12);
  EXPECT_EQ(pt_small.stars, significance_stars(*pt_small.p));
  EXPECT_EQ(pt_small.stars, "**");
  EXPECT_DOUBLE_EQ(*pt_small.mean, 10.0);
  EXPECT_DOUBLE_EQ(*pt_small.tail_fraction, 1.0);
  ASSERT_TRUE(pt_small.p_log.has_value());
  EXPECT_TRUE(rows[6].tail_fraction == std::nullopt);
  const auto& inter = rows[8];
  EXPECT_DOUBLE_EQ(*inter.mean, *rows[5].mean / *rows[4].mean);
  EXPECT_EQ(inter.stars, significance_stars(*inter.p));
}

TEST(TwoByTwo, CsvAndRenderedText) {
  std::vector<std::array<double, 4>> v;
  for (int i = 1; i <= 6; ++i) v.push_back({double(i), 1e5 * i, 0.5 * i, 3e-4 * i});
  const auto rows = two_by_two_report(did_interaction(cells_from(v)));
  std::stringstream a, b;
  write_two_by_two_csv(a, rows);
  write_two_by_two_csv(b, two_by_two_report(did_interaction(cells_from(v))));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "row,mean,trimmed_mean,median,p,stars,p_log,stars_log,tail_fraction");

  const auto text = render_two_by_two(rows);
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  ASSERT_EQ(all.size(), 10u);
  for (const auto& l : all) EXPECT_EQ(l.size(), all[0].size());
  EXPECT_NE(all[2].find("3.50e5"), std::string::npos) << all[2];
  EXPECT_NE(all[4].find("0.00105"), std::string::npos) << all[4];
  EXPECT_NE(all[5].find("1.00e5"), std::string::npos) << all[5];
  EXPECT_NE(all[5].find("100%"), std::string::npos);
}
