#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tailcal/error.hpp"
#include "tailcal/panel.hpp"
#include "tailcal/score_table.hpp"

using namespace tailcal;

namespace {

ScoreTable sample_table() {
  ScoreTable t;
  t.add({{"b", "s1", 30, "crps"}, 2.5, ParseStatus::ok});
  t.add({{"a", "s1", 30, "crps"}, 1.0 / 3.0, ParseStatus::repaired});
  t.add({{"a", "s2", 30, "crps"}, std::nullopt, ParseStatus::failed});
  t.add({{"a", "s2", 60, "crps"}, std::nullopt, ParseStatus::missing});
  t.add({{"a", "s3", 30, "crps"}, 2.0 / 3.0, ParseStatus::ok});
  t.add({{"a", "s1", 30, "brier_derived"}, 0.25, ParseStatus::ok});
  return t;
}

}  // namespace

TEST(ScoreTable, RejectsDuplicateKeysAndUnscoredOkRows) {
  auto t = sample_table();
  EXPECT_THROW(t.add({{"a", "s1", 30, "crps"}, 1.0, ParseStatus::ok}), FormatError);
  EXPECT_THROW(t.add({{"a", "s9", 30, "crps"}, std::nullopt, ParseStatus::ok}), FormatError);
  EXPECT_THROW(t.add({{"a", "s9", 30, "crps"}, NAN, ParseStatus::ok}), FormatError);
  ScoreTable other;
  other.add({{"b", "s1", 30, "crps"}, 9.0, ParseStatus::ok});
  EXPECT_THROW(t.merge(other), FormatError);
}

TEST(ScoreTable, RowsAreKeySorted) {
  const auto rows = sample_table().rows();
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k - 1].key, rows[k].key);
}

TEST(ScoreTable, MeansSkipUnscoredRows) {
  const auto t = sample_table();
  const auto means = t.model_means(30, "crps");
  ASSERT_EQ(means.size(), 2u);
  EXPECT_DOUBLE_EQ(means.at("a"), 0.5);
  EXPECT_DOUBLE_EQ(means.at("b"), 2.5);
  EXPECT_TRUE(t.model_means(60, "crps").empty());
  EXPECT_EQ(t.horizons(), (std::vector<int>{30, 60}));
  EXPECT_EQ(t.metrics(), (std::vector<std::string>{"brier_derived", "crps"}));
  EXPECT_EQ(t.models(), (std::vector<std::string>{"a", "b"}));
}

TEST(ScoreTable, CsvRoundTripIsLossless) {
  auto t = sample_table();
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 200; ++k) {
    t.add({{"c", "s" + std::to_string(k), 7, "crps"}, u(gen) * std::pow(10.0, k % 40 - 20),
           ParseStatus::ok});
  }
  t.add({{"model, with \"quotes\"", "s", 1, "crps"}, 5e-324, ParseStatus::ok});
  std::stringstream buf;
  t.write_csv(buf);
  const std::string first = buf.str();
  EXPECT_EQ(first.substr(0, first.find('\n')), "model,series,horizon,metric,score,parse_status");
  const auto back = ScoreTable::read_csv(buf);
  EXPECT_EQ(back, t);
  std::stringstream again;
  back.write_csv(again);
  EXPECT_EQ(again.str(), first);
}

TEST(ScoreTable, ReadRejectsMalformedRows) {
  std::stringstream short_row("model,series,horizon,metric,score,parse_status\na,s,1,crps,1\n");
  EXPECT_THROW(ScoreTable::read_csv(short_row), FormatError);
  std::stringstream bad_status("a,s,1,crps,1,great\n");
  EXPECT_THROW(ScoreTable::read_csv(bad_status), FormatError);
  std::stringstream bad_score("a,s,1,crps,x,ok\n");
  EXPECT_THROW(ScoreTable::read_csv(bad_score), FormatError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  for (double v : {1.0 / 3.0, 1e-300, 123456789.123, -0.0, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Panel, CsvRoundTripAndAlignment) {
  std::stringstream in(
      "model,provider,lineage,capability,included\n"
      "m1,p1,l1,120.5,1\n"
      "m2,p2,l2,130,0\n"
      "m3,p1,l1,140,true\n");
  const auto panel = ModelPanel::read_csv(in);
  ASSERT_EQ(panel.size(), 3u);
  EXPECT_FALSE(panel.find("m2")->included);
  std::stringstream out;
  panel.write_csv(out);
  EXPECT_EQ(ModelPanel::read_csv(out).models(), panel.models());

  const auto data = align_scores(panel, {{"m3", 1.0}, {"m2", 2.0}, {"m1", 3.0}, {"zz", 4.0}});
  EXPECT_EQ(data.ids, (std::vector<std::string>{"m1", "m3"}));
  EXPECT_EQ(data.scores, (std::vector<double>{3.0, 1.0}));
  EXPECT_EQ(data.capabilities, (std::vector<double>{120.5, 140}));
}

TEST(Panel, RejectsDuplicatesAndBadCapability) {
  std::stringstream dup("m1,p,l,1\nm1,p,l,2\n");
  EXPECT_THROW(ModelPanel::read_csv(dup), FormatError);
  std::stringstream nan("m1,p,l,nan\n");
  EXPECT_THROW(ModelPanel::read_csv(nan), FormatError);
}
