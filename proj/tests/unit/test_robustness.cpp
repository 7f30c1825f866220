#include <gtest/gtest.h>

#include <cmath>

#include "tailcal/error.hpp"
#include "tailcal/robustness.hpp"

using namespace tailcal;

namespace {

PanelScores make(std::vector<std::string> providers, std::vector<std::string> lineages,
                 std::vector<double> caps, std::vector<double> scores) {
  PanelScores d;
  for (std::size_t k = 0; k < caps.size(); ++k) d.ids.push_back("m" + std::to_string(k));
  d.providers = std::move(providers);
  d.lineages = std::move(lineages);
  d.capabilities = std::move(caps);
  d.scores = std::move(scores);
  return d;
}

PanelScores singleton_lineages(std::vector<std::string> providers, std::vector<double> caps,
                               std::vector<double> scores) {
  std::vector<std::string> lineages;
  for (std::size_t k = 0; k < caps.size(); ++k) lineages.push_back("l" + std::to_string(k));
  return make(std::move(providers), std::move(lineages), std::move(caps), std::move(scores));
}

}  // namespace

TEST(Lopo, SingleProviderThrows) {
  const auto d = singleton_lineages({"a", "a", "a"}, {1, 2, 3}, {1, 2, 3});
  EXPECT_THROW(lopo(d, Orientation::higher_better), StatsError);
}

TEST(Lopo, OneEntryPerProvider) {
  std::vector<std::string> prov;
  std::vector<double> cap, score;
  for (int k = 0; k < 14; ++k) {
    prov.push_back("p" + std::to_string(k % 7));
    cap.push_back(k);
    score.push_back(k % 5);
  }
  const auto entries = lopo(singleton_lineages(prov, cap, score), Orientation::higher_better);
  ASSERT_EQ(entries.size(), 7u);
  for (const auto& e : entries) {
    EXPECT_EQ(e.n_remaining, 12u);
    ASSERT_TRUE(e.result.has_value());
    EXPECT_TRUE(e.result->p_value.has_value());
  }
}

TEST(Lopo, DominantProviderMovesRhoMost) {
  const auto d = singleton_lineages({"x", "y", "z", "x", "y", "z", "h", "h", "h"},
                                    {1, 2, 3, 4, 5, 6, 7, 8, 9}, {3, 1, 6, 2, 5, 4, 10, 11, 12});
  const double full = spearman_signed(d.capabilities, d.scores, Orientation::higher_better);
  const auto entries = lopo(d, Orientation::higher_better);
  std::string biggest;
  double shift = -1;
  for (const auto& e : entries) {
    const double s = std::abs(e.result->rho - full);
    if (s > shift) {
      shift = s;
      biggest = e.dropped_provider;
    }
  }
  EXPECT_EQ(biggest, "h");
}

TEST(Lopo, FlagsUndersizedDrops) {
  const auto d = singleton_lineages({"a", "a", "b", "b"}, {1, 2, 3, 4}, {1, 2, 3, 4});
  const auto entries = lopo(d, Orientation::higher_better);
  ASSERT_EQ(entries.size(), 2u);
  for (const auto& e : entries) {
    EXPECT_FALSE(e.result.has_value());
    EXPECT_FALSE(e.flag.empty());
  }
}

TEST(Lineage, SingletonsMatchFullPanel) {
  const auto d = singleton_lineages({"a", "b", "c", "d", "e"}, {1, 2, 3, 4, 5}, {5, 3, 4, 1, 2});
  const double full = spearman_signed(d.capabilities, d.scores, Orientation::lower_better);
  EXPECT_DOUBLE_EQ(lineage_collapse(d, Orientation::lower_better, LineagePolicy::max_capability).rho, full);
  EXPECT_DOUBLE_EQ(lineage_collapse(d, Orientation::lower_better, LineagePolicy::min_capability).rho, full);
  const auto draws = lineage_collapse_random(d, Orientation::lower_better, 50, 1);
  for (double r : draws.rhos) EXPECT_DOUBLE_EQ(r, full);
}

TEST(Lineage, MaxAndMinPickExpectedRepresentatives) {
  // Lineage L1: caps 1, 5; L2: 2, 6; L3: 3, 7; L4: 4, 8.
  const auto d = make({"p", "p", "p", "p", "p", "p", "p", "p"},
                      {"L1", "L2", "L3", "L4", "L1", "L2", "L3", "L4"}, {1, 2, 3, 4, 5, 6, 7, 8},
                      {1, 2, 3, 4, 8, 7, 6, 5});
  EXPECT_DOUBLE_EQ(lineage_collapse(d, Orientation::higher_better, LineagePolicy::min_capability).rho, 1.0);
  EXPECT_DOUBLE_EQ(lineage_collapse(d, Orientation::higher_better, LineagePolicy::max_capability).rho, -1.0);
  EXPECT_THROW(lineage_collapse(d, Orientation::higher_better, LineagePolicy::random), StatsError);
}

TEST(Lineage, RandomDrawsDeterministicAndMonotone) {
  const auto d = make({"p", "p", "p", "p", "p", "p"}, {"A", "A", "B", "B", "C", "C"},
                      {1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6});
  const auto a = lineage_collapse_random(d, Orientation::higher_better, 500, 9);
  const auto b = lineage_collapse_random(d, Orientation::higher_better, 500, 9);
  EXPECT_EQ(a.rhos, b.rhos);
  EXPECT_EQ(a.lineages, 3u);
  EXPECT_EQ(a.fraction_negative, 0.0);
  EXPECT_EQ(a.median, 1.0);
}

TEST(Lineage, MissingLineageThrows) {
  const auto d = make({"p", "p", "p"}, {"A", "", "B"}, {1, 2, 3}, {1, 2, 3});
  EXPECT_THROW(lineage_collapse(d, Orientation::higher_better, LineagePolicy::max_capability), StatsError);
  EXPECT_EQ(parse_lineage_policy("max"), LineagePolicy::max_capability);
}

TEST(Partial, SingleProviderEqualsSpearman) {
  const auto d = singleton_lineages({"a", "a", "a", "a", "a"}, {1, 2, 3, 4, 5}, {2, 1, 4, 5, 3});
  EXPECT_NEAR(provider_partial_rho(d, Orientation::higher_better),
              spearman_signed(d.capabilities, d.scores, Orientation::higher_better), 1e-12);
}

TEST(Partial, OrthogonalProviderLeavesRhoAlone) {
  // Both providers hold the same mean capability rank and mean score rank.
  const auto d = singleton_lineages({"A", "B", "B", "A", "A", "B", "B", "A"},
                                    {1, 2, 3, 4, 5, 6, 7, 8}, {2, 1, 4, 3, 6, 5, 8, 7});
  const double plain = spearman_signed(d.capabilities, d.scores, Orientation::higher_better);
  EXPECT_LE(std::abs(provider_partial_rho(d, Orientation::higher_better) - plain), 0.02);
}

TEST(Partial, ProviderExplainsScore) {
  const auto d = singleton_lineages({"A", "B", "A", "B", "A", "B"}, {1, 2, 3, 4, 5, 6}, {1, 9, 1, 9, 1, 9});
  EXPECT_EQ(provider_partial_rho(d, Orientation::higher_better), 0.0);
}

TEST(Partial, Errors) {
  const auto small = singleton_lineages({"A", "B", "C"}, {1, 2, 3}, {1, 2, 3});
  EXPECT_THROW(provider_partial_rho(small, Orientation::higher_better), StatsError);
  const auto confounded = singleton_lineages({"A", "A", "B", "B"}, {1, 1, 2, 2}, {1, 2, 3, 4});
  EXPECT_THROW(provider_partial_rho(confounded, Orientation::higher_better), StatsError);
}
