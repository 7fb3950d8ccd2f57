#include <gtest/gtest.h>

#include "cat/cat.hpp"
#include "oracles.hpp"

using namespace cat;

namespace {

AttributeScoreVector bank(std::vector<double> scores, std::vector<double> taus) {
  AttributeScoreVector z;
  z.scores = std::move(scores);
  z.thresholds = std::move(taus);
  for (std::size_t i = 0; i < z.scores.size(); ++i) z.names.push_back("attr" + std::to_string(i));
  return z;
}

ClassDistribution dist(std::vector<double> p) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < p.size(); ++i) labels.push_back("c" + std::to_string(i));
  return {std::move(p), std::move(labels)};
}

}  // namespace

TEST(AttributeDeltas, Examples) {
  auto d = attribute_deltas(bank({0.2}, {0.3}), bank({0.55}, {0.3}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].direction, AttributeDirection::added);
  EXPECT_NEAR(d[0].delta, 0.35, 1e-15);

  EXPECT_TRUE(attribute_deltas(bank({0.1, 0.7}, {0.3, 0.05}), bank({0.1, 0.7}, {0.3, 0.05})).empty());

  d = attribute_deltas(bank({0.5}, {0.05}), bank({0.44}, {0.05}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].direction, AttributeDirection::removed);
}

TEST(AttributeDeltas, MismatchedBanksThrow) {
  try {
    attribute_deltas(bank({0.1}, {0.3}), bank({0.1, 0.2}, {0.3, 0.3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::mismatched_banks);
  }
}

TEST(ContrastGain, Examples) {
  EXPECT_EQ(contrast_gain(dist({1, 0}), dist({1, 0}), 0), -1.0);
  EXPECT_NEAR(contrast_gain(dist({0.8, 0.2}), dist({0.3, 0.7}), 0), -0.1, 1e-15);
  EXPECT_EQ(contrast_gain(dist({0.5, 0.5}), dist({0.5, 0.5}), 0), 0.0);
}

TEST(LmSurrogate, MeansFilledWords) {
  EXPECT_EQ(lm_surrogate({}, {}), 0.0);
  const EditPath one{Edit::substitute(0, "a", "b")};
  const std::vector<double> s1{0.4};
  EXPECT_EQ(lm_surrogate(one, s1), 0.4);
  const EditPath three{Edit::substitute(0, "a", "b"), Edit::insert(1, "c"), Edit::remove(0, "b")};
  const std::vector<double> s3{0.4, 0.2, -9.0};
  EXPECT_NEAR(lm_surrogate(three, s3), 0.3, 1e-15);
  const std::vector<double> wrong{0.4, 0.2};
  EXPECT_THROW(lm_surrogate(three, wrong), Error);
}

TEST(CatObjective, IdentityCandidate) {
  const auto x = tokenize("a b c");
  const auto z = bank({0.4, 0.6}, {0.3, 0.3});
  const HyperParams hp;
  const auto b = cat_objective(x, x, {}, {}, dist({0.9, 0.1}), dist({0.9, 0.1}), z, z, hp);
  EXPECT_EQ(b.attr_linf, 0.0);
  EXPECT_EQ(b.attr_changed_count, 0u);
  EXPECT_NEAR(b.contrast_gain, -0.8, 1e-15);
  EXPECT_EQ(b.lm_surrogate, 0.0);
  EXPECT_EQ(b.lev_raw, 0u);
  EXPECT_NEAR(b.total, -4.0, 1e-14);
}

TEST(CatObjective, HandDerivedExample) {
  const auto x = tokenize("a b c");
  const auto xp = tokenize("a z c");
  const EditPath path{Edit::substitute(1, "b", "z")};
  const std::vector<double> fill{0.4};
  const HyperParams hp;  // lambda 5, beta 3, eta 1, nu 2
  const auto b = cat_objective(x, xp, path, fill, dist({0.8, 0.2}), dist({0.3, 0.7}), bank({0.1, 0.5}, {0.3, 0.3}),
                               bank({0.6, 0.5}, {0.3, 0.3}), hp);
  EXPECT_EQ(b.attr_linf, 0.5);
  EXPECT_EQ(b.attr_changed_count, 1u);
  EXPECT_EQ(b.lev_raw, 1u);
  EXPECT_NEAR(b.total, -4.6, 1e-12);
  EXPECT_EQ(b.total, oracle::objective_total(0.5, 1, 0.7 - 0.8, 0.4, 1, 5, 3, 1, 2));
}

TEST(CatObjective, SubThresholdDelta) {
  const auto x = tokenize("a b");
  const auto b = cat_objective(x, x, {}, {}, dist({0.6, 0.4}), dist({0.6, 0.4}), bank({0.1}, {0.3}), bank({0.3}, {0.3}),
                               HyperParams{});
  EXPECT_NEAR(b.attr_linf, 0.2, 1e-15);
  EXPECT_EQ(b.attr_changed_count, 0u);
}

TEST(CatObjective, TotalReconstructsFromParts) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    ObjectiveBreakdown b;
    b.attr_linf = rng.uniform();
    b.attr_changed_count = rng.below(6);
    b.contrast_gain = rng.uniform(-1, 1);
    b.lm_surrogate = rng.uniform(-12, 0);
    b.lev_raw = rng.below(5);
    HyperParams hp;
    hp.lambda = rng.uniform(4, 10);
    hp.beta = rng.uniform(1, 5);
    hp.eta = rng.uniform(0.5, 2);
    hp.nu = rng.uniform(1, 4);
    hp.validate_search_ranges();
    EXPECT_NEAR(b.recompute(hp),
                oracle::objective_total(b.attr_linf, static_cast<double>(b.attr_changed_count), b.contrast_gain,
                                        b.lm_surrogate, static_cast<double>(b.lev_raw), hp.lambda, hp.beta, hp.eta,
                                        hp.nu),
                1e-12);
  }
}

TEST(HyperParams, DefaultsAndRanges) {
  const HyperParams hp;
  EXPECT_EQ(hp.lambda, 5.0);
  EXPECT_EQ(hp.beta, 3.0);
  EXPECT_EQ(hp.eta, 1.0);
  EXPECT_EQ(hp.nu, 2.0);
  EXPECT_NO_THROW(hp.validate_search_ranges());
  HyperParams bad = hp;
  bad.lambda = 11;
  EXPECT_THROW(bad.validate_search_ranges(), Error);
  bad = hp;
  bad.beam_k = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = hp;
  bad.nu = -1;
  EXPECT_THROW(bad.validate(), Error);
}
