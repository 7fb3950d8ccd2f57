#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cat/cat.hpp"

using namespace cat;
using namespace cat::reference;

namespace {

// Closed-form two-sided p-value of Student's t with 3 degrees of freedom.
double p_value_df3(double t) {
  const double u = std::abs(t) / std::sqrt(3.0);
  return 1.0 - (2.0 / std::numbers::pi) * (u / (1.0 + u * u) + std::atan(u));
}

MetricRecord rec(std::string id, bool flip, std::optional<double> d = {}, std::optional<double> c = {},
                 std::optional<double> f = {}) {
  return {std::move(id), flip, d, c, f};
}

class FixedEmbedder final : public Embedder {
 public:
  std::vector<double> embed(const TokenizedText& x) const override {
    if (x.words[0] == "zero") return {0.0, 0.0};
    if (x.words[0] == "east") return {1.0, 0.0};
    if (x.words[0] == "north") return {0.0, 1.0};
    return {1.0, 1.0};
  }
  std::size_t dimension() const override { return 2; }
};

class FixedLoss final : public FluencyModel {
 public:
  double lm_loss(const TokenizedText& x) const override { return std::stod(x.words[0]); }
};

}  // namespace

TEST(FlipRate, Counting) {
  const std::vector<MetricRecord> r{rec("a", true), rec("b", true), rec("c", false)};
  EXPECT_DOUBLE_EQ(flip_rate(r), 2.0 / 3.0);
  const std::vector<MetricRecord> all{rec("a", true), rec("b", true)};
  EXPECT_EQ(flip_rate(all), 1.0);
  try {
    flip_rate(std::vector<MetricRecord>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_evaluation);
  }
}

TEST(Cosine, Examples) {
  const std::vector<double> a{1, 0}, b{1, 1}, c{0, 1}, z{0, 0};
  EXPECT_NEAR(cosine_similarity(a, b), 0.70711, 1e-5);
  EXPECT_EQ(cosine_similarity(a, c), 0.0);
  const std::vector<double> v{0.3, -1.7, 2.2};
  EXPECT_EQ(cosine_similarity(v, v), 1.0);
  try {
    cosine_similarity(a, z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_embedding);
  }
}

TEST(ContentPreservation, UsesEmbedder) {
  const FixedEmbedder e;
  EXPECT_EQ(content_preservation(e, tokenize("east x"), tokenize("east x")), 1.0);
  EXPECT_EQ(content_preservation(e, tokenize("east"), tokenize("north")), 0.0);
  EXPECT_THROW(content_preservation(e, tokenize("east"), tokenize("zero")), Error);
}

TEST(FluencyRatio, Examples) {
  const FixedLoss lm;
  EXPECT_EQ(fluency_ratio(lm, tokenize("2.0"), tokenize("2.0")), 1.0);
  EXPECT_NEAR(fluency_ratio(lm, tokenize("2.0"), tokenize("2.2")), 1.1, 1e-15);
  try {
    fluency_ratio(lm, tokenize("0"), tokenize("2.2"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_loss);
  }
}

TEST(Measure, IdentityContrastIsExact) {
  const HashedEmbedder e(32, 0);
  const BigramFluencyModel lm(NgramCounts::from_corpus({"the cat sat on the mat", "a dog ran"}));
  for (const char* s : {"the cat sat", "zebra crossing now", "a"}) {
    const auto x = tokenize(s);
    const auto m = measure({e, lm}, "id", x, x, false);
    EXPECT_EQ(*m.dist, 0.0);
    EXPECT_EQ(*m.cont, 1.0);
    EXPECT_EQ(*m.fluency, 1.0);
  }
}

TEST(Summarize, Examples) {
  const std::vector<double> same{0.37, 0.37, 0.37};
  const auto s = summarize(same);
  EXPECT_EQ(s.mean, 0.37);
  EXPECT_EQ(*s.stddev, 0.0);
  const std::vector<double> two{0.2, 0.4};
  const auto t = summarize(two);
  EXPECT_NEAR(t.mean, 0.3, 1e-15);
  EXPECT_NEAR(*t.stddev, 0.14142, 1e-5);
  const std::vector<double> one{0.5};
  EXPECT_FALSE(summarize(one).stddev.has_value());
}

TEST(Aggregate, FlipOverAllOthersOverProduced) {
  const std::vector<MetricRecord> r{rec("a", true, 0.2, 0.9, 1.0), rec("b", true, 0.4, 0.7, 1.2), rec("c", false)};
  const auto a = aggregate(r);
  EXPECT_EQ(a.instances, 3u);
  EXPECT_EQ(a.produced, 2u);
  EXPECT_DOUBLE_EQ(a.flip_rate, 2.0 / 3.0);
  EXPECT_NEAR(a.dist.mean, 0.3, 1e-15);
  EXPECT_NEAR(a.cont.mean, 0.8, 1e-15);
  EXPECT_NEAR(a.fluency.mean, 1.1, 1e-15);
}

TEST(PairedTTest, ReferenceFixture) {
  const std::vector<double> a{1, 2, 3, 4}, b{1.5, 1.5, 3.5, 4.5};
  const auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.t, -1.0, 1e-12);
  EXPECT_EQ(r.df, 3.0);
  EXPECT_NEAR(r.p, p_value_df3(-1.0), 1e-12);
  EXPECT_NEAR(r.p, 0.391, 1e-3);
}

TEST(PairedTTest, AgainstClosedFormDf3) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(4), b(4);
    for (int k = 0; k < 4; ++k) {
      a[k] = rng.normal();
      b[k] = rng.normal();
    }
    const auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.p, p_value_df3(r.t), 1e-10);
    EXPECT_GE(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
  }
}

TEST(PairedTTest, IdenticalAndDegenerateInputs) {
  const std::vector<double> a{0.1, 0.5, 0.9};
  const auto r = paired_t_test(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
  // Exactly representable so every difference is the same double.
  const std::vector<double> b{0.5, 1.0, 2.0}, shifted{0.75, 1.25, 2.25};
  const auto s = paired_t_test(shifted, b);
  EXPECT_TRUE(std::isinf(s.t) && s.t > 0);
  EXPECT_EQ(s.p, 0.0);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), Error);
}

TEST(WelchTTest, SymmetricCase) {
  // Equal sizes and variances: t = diff / sqrt(2 s^2 / n), df = 2(n-1).
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  const auto r = welch_t_test(a, b);
  EXPECT_NEAR(r.t, -1.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.df, 4.0, 1e-12);
  EXPECT_GT(r.p, 0.0);
  EXPECT_LT(r.p, 1.0);
}

TEST(Compare, IdenticalSidesGiveUnitP) {
  const std::vector<MetricRecord> a{rec("x", true, 0.2, 0.9, 1.0), rec("y", true, 0.3, 0.8, 1.1),
                                    rec("z", true, 0.5, 0.6, 0.9)};
  const auto rep = compare(a, a);
  ASSERT_EQ(rep.metrics.size(), 3u);
  for (const auto& m : rep.metrics) {
    EXPECT_EQ(m.test->p, 1.0);
    EXPECT_EQ(m.mean_a, m.mean_b);
  }
}

TEST(Compare, DirectionOfDifference) {
  std::vector<MetricRecord> a{rec("x", true, 0.2, 0.9, 1.0), rec("y", true, 0.3, 0.8, 1.1),
                              rec("z", true, 0.5, 0.6, 0.9)};
  std::vector<MetricRecord> b = a;
  for (auto& r : b) *r.dist += 0.1;
  std::reverse(b.begin(), b.end());  // pairing is by id, not position
  const auto rep = compare(a, b);
  EXPECT_EQ(rep.metrics[0].metric, "dist");
  EXPECT_NEAR(rep.metrics[0].mean_difference, -0.1, 1e-12);
  EXPECT_LT(rep.metrics[0].test->t, 0.0);
}

TEST(Compare, MismatchedIdsRejected) {
  const std::vector<MetricRecord> a{rec("x", true, 0.1, 1, 1), rec("y", true, 0.2, 1, 1)};
  const std::vector<MetricRecord> b{rec("x", true, 0.1, 1, 1), rec("q", true, 0.2, 1, 1)};
  try {
    compare(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unpaired_inputs);
  }
  EXPECT_THROW(compare(a, std::vector<MetricRecord>{rec("x", true)}), Error);
}
