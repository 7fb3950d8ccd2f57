#include <gtest/gtest.h>

#include <cmath>

#include "cat/cat.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cat;
using namespace cat::reference;

namespace {

KeywordClassifier sentiment() { return KeywordClassifier({"positive", "negative"}, {{"good", {0, 0.9}}, {"bad", {1, 0.9}}}); }

const KeywordAttributeScorer kNoAttributes({});

HyperParams params(std::size_t budget) {
  HyperParams hp;
  hp.edit_budget = budget;
  return hp;
}

std::size_t count_kind(const std::vector<Candidate>& cs, EditKind k) {
  return static_cast<std::size_t>(
      std::count_if(cs.begin(), cs.end(), [&](const Candidate& c) { return c.path.back().kind == k; }));
}

}  // namespace

TEST(Expand, OneWordTextHasNoDeletes) {
  const auto f = sentiment();
  const fixture::ListFiller filler({{"bad", -1.0}, {"fine", -2.0}});
  const CandidateScorer scorer(tokenize("good"), f, kNoAttributes, HyperParams{});
  const auto out = expand(scorer.identity(), {0}, filler, 10, scorer, 1);
  EXPECT_EQ(count_kind(out, EditKind::remove), 0u);
  EXPECT_EQ(count_kind(out, EditKind::substitute), 2u);
}

TEST(Expand, CountsPerPosition) {
  const auto f = sentiment();
  const fixture::ListFiller filler({{"bad", -1.0}, {"fine", -2.0}});
  const CandidateScorer scorer(tokenize("the food is good"), f, kNoAttributes, HyperParams{});
  const auto out = expand(scorer.identity(), {2}, filler, 2, scorer, 1);
  EXPECT_GE(count_kind(out, EditKind::substitute), 2u);
  EXPECT_LE(count_kind(out, EditKind::insert), 4u);
  EXPECT_LE(count_kind(out, EditKind::remove), 1u);
  for (const auto& c : out) {
    EXPECT_EQ(apply_edits(scorer.input(), c.path), c.text);
    EXPECT_EQ(c.round, 1u);
  }
}

TEST(Expand, IdenticalTextsCollapse) {
  const auto f = sentiment();
  const fixture::ListFiller filler({{"a", -1.0}});
  // Inserting "a" before or after the existing "a" yields the same text.
  const CandidateScorer scorer(tokenize("x a y"), f, kNoAttributes, HyperParams{});
  const auto out = expand(scorer.identity(), {1}, filler, 5, scorer, 1);
  std::set<std::vector<std::string>> texts;
  for (const auto& c : out) EXPECT_TRUE(texts.insert(c.text.words).second);
  EXPECT_EQ(std::count_if(out.begin(), out.end(),
                          [](const Candidate& c) { return c.text.joined() == "x a a y"; }),
            1);
}

TEST(Search, SentimentExample) {
  const auto f = sentiment();
  const fixture::ListFiller filler({{"bad", -1.0}, {"fine", -1.5}});
  const auto r = search_contrast(tokenize("the food is good"), f, kNoAttributes, filler, AttributionMethod::occlusion,
                                 params(1));
  EXPECT_EQ(r.explanation.contrast.joined(), "the food is bad");
  EXPECT_NE(r.explanation.contrast_label(), r.explanation.input_label());
  EXPECT_EQ(r.explanation.objective.lev_raw, 1u);
  ASSERT_EQ(r.explanation.path.size(), 1u);
  EXPECT_EQ(r.explanation.path[0], Edit::substitute(3, "good", "bad"));
}

TEST(Search, SentimentExampleIsObjectiveMaximal) {
  const auto f = sentiment();
  const fixture::ListFiller filler({{"bad", -1.0}, {"fine", -1.5}});
  const auto x = tokenize("the food is good");
  const auto r = search_contrast(x, f, kNoAttributes, filler, AttributionMethod::occlusion, params(1));
  EXPECT_NEAR(r.explanation.objective.total,
              oracle::best_single_edit_flip(x, f, kNoAttributes, filler, {"bad", "fine"}, params(1)), 1e-12);
}

TEST(Search, ConstantClassifierNeverFlips) {
  const ConstantClassifier f({"a", "b"}, {0.7, 0.3});
  const fixture::ListFiller filler({{"x", -1.0}, {"y", -1.0}});
  for (std::size_t budget : {1u, 2u, 3u}) {
    try {
      search_contrast(tokenize("one two three"), f, kNoAttributes, filler, AttributionMethod::occlusion,
                      params(budget));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::no_contrast_found);
    }
  }
}

TEST(Search, OrthogonalBankStillFlips) {
  const auto f = sentiment();
  const KeywordAttributeScorer bank({{"weather", {{"rain", 0.9}}, 0.3}, {"time", {{"today", 0.2}}, 0.3}});
  const fixture::ListFiller filler({{"bad", -1.0}, {"today", -0.5}});
  const auto r =
      search_contrast(tokenize("the food is good"), f, bank, filler, AttributionMethod::occlusion, params(1));
  EXPECT_TRUE(r.explanation.attribute_changes.empty());
  EXPECT_NE(r.explanation.contrast_label(), r.explanation.input_label());
}

TEST(Search, EmptyInputRejected) {
  const auto f = sentiment();
  const fixture::ListFiller filler({{"bad", -1.0}});
  EXPECT_THROW(search_contrast(TokenizedText{}, f, kNoAttributes, filler, AttributionMethod::occlusion, params(1)),
               Error);
}

TEST(Search, MatchesExhaustiveSingleEditMaximum) {
  const auto w = fixture::make_world(101, 10, 25, 5);
  HyperParams hp = params(1);
  hp.beam_k = w.vocab.size() + 1;
  hp.top_positions = 6;
  std::size_t compared = 0;
  for (const auto& x : w.inputs) {
    const double best = oracle::best_single_edit_flip(x, *w.classifier, *w.bank, *w.filler, w.vocab, hp);
    try {
      const auto e = generate_contrast(x, *w.classifier, *w.bank, *w.filler, AttributionMethod::occlusion, hp);
      EXPECT_NEAR(e.objective.total, best, 1e-9) << x.joined();
      ++compared;
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::no_contrast_found);
      EXPECT_EQ(best, -INFINITY) << x.joined();
    }
  }
  EXPECT_GE(compared, 10u);
}

TEST(Search, ContractHoldsOnRandomWorlds) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto w = fixture::make_world(seed, 15, 15, 6);
    for (bool early : {true, false}) {
      HyperParams hp = params(3);
      hp.early_exit = early;
      hp.beam_k = 5;
      for (const auto& x : w.inputs) {
        try {
          const auto r = search_contrast(x, *w.classifier, *w.bank, *w.filler, AttributionMethod::occlusion, hp);
          const auto& e = r.explanation;
          EXPECT_NE(e.contrast_dist.argmax(), e.input_dist.argmax());
          EXPECT_EQ(w.classifier->classify(e.contrast), e.contrast_dist);
          EXPECT_EQ(apply_edits(x, e.path), e.contrast);
          EXPECT_GE(e.path.size(), 1u);
          EXPECT_LE(e.path.size(), hp.edit_budget);
          EXPECT_LE(e.objective.lev_raw, e.path.size());
          EXPECT_EQ(e.objective.lev_raw, word_levenshtein(x, e.contrast));
          EXPECT_NEAR(e.objective.total, e.objective.recompute(hp), 1e-12);
          EXPECT_EQ(e.attribute_changes,
                    attribute_deltas(w.bank->score_attributes(x), w.bank->score_attributes(e.contrast)));
          // The winner is at least as good as every other flip that was materialized.
          for (const auto& c : r.flipped) EXPECT_GE(e.objective.total, c.breakdown.total);
          if (early) {
            for (const auto& c : r.flipped) EXPECT_EQ(c.round, *r.stats.flip_round);
          }
        } catch (const Error& err) {
          EXPECT_EQ(err.code(), Errc::no_contrast_found);
        }
      }
    }
  }
}

TEST(Search, FullBudgetNeverWorseThanEarlyExit) {
  const auto w = fixture::make_world(77, 12, 20, 6);
  HyperParams early = params(3), full = params(3);
  full.early_exit = false;
  for (const auto& x : w.inputs) {
    try {
      const auto a = generate_contrast(x, *w.classifier, *w.bank, *w.filler, AttributionMethod::occlusion, early);
      const auto b = generate_contrast(x, *w.classifier, *w.bank, *w.filler, AttributionMethod::occlusion, full);
      EXPECT_GE(b.objective.total, a.objective.total);
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::no_contrast_found);
    }
  }
}

TEST(Search, Deterministic) {
  const auto w = fixture::make_world(5, 12, 8, 6);
  for (const auto& x : w.inputs) {
    std::optional<Explanation> first;
    for (int rep = 0; rep < 2; ++rep) {
      try {
        auto e = generate_contrast(x, *w.classifier, *w.bank, *w.filler, AttributionMethod::occlusion, params(2));
        if (first) {
          EXPECT_EQ(*first, e);
        }
        first = std::move(e);
      } catch (const Error&) {
      }
    }
  }
}

TEST(Search, IntegratedGradientsOnEmbeddingBag) {
  Dataset d;
  for (int i = 0; i < 80; ++i)
    d.push_back({std::string(i % 2 ? "rain" : "sun") + " over the " + (i % 3 ? "hills" : "sea"), i % 2 ? "wet" : "dry"});
  TrainConfig cfg;
  cfg.epochs = 40;
  const auto model = train_classifier(d, cfg);
  const fixture::ListFiller filler({{"rain", -1.0}, {"sun", -1.0}, {"hills", -2.0}});
  const auto r = search_contrast(tokenize("sun over the sea"), model, kNoAttributes, filler,
                                 AttributionMethod::integrated_gradients, params(2));
  EXPECT_FALSE(r.stats.attribution_fell_back);
  EXPECT_NE(r.explanation.contrast_label(), r.explanation.input_label());
}
