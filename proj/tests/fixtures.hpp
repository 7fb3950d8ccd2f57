#pragma once

// Small generated worlds shared by the unit and acceptance suites.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cat/cat.hpp"

namespace fixture {

// Proposes every vocabulary word with a fixed score, independent of context.
class ListFiller final : public cat::MaskFiller {
 public:
  explicit ListFiller(std::map<std::string, double> scores) : scores_(std::move(scores)) {}

  std::vector<cat::FillProposal> propose_fills(const cat::TokenizedText& x, cat::FillSite site, std::size_t k,
                                               const cat::WordSet& forbid) const override {
    cat::check_fill_site(x, site);
    std::vector<cat::FillProposal> out;
    for (const auto& [w, s] : scores_)
      if (!forbid.count(w)) out.push_back({w, s});
    std::sort(out.begin(), out.end(), cat::fill_order);
    if (out.size() > k) out.resize(k);
    return out;
  }

 private:
  std::map<std::string, double> scores_;
};

// Random keyword classifier, keyword attribute bank and bigram filler over a
// small vocabulary, plus random sentences from it.
struct World {
  std::vector<std::string> vocab;
  std::unique_ptr<cat::reference::KeywordClassifier> classifier;
  std::unique_ptr<cat::reference::KeywordAttributeScorer> bank;
  std::unique_ptr<cat::reference::NgramFiller> filler;
  std::vector<cat::TokenizedText> inputs;
};

inline World make_world(std::uint64_t seed, std::size_t vocab_size, std::size_t instances, std::size_t max_len) {
  cat::Rng rng(seed);
  World w;
  for (std::size_t i = 0; i < vocab_size; ++i) w.vocab.push_back("w" + std::to_string(i));

  const std::vector<std::string> labels{"red", "green", "blue"};
  std::map<std::string, cat::reference::KeywordClassifier::Rule> rules;
  for (const auto& v : w.vocab)
    if (rng.uniform() < 0.5) rules[v] = {rng.below(labels.size()), rng.uniform(0.5, 0.95)};
  w.classifier = std::make_unique<cat::reference::KeywordClassifier>(labels, rules);

  std::vector<cat::reference::KeywordAttributeScorer::Attribute> attrs;
  for (int a = 0; a < 3; ++a) {
    cat::reference::KeywordAttributeScorer::Attribute at{"topic" + std::to_string(a), {}, a == 2 ? 0.05 : 0.3};
    for (const auto& v : w.vocab)
      if (rng.uniform() < 0.25) at.keywords[v] = rng.uniform(0.05, 0.9);
    attrs.push_back(std::move(at));
  }
  w.bank = std::make_unique<cat::reference::KeywordAttributeScorer>(std::move(attrs));

  auto sentence = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::string> s(lo + rng.below(hi - lo + 1));
    for (auto& t : s) t = w.vocab[rng.below(w.vocab.size())];
    return s;
  };
  std::vector<std::string> corpus;
  for (int i = 0; i < 60; ++i) corpus.push_back(cat::from_words(sentence(2, 7)).joined());
  for (const auto& v : w.vocab) corpus.push_back(v);  // every word is in the filler vocabulary
  w.filler = std::make_unique<cat::reference::NgramFiller>(cat::reference::NgramFiller::build(corpus, 2));

  for (std::size_t i = 0; i < instances; ++i) w.inputs.push_back(cat::from_words(sentence(1, max_len)));
  return w;
}

}  // namespace fixture
