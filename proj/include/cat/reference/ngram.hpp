#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/models.hpp"
#include "cat/text.hpp"

namespace cat::reference {

inline constexpr const char* kSentenceStart = "<s>";
inline constexpr const char* kSentenceEnd = "</s>";

// Unigram and boundary-padded bigram counts over a tokenized corpus.
struct NgramCounts {
  std::map<std::string, std::size_t> unigrams;  // words only
  std::map<std::string, std::map<std::string, std::size_t>> bigrams;
  std::map<std::string, std::size_t> context_totals;  // bigrams starting at each left word
  std::size_t tokens = 0;

  static NgramCounts from_corpus(const std::vector<std::string>& corpus) {
    NgramCounts c;
    for (const auto& line : corpus) {
      const TokenizedText t = tokenize(line);
      std::string prev = kSentenceStart;
      for (const auto& w : t.words) {
        ++c.unigrams[w];
        ++c.tokens;
        ++c.bigrams[prev][w];
        ++c.context_totals[prev];
        prev = w;
      }
      ++c.bigrams[prev][kSentenceEnd];
      ++c.context_totals[prev];
    }
    return c;
  }

  std::size_t types() const noexcept { return unigrams.size(); }

  std::size_t bigram(const std::string& u, const std::string& w) const {
    auto it = bigrams.find(u);
    if (it == bigrams.end()) return 0;
    auto jt = it->second.find(w);
    return jt == it->second.end() ? 0 : jt->second;
  }

  std::size_t context(const std::string& u) const {
    auto it = context_totals.find(u);
    return it == context_totals.end() ? 0 : it->second;
  }

  Json to_json(std::size_t order) const {
    Json j;
    j["type"] = "ngram";
    j["order"] = order;
    j["unigrams"] = unigrams;
    j["bigrams"] = bigrams;
    return j;
  }

  static NgramCounts from_json(const Json& j) {
    try {
      NgramCounts c;
      c.unigrams = j.at("unigrams").get<std::map<std::string, std::size_t>>();
      c.bigrams = j.at("bigrams").get<std::map<std::string, std::map<std::string, std::size_t>>>();
      for (const auto& [w, n] : c.unigrams) c.tokens += n;
      for (const auto& [u, row] : c.bigrams)
        for (const auto& [w, n] : row) c.context_totals[u] += n;
      return c;
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, std::string("ngram checkpoint: ") + e.what());
    }
  }
};

/// Whole-word mask filler over a corpus vocabulary. Order 1 scores a
/// candidate by log P(w | left neighbour); order 2 adds log P(right | w).
/// Both are add-one smoothed over the word types plus the end marker.
class NgramFiller final : public MaskFiller {
 public:
  NgramFiller(NgramCounts counts, std::size_t order) : counts_(std::move(counts)), order_(order) {
    if (order_ != 1 && order_ != 2) throw Error(Errc::config_error, "ngram filler order must be 1 or 2");
    for (const auto& [w, n] : counts_.unigrams) vocab_.push_back(w);
  }

  static NgramFiller build(const std::vector<std::string>& corpus, std::size_t order) {
    return {NgramCounts::from_corpus(corpus), order};
  }

  std::vector<FillProposal> propose_fills(const TokenizedText& x, FillSite site, std::size_t k,
                                          const WordSet& forbid) const override {
    check_fill_site(x, site);
    if (k == 0) return {};
    const std::size_t n = x.size();
    const std::size_t left_idx = site.position;  // words before the site: [0, position)
    const std::string& left = left_idx > 0 ? x.words[left_idx - 1] : std::string(kSentenceStart);
    const std::size_t right_idx = site.mode == EditKind::substitute ? site.position + 1 : site.position;
    const std::string& right = right_idx < n ? x.words[right_idx] : std::string(kSentenceEnd);

    std::vector<FillProposal> out;
    out.reserve(vocab_.size());
    for (const auto& w : vocab_) {
      if (forbid.count(w)) continue;
      double s = log_cond(left, w);
      if (order_ == 2) s += log_cond(w, right);
      out.push_back({w, s});
    }
    std::sort(out.begin(), out.end(), fill_order);
    if (out.size() > k) out.resize(k);
    return out;
  }

  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  std::size_t order() const noexcept { return order_; }
  Json to_json() const { return counts_.to_json(order_); }

  static NgramFiller from_json(const Json& j) {
    return {NgramCounts::from_json(j), j.value("order", std::size_t{2})};
  }

 private:
  double log_cond(const std::string& u, const std::string& w) const {
    const double outcomes = static_cast<double>(counts_.types() + 1);
    return std::log((static_cast<double>(counts_.bigram(u, w)) + 1.0) /
                    (static_cast<double>(counts_.context(u)) + outcomes));
  }

  NgramCounts counts_;
  std::size_t order_;
  std::vector<std::string> vocab_;  // sorted
};

/// Unigram fluency model over explicit word probabilities; unknown words get
/// `unknown_probability`.
class UnigramFluencyModel final : public FluencyModel {
 public:
  UnigramFluencyModel(std::map<std::string, double> probs, double unknown_probability)
      : probs_(std::move(probs)), unknown_(unknown_probability) {
    if (!(unknown_ > 0.0)) throw Error(Errc::config_error, "unknown-word probability must be positive");
  }

  // Add-one smoothed estimate with one extra slot for unseen words.
  static UnigramFluencyModel from_counts(const NgramCounts& c) {
    const double denom = static_cast<double>(c.tokens + c.types() + 1);
    std::map<std::string, double> p;
    for (const auto& [w, n] : c.unigrams) p[w] = (static_cast<double>(n) + 1.0) / denom;
    return {std::move(p), 1.0 / denom};
  }

  double lm_loss(const TokenizedText& x) const override {
    if (x.empty()) throw Error(Errc::empty_text, "lm_loss needs a non-empty text");
    double nll = 0.0;
    for (const auto& w : x.words) {
      auto it = probs_.find(w);
      nll -= std::log(it == probs_.end() ? unknown_ : it->second);
    }
    return nll / static_cast<double>(x.size());
  }

 private:
  std::map<std::string, double> probs_;
  double unknown_;
};

/// Add-one smoothed bigram model with a sentence-start context.
class BigramFluencyModel final : public FluencyModel {
 public:
  explicit BigramFluencyModel(NgramCounts counts) : counts_(std::move(counts)) {}

  double lm_loss(const TokenizedText& x) const override {
    if (x.empty()) throw Error(Errc::empty_text, "lm_loss needs a non-empty text");
    const double outcomes = static_cast<double>(counts_.types() + 2);  // words, unknown, end marker
    double nll = 0.0;
    std::string prev = kSentenceStart;
    for (const auto& w : x.words) {
      nll -= std::log((static_cast<double>(counts_.bigram(prev, w)) + 1.0) /
                      (static_cast<double>(counts_.context(prev)) + outcomes));
      prev = w;
    }
    return nll / static_cast<double>(x.size());
  }

 private:
  NgramCounts counts_;
};

}  // namespace cat::reference
