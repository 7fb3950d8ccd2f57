#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cat/attribution.hpp"
#include "cat/error.hpp"
#include "cat/explanation.hpp"
#include "cat/models.hpp"
#include "cat/objective.hpp"
#include "cat/text.hpp"

namespace cat {

struct Candidate {
  TokenizedText text;
  EditPath path;
  std::vector<double> fill_scores;  // parallel to path; 0 for deletions
  ClassDistribution dist;
  AttributeScoreVector attributes;
  ObjectiveBreakdown breakdown;
  bool flipped = false;
  std::size_t round = 0;
};

namespace detail {

inline std::string path_key(const EditPath& p) {
  std::string k;
  for (const auto& e : p) {
    k += edit_kind_name(e.kind);
    k += '@' + std::to_string(e.position) + ':' + e.old_word.value_or("") + '>' + e.new_word.value_or("") + ';';
  }
  return k;
}

}  // namespace detail

// Beam order: higher total, then fewer word edits, then text, then path.
// Value-based throughout so the result never depends on arrival order.
inline bool beam_order(const Candidate& a, const Candidate& b) {
  if (a.breakdown.total != b.breakdown.total) return a.breakdown.total > b.breakdown.total;
  if (a.breakdown.lev_raw != b.breakdown.lev_raw) return a.breakdown.lev_raw < b.breakdown.lev_raw;
  if (a.text.words != b.text.words) return a.text.words < b.text.words;
  if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
  return detail::path_key(a.path) < detail::path_key(b.path);
}

// Final pick among flips: higher total, then fewer edits, then beam order.
inline bool contrast_order(const Candidate& a, const Candidate& b) {
  if (a.breakdown.total != b.breakdown.total) return a.breakdown.total > b.breakdown.total;
  if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
  return beam_order(a, b);
}

/// Everything about the original input that candidate scoring needs; every
/// candidate is scored against the original text, never the previous round.
class CandidateScorer {
 public:
  CandidateScorer(TokenizedText x, const Classifier& f, const AttributeScorer& bank, const HyperParams& params)
      : x_(std::move(x)), f_(f), bank_(bank), params_(params), fx_(f.classify(x_)), zx_(bank.score_attributes(x_)) {
    y_ = fx_.argmax();
  }

  const TokenizedText& input() const noexcept { return x_; }
  const ClassDistribution& input_dist() const noexcept { return fx_; }
  const AttributeScoreVector& input_attributes() const noexcept { return zx_; }
  std::size_t label() const noexcept { return y_; }
  const HyperParams& params() const noexcept { return params_; }

  Candidate identity() const {
    Candidate c;
    c.text = x_;
    c.dist = fx_;
    c.attributes = zx_;
    c.breakdown = cat_objective(x_, x_, c.path, c.fill_scores, fx_, fx_, zx_, zx_, params_);
    c.flipped = false;
    return c;
  }

  Candidate score(TokenizedText text, EditPath path, std::vector<double> fill_scores, std::size_t round) const {
    Candidate c;
    c.dist = f_.classify(text);
    c.attributes = bank_.score_attributes(text);
    c.breakdown = cat_objective(x_, text, path, fill_scores, fx_, c.dist, zx_, c.attributes, params_);
    c.flipped = c.dist.argmax() != y_;
    c.text = std::move(text);
    c.path = std::move(path);
    c.fill_scores = std::move(fill_scores);
    c.round = round;
    return c;
  }

 private:
  TokenizedText x_;
  const Classifier& f_;
  const AttributeScorer& bank_;
  HyperParams params_;
  ClassDistribution fx_;
  AttributeScoreVector zx_;
  std::size_t y_ = 0;
};

namespace detail {

// Keeps the better candidate per distinct text.
class CandidatePool {
 public:
  void offer(Candidate c) {
    auto it = by_text_.find(c.text.words);
    if (it == by_text_.end()) {
      by_text_.emplace(c.text.words, std::move(c));
    } else if (beam_order(c, it->second)) {
      it->second = std::move(c);
    }
  }

  std::vector<Candidate> take_sorted() {
    std::vector<Candidate> out;
    out.reserve(by_text_.size());
    for (auto& [k, c] : by_text_) out.push_back(std::move(c));
    by_text_.clear();
    std::sort(out.begin(), out.end(), beam_order);
    return out;
  }

  std::size_t size() const noexcept { return by_text_.size(); }

 private:
  std::map<std::vector<std::string>, Candidate> by_text_;
};

}  // namespace detail

/// One-edit neighbours of `cand` around the important positions: filler
/// substitutes at p (never the current word), filler inserts at gaps p and
/// p+1, and a deletion of p when the text has more than one word. Identical
/// texts collapse to the higher-scoring candidate.
inline std::vector<Candidate> expand(const Candidate& cand, const std::vector<std::size_t>& positions,
                                     const MaskFiller& filler, std::size_t k, const CandidateScorer& scorer,
                                     std::size_t round) {
  const std::size_t n = cand.text.size();
  for (std::size_t p : positions)
    if (p >= n) throw Error(Errc::invalid_edit, "expansion position out of bounds");

  detail::CandidatePool pool;
  auto extend = [&](Edit e, double fill) {
    EditPath path = cand.path;
    std::vector<double> scores = cand.fill_scores;
    std::vector<std::string> words = cand.text.words;
    apply_edit_in_place(words, e);
    path.push_back(std::move(e));
    scores.push_back(fill);
    pool.offer(scorer.score(from_words(std::move(words)), std::move(path), std::move(scores), round));
  };

  std::set<std::size_t> gaps;
  for (std::size_t p : positions) {
    gaps.insert(p);
    gaps.insert(p + 1);
  }
  for (std::size_t p : positions) {
    const std::string& current = cand.text.words[p];
    for (const auto& fp : filler.propose_fills(cand.text, {EditKind::substitute, p}, k, {current}))
      if (fp.word != current) extend(Edit::substitute(p, current, fp.word), fp.lm_score);
  }
  for (std::size_t g : gaps)
    for (const auto& fp : filler.propose_fills(cand.text, {EditKind::insert, g}, k, {}))
      extend(Edit::insert(g, fp.word), fp.lm_score);
  if (n > 1)
    for (std::size_t p : positions) extend(Edit::remove(p, cand.text.words[p]), 0.0);

  return pool.take_sorted();
}

struct SearchStats {
  std::size_t rounds = 0;
  std::size_t candidates_scored = 0;
  bool attribution_fell_back = false;
  std::optional<std::size_t> flip_round;
};

struct SearchResult {
  Explanation explanation;
  Candidate best;
  SearchStats stats;
  std::vector<Candidate> flipped;  // every flipped candidate materialized
};

/// Attribution-guided beam search over word edits. Raises NoContrastFound
/// when no candidate within the edit budget changes the predicted class.
inline SearchResult search_contrast(const TokenizedText& x, const Classifier& f, const AttributeScorer& bank,
                                    const MaskFiller& filler, AttributionMethod method, const HyperParams& params) {
  params.validate();
  if (x.empty()) throw Error(Errc::empty_text, "cannot explain an empty text");
  const CandidateScorer scorer(x, f, bank, params);
  const std::size_t y = scorer.label();

  SearchResult result;
  std::vector<Candidate> beam{scorer.identity()};
  std::optional<Candidate> best;

  for (std::size_t round = 1; round <= params.edit_budget; ++round) {
    detail::CandidatePool pool;
    for (const auto& member : beam) {
      const auto attr = attribute(member.text, f, y, method, params.ig_steps);
      result.stats.attribution_fell_back |= attr.fell_back;
      const auto positions = rank_positions(attr.attribution, params.top_positions);
      for (auto& c : expand(member, positions, filler, params.beam_k, scorer, round)) pool.offer(std::move(c));
    }
    result.stats.rounds = round;
    if (pool.size() == 0) break;
    std::vector<Candidate> ranked = pool.take_sorted();
    result.stats.candidates_scored += ranked.size();

    std::optional<Candidate> round_best;
    for (const auto& c : ranked) {
      if (!c.flipped) continue;
      result.flipped.push_back(c);
      if (!round_best || contrast_order(c, *round_best)) round_best = c;
    }
    if (round_best) {
      if (!result.stats.flip_round) result.stats.flip_round = round;
      if (!best || contrast_order(*round_best, *best)) best = std::move(round_best);
      if (params.early_exit) break;
    }
    if (ranked.size() > params.beam_k) ranked.resize(params.beam_k);
    beam = std::move(ranked);
  }

  if (!best)
    throw Error(Errc::no_contrast_found,
                "no prediction flip within " + std::to_string(params.edit_budget) + " edit(s)");

  Explanation& e = result.explanation;
  e.input = x;
  e.input_dist = scorer.input_dist();
  e.contrast = best->text;
  e.contrast_dist = best->dist;
  e.path = best->path;
  e.attribute_changes = attribute_deltas(scorer.input_attributes(), best->attributes);
  e.objective = best->breakdown;
  result.best = std::move(*best);
  return result;
}

inline Explanation generate_contrast(const TokenizedText& x, const Classifier& f, const AttributeScorer& bank,
                                     const MaskFiller& filler, AttributionMethod method, const HyperParams& params) {
  return search_contrast(x, f, bank, filler, method, params).explanation;
}

}  // namespace cat
