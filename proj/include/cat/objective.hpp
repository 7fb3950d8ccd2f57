#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cat/error.hpp"
#include "cat/models.hpp"
#include "cat/text.hpp"

namespace cat {

struct HyperParams {
  double lambda = 5.0;  // contrast gain weight
  double beta = 3.0;    // penalty per changed attribute
  double eta = 1.0;     // fluency surrogate weight
  double nu = 2.0;      // penalty per word edit
  std::size_t beam_k = 10;
  std::size_t edit_budget = 3;
  std::size_t top_positions = 5;
  std::size_t ig_steps = 64;
  std::uint64_t seed = 0;
  bool early_exit = true;

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(Errc::config_error, std::string(name) + " must be a finite non-negative number");
    };
    nonneg(lambda, "lambda");
    nonneg(beta, "beta");
    nonneg(eta, "eta");
    nonneg(nu, "nu");
    if (beam_k == 0 || edit_budget == 0 || top_positions == 0 || ig_steps == 0)
      throw Error(Errc::config_error, "beam_k, edit_budget, top_positions and ig_steps must be positive");
  }

  // Bounds of the weight sweep used when tuning.
  void validate_search_ranges() const {
    auto in = [](double v, double lo, double hi, const char* name) {
      if (v < lo || v > hi)
        throw Error(Errc::config_error, std::string(name) + " outside its tuning range [" + std::to_string(lo) +
                                            ", " + std::to_string(hi) + "]");
    };
    in(lambda, 4.0, 10.0, "lambda");
    in(beta, 1.0, 5.0, "beta");
    in(eta, 0.5, 2.0, "eta");
    in(nu, 1.0, 4.0, "nu");
  }
};

struct ObjectiveBreakdown {
  double attr_linf = 0.0;
  std::size_t attr_changed_count = 0;
  double contrast_gain = 0.0;
  double lm_surrogate = 0.0;
  std::size_t lev_raw = 0;
  double total = 0.0;

  double recompute(const HyperParams& p) const {
    return attr_linf - p.beta * static_cast<double>(attr_changed_count) + p.lambda * contrast_gain +
           p.eta * lm_surrogate - p.nu * static_cast<double>(lev_raw);
  }

  friend bool operator==(const ObjectiveBreakdown&, const ObjectiveBreakdown&) = default;
};

enum class AttributeDirection { added, removed };

struct AttributeDelta {
  std::string name;
  AttributeDirection direction = AttributeDirection::added;
  double delta = 0.0;

  friend bool operator==(const AttributeDelta&, const AttributeDelta&) = default;
};

namespace detail {

inline void check_same_bank(const AttributeScoreVector& a, const AttributeScoreVector& b) {
  if (a.names != b.names || a.thresholds != b.thresholds || a.scores.size() != b.scores.size())
    throw Error(Errc::mismatched_banks, "attribute vectors come from different banks");
}

}  // namespace detail

// Strict inequality on both sides: a delta of exactly +-tau is not a change.
inline std::vector<AttributeDelta> attribute_deltas(const AttributeScoreVector& before,
                                                    const AttributeScoreVector& after) {
  detail::check_same_bank(before, after);
  std::vector<AttributeDelta> out;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const double d = after.scores[i] - before.scores[i];
    if (d > before.thresholds[i])
      out.push_back({before.names[i], AttributeDirection::added, d});
    else if (d < -before.thresholds[i])
      out.push_back({before.names[i], AttributeDirection::removed, d});
  }
  return out;
}

/// max_{j != y} p'_j - p_y. Positive does not by itself mean a flip.
inline double contrast_gain(const ClassDistribution& fx, const ClassDistribution& fx_prime, std::size_t y) {
  if (fx.size() != fx_prime.size() || y >= fx.size())
    throw Error(Errc::config_error, "class distributions disagree in size");
  double best = -INFINITY;
  for (std::size_t j = 0; j < fx_prime.size(); ++j)
    if (j != y) best = std::max(best, fx_prime.probabilities[j]);
  return best - fx.probabilities[y];
}

/// Mean filler score of the inserted/substituted words; deletions are
/// skipped. `fill_scores` runs parallel to `path`.
inline double lm_surrogate(std::span<const Edit> path, std::span<const double> fill_scores) {
  if (fill_scores.size() != path.size())
    throw Error(Errc::config_error, "fill scores must run parallel to the edit path");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].kind == EditKind::remove) continue;
    sum += fill_scores[i];
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

inline ObjectiveBreakdown cat_objective(const TokenizedText& x, const TokenizedText& x_prime,
                                        std::span<const Edit> path, std::span<const double> fill_scores,
                                        const ClassDistribution& fx, const ClassDistribution& fx_prime,
                                        const AttributeScoreVector& zx, const AttributeScoreVector& zx_prime,
                                        const HyperParams& params) {
  detail::check_same_bank(zx, zx_prime);
  ObjectiveBreakdown b;
  for (std::size_t i = 0; i < zx.size(); ++i) {
    const double d = std::abs(zx_prime.scores[i] - zx.scores[i]);
    b.attr_linf = std::max(b.attr_linf, d);
    if (d > zx.thresholds[i]) ++b.attr_changed_count;
  }
  b.contrast_gain = contrast_gain(fx, fx_prime, fx.argmax());
  b.lm_surrogate = lm_surrogate(path, fill_scores);
  b.lev_raw = word_levenshtein(x, x_prime);
  b.total = b.recompute(params);
  return b;
}

}  // namespace cat
