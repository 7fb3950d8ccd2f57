#pragma once

#include <algorithm>
#include <concepts>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "cat/error.hpp"
#include "cat/models.hpp"
#include "cat/text.hpp"

namespace cat {

enum class AttributionMethod { integrated_gradients, occlusion };

constexpr std::string_view attribution_name(AttributionMethod m) {
  return m == AttributionMethod::integrated_gradients ? "ig" : "occlusion";
}

inline AttributionMethod parse_attribution(std::string_view s) {
  if (s == "ig" || s == "integrated-gradients") return AttributionMethod::integrated_gradients;
  if (s == "occlusion") return AttributionMethod::occlusion;
  throw Error(Errc::config_error, "unknown attribution method '" + std::string(s) + "'");
}

struct AttributionVector {
  std::vector<double> scores;  // one per input word
  AttributionMethod method = AttributionMethod::occlusion;
  std::size_t target_class = 0;
};

/// Leave-one-word-out drop in the target probability. A single-word text
/// has nothing to compare against and gets [1.0].
inline AttributionVector occlusion_importance(const TokenizedText& x, const Classifier& f, std::size_t target) {
  AttributionVector out{{}, AttributionMethod::occlusion, target};
  if (x.size() <= 1) {
    out.scores.assign(x.size(), 1.0);
    return out;
  }
  const double base = f.classify(x).probabilities.at(target);
  out.scores.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<std::string> words = x.words;
    words.erase(words.begin() + static_cast<std::ptrdiff_t>(i));
    out.scores.push_back(base - f.classify(from_words(std::move(words))).probabilities.at(target));
  }
  return out;
}

/// Integrated gradients along the straight path from `baseline` (default:
/// all-zero embeddings) to the word embeddings, midpoint Riemann rule with
/// `steps` points; coordinate attributions are summed per word.
inline AttributionVector integrated_gradients(const TokenizedText& x, const GradientModel& model, std::size_t target,
                                              std::size_t steps, const std::optional<Matrix>& baseline = {}) {
  if (steps == 0) throw Error(Errc::config_error, "integrated gradients needs at least one step");
  const Matrix input = model.input_embeddings(x);
  const Matrix base = baseline.value_or(Matrix(input.rows, input.cols, 0.0));
  if (base.rows != input.rows || base.cols != input.cols)
    throw Error(Errc::config_error, "baseline shape does not match the input");

  Matrix grad_sum(input.rows, input.cols, 0.0);
  Matrix point(input.rows, input.cols);
  for (std::size_t s = 0; s < steps; ++s) {
    const double alpha = (static_cast<double>(s) + 0.5) / static_cast<double>(steps);
    for (std::size_t i = 0; i < input.data.size(); ++i)
      point.data[i] = base.data[i] + alpha * (input.data[i] - base.data[i]);
    const auto vg = model.target_gradient(point, target);
    for (std::size_t i = 0; i < grad_sum.data.size(); ++i) grad_sum.data[i] += vg.gradient.data[i];
  }

  AttributionVector out{std::vector<double>(input.rows, 0.0), AttributionMethod::integrated_gradients, target};
  const double inv = 1.0 / static_cast<double>(steps);
  for (std::size_t r = 0; r < input.rows; ++r)
    for (std::size_t c = 0; c < input.cols; ++c)
      out.scores[r] += (input(r, c) - base(r, c)) * grad_sum(r, c) * inv;
  return out;
}

inline AttributionVector integrated_gradients(const TokenizedText& x, const Classifier& f, std::size_t target,
                                              std::size_t steps, const std::optional<Matrix>& baseline = {}) {
  const GradientModel* g = f.gradients();
  if (!g) throw Error(Errc::non_differentiable_backend, "classifier exposes no gradients");
  return integrated_gradients(x, *g, target, steps, baseline);
}

// Models that are both a Classifier and a GradientModel take the gradient path.
template <typename M>
  requires std::derived_from<M, GradientModel>
AttributionVector integrated_gradients(const TokenizedText& x, const M& model, std::size_t target, std::size_t steps,
                                       const std::optional<Matrix>& baseline = {}) {
  return integrated_gradients(x, static_cast<const GradientModel&>(model), target, steps, baseline);
}

struct AttributionResult {
  AttributionVector attribution;
  bool fell_back = false;  // IG requested but the backend has no gradients
};

inline AttributionResult attribute(const TokenizedText& x, const Classifier& f, std::size_t target,
                                   AttributionMethod method, std::size_t ig_steps) {
  if (method == AttributionMethod::integrated_gradients) {
    if (f.gradients()) return {integrated_gradients(x, f, target, ig_steps), false};
    return {occlusion_importance(x, f, target), true};
  }
  return {occlusion_importance(x, f, target), false};
}

// Descending score, ties to the lower index, truncated to top_p.
inline std::vector<std::size_t> rank_positions(const AttributionVector& attr, std::size_t top_p) {
  std::vector<std::size_t> idx(attr.scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return attr.scores[a] > attr.scores[b]; });
  if (idx.size() > top_p) idx.resize(top_p);
  return idx;
}

}  // namespace cat
