#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "cat/error.hpp"
#include "cat/text.hpp"

namespace cat {

struct ClassDistribution {
  std::vector<double> probabilities;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return probabilities.size(); }

  // Ties go to the lowest index so the answer never depends on float noise
  // in the comparison order.
  std::size_t argmax() const noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probabilities.size(); ++i)
      if (probabilities[i] > probabilities[best]) best = i;
    return best;
  }

  const std::string& argmax_label() const { return labels.at(argmax()); }

  bool valid(double tol = 1e-6) const {
    if (probabilities.empty() || probabilities.size() != labels.size()) return false;
    double sum = 0.0;
    for (double p : probabilities) {
      if (!(p >= 0.0) || !std::isfinite(p)) return false;
      sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
  }

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;
};

struct AttributeScoreVector {
  std::vector<double> scores;
  std::vector<std::string> names;
  std::vector<double> thresholds;

  std::size_t size() const noexcept { return scores.size(); }

  bool valid() const {
    if (scores.size() != names.size() || scores.size() != thresholds.size()) return false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) return false;
      if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) return false;
    }
    return true;
  }

  friend bool operator==(const AttributeScoreVector&, const AttributeScoreVector&) = default;
};

struct FillProposal {
  std::string word;
  double lm_score = 0.0;  // higher is more fluent

  friend bool operator==(const FillProposal&, const FillProposal&) = default;
};

// Descending score, then lexicographic word.
inline bool fill_order(const FillProposal& a, const FillProposal& b) {
  if (a.lm_score != b.lm_score) return a.lm_score > b.lm_score;
  return a.word < b.word;
}

struct FillSite {
  EditKind mode = EditKind::substitute;  // substitute or insert
  std::size_t position = 0;              // word index, or gap index for inserts
};

using WordSet = std::unordered_set<std::string>;

// Dense row-major matrix of per-word input vectors (rows = words).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct ValueAndGradient {
  double value = 0.0;
  Matrix gradient;  // same shape as the input matrix
};

/// Gradient access for integrated gradients: the model exposes its per-word
/// input embeddings and the derivative of one class probability with respect
/// to them.
class GradientModel {
 public:
  virtual ~GradientModel() = default;
  virtual Matrix input_embeddings(const TokenizedText& x) const = 0;
  virtual ValueAndGradient target_gradient(const Matrix& inputs, std::size_t target) const = 0;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ClassDistribution classify(const TokenizedText& x) const = 0;
  virtual const std::vector<std::string>& labels() const = 0;
  // nullptr for pure black boxes.
  virtual const GradientModel* gradients() const { return nullptr; }
  virtual bool thread_safe() const { return true; }
};

class AttributeScorer {
 public:
  virtual ~AttributeScorer() = default;
  virtual AttributeScoreVector score_attributes(const TokenizedText& x) const = 0;
  virtual bool thread_safe() const { return true; }
};

class MaskFiller {
 public:
  virtual ~MaskFiller() = default;
  virtual std::vector<FillProposal> propose_fills(const TokenizedText& x, FillSite site, std::size_t k,
                                                  const WordSet& forbid) const = 0;
  virtual bool thread_safe() const { return true; }
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const TokenizedText& x) const = 0;
  virtual std::size_t dimension() const = 0;
  virtual bool thread_safe() const { return true; }
};

class FluencyModel {
 public:
  virtual ~FluencyModel() = default;
  /// Average per-token negative log-likelihood.
  virtual double lm_loss(const TokenizedText& x) const = 0;
  virtual bool thread_safe() const { return true; }
};

inline void check_fill_site(const TokenizedText& x, FillSite site) {
  if (site.mode == EditKind::substitute && site.position >= x.size())
    throw Error(Errc::invalid_edit, "substitute site out of bounds");
  if (site.mode == EditKind::insert && site.position > x.size())
    throw Error(Errc::invalid_edit, "insert site out of bounds");
  if (site.mode == EditKind::remove) throw Error(Errc::invalid_edit, "delete is not a fill site");
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace cat
