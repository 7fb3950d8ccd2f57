#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cat/models.hpp"
#include "cat/random.hpp"
#include "cat/reference/embedding_bag.hpp"

namespace cat::reference {

// Sentence vector = arithmetic mean of word rows; unknown words use row 0.
class MeanEmbedder final : public Embedder {
 public:
  MeanEmbedder(Vocabulary vocab, std::vector<double> table, std::size_t dim)
      : vocab_(std::move(vocab)), table_(std::move(table)), dim_(dim) {
    if (table_.size() != vocab_.size() * dim_) throw Error(Errc::config_error, "embedding table has wrong size");
  }

  static MeanEmbedder from_classifier(const EmbeddingBagClassifier& clf) {
    std::vector<double> table;
    table.reserve(clf.vocabulary().size() * clf.embedding_dim());
    for (std::size_t i = 0; i < clf.vocabulary().size(); ++i) {
      auto row = clf.embedding_row(i);
      table.insert(table.end(), row.begin(), row.end());
    }
    return {clf.vocabulary(), std::move(table), clf.embedding_dim()};
  }

  std::vector<double> embed(const TokenizedText& x) const override {
    std::vector<double> out(dim_, 0.0);
    if (x.empty()) return out;
    for (const auto& w : x.words) {
      const double* row = &table_[vocab_.lookup(w) * dim_];
      for (std::size_t d = 0; d < dim_; ++d) out[d] += row[d];
    }
    for (double& v : out) v /= static_cast<double>(x.size());
    return out;
  }

  std::size_t dimension() const override { return dim_; }

 private:
  Vocabulary vocab_;
  std::vector<double> table_;
  std::size_t dim_;
};

/// Every word gets a fixed pseudo-random Gaussian vector derived from its
/// hash and the seed; sentences average them. Needs no training data.
class HashedEmbedder final : public Embedder {
 public:
  explicit HashedEmbedder(std::size_t dim = 64, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}

  std::vector<double> word_vector(const std::string& w) const {
    Rng rng(fnv1a64(w) ^ (seed_ * 0x9e3779b97f4a7c15ULL));
    std::vector<double> v(dim_);
    for (double& x : v) x = rng.normal();
    return v;
  }

  std::vector<double> embed(const TokenizedText& x) const override {
    std::vector<double> out(dim_, 0.0);
    if (x.empty()) return out;
    for (const auto& w : x.words) {
      const auto v = word_vector(w);
      for (std::size_t d = 0; d < dim_; ++d) out[d] += v[d];
    }
    for (double& v : out) v /= static_cast<double>(x.size());
    return out;
  }

  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

}  // namespace cat::reference
