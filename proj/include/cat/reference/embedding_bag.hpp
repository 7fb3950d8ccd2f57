#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/models.hpp"
#include "cat/random.hpp"
#include "cat/text.hpp"

namespace cat::reference {

struct Example {
  std::string text;
  std::string label;

  friend bool operator==(const Example&, const Example&) = default;
};

using Dataset = std::vector<Example>;

inline constexpr const char* kUnknownWord = "<unk>";

// Index 0 is reserved for unknown words.
class Vocabulary {
 public:
  Vocabulary() { add(kUnknownWord); }

  std::size_t add(const std::string& w) {
    auto [it, inserted] = index_.try_emplace(w, words_.size());
    if (inserted) words_.push_back(w);
    return it->second;
  }

  std::size_t lookup(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? 0 : it->second;
  }

  bool contains(const std::string& w) const { return index_.count(w) != 0; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 32;
  // Per-token probability of training on the unknown row instead, so the
  // shared unknown embedding is learned rather than left at its init.
  double unknown_rate = 0.02;
  std::uint64_t seed = 0;
};

/// Mean-pooled bag of word embeddings -> linear -> ReLU -> linear -> softmax.
class EmbeddingBagClassifier final : public Classifier, public GradientModel {
 public:
  EmbeddingBagClassifier() = default;

  EmbeddingBagClassifier(Vocabulary vocab, std::vector<std::string> labels, std::size_t dim, std::size_t hidden)
      : vocab_(std::move(vocab)),
        labels_(std::move(labels)),
        dim_(dim),
        hidden_(hidden),
        embedding_(vocab_.size() * dim, 0.0),
        w1_(hidden * dim, 0.0),
        b1_(hidden, 0.0),
        w2_(labels_.size() * hidden, 0.0),
        b2_(labels_.size(), 0.0) {}

  ClassDistribution classify(const TokenizedText& x) const override {
    return {softmax(logits_from_mean(pooled(x))), labels_};
  }

  const std::vector<std::string>& labels() const override { return labels_; }
  const GradientModel* gradients() const override { return this; }

  Matrix input_embeddings(const TokenizedText& x) const override {
    Matrix m(x.size(), dim_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double* row = &embedding_[vocab_.lookup(x.words[i]) * dim_];
      std::copy(row, row + dim_, &m.data[i * dim_]);
    }
    return m;
  }

  ValueAndGradient target_gradient(const Matrix& inputs, std::size_t target) const override {
    std::vector<double> mean(dim_, 0.0);
    const double inv_n = inputs.rows ? 1.0 / static_cast<double>(inputs.rows) : 0.0;
    for (std::size_t i = 0; i < inputs.rows; ++i)
      for (std::size_t d = 0; d < dim_; ++d) mean[d] += inputs(i, d) * inv_n;

    std::vector<double> pre(hidden_), act(hidden_);
    forward_hidden(mean, pre, act);
    const std::vector<double> p = softmax(output(act));

    // d p_t / d z_j = p_t (delta_tj - p_j)
    std::vector<double> dz(labels_.size());
    for (std::size_t j = 0; j < dz.size(); ++j) dz[j] = p[target] * ((j == target ? 1.0 : 0.0) - p[j]);
    const std::vector<double> dmean = backprop_to_mean(dz, pre);

    ValueAndGradient out{p[target], Matrix(inputs.rows, dim_)};
    for (std::size_t i = 0; i < inputs.rows; ++i)
      for (std::size_t d = 0; d < dim_; ++d) out.gradient(i, d) = dmean[d] * inv_n;
    return out;
  }

  /// Probability of `target` for an arbitrary input matrix (used for IG baselines).
  double target_value(const Matrix& inputs, std::size_t target) const {
    return target_gradient(inputs, target).value;
  }

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t embedding_dim() const noexcept { return dim_; }
  std::size_t hidden_dim() const noexcept { return hidden_; }
  std::span<const double> embedding_row(std::size_t idx) const { return {&embedding_[idx * dim_], dim_}; }

  Json to_json() const {
    Json j;
    j["type"] = "embedding-bag";
    j["labels"] = labels_;
    j["vocabulary"] = vocab_.words();
    j["embedding_dim"] = dim_;
    j["hidden_dim"] = hidden_;
    j["embedding"] = embedding_;
    j["hidden_weight"] = w1_;
    j["hidden_bias"] = b1_;
    j["output_weight"] = w2_;
    j["output_bias"] = b2_;
    return j;
  }

  static EmbeddingBagClassifier from_json(const Json& j) {
    try {
      if (j.at("type").get<std::string>() != "embedding-bag")
        throw Error(Errc::malformed_record, "checkpoint type is not embedding-bag");
      Vocabulary vocab;
      const auto words = j.at("vocabulary").get<std::vector<std::string>>();
      if (words.empty() || words[0] != kUnknownWord)
        throw Error(Errc::malformed_record, "vocabulary must start with the unknown word");
      for (const auto& w : words) vocab.add(w);
      EmbeddingBagClassifier m(std::move(vocab), j.at("labels").get<std::vector<std::string>>(),
                               j.at("embedding_dim").get<std::size_t>(), j.at("hidden_dim").get<std::size_t>());
      auto load = [&](const char* key, std::vector<double>& dst) {
        auto v = json_doubles(j.at(key));
        if (v.size() != dst.size())
          throw Error(Errc::malformed_record, std::string("checkpoint array '") + key + "' has wrong size");
        dst = std::move(v);
      };
      load("embedding", m.embedding_);
      load("hidden_weight", m.w1_);
      load("hidden_bias", m.b1_);
      load("output_weight", m.w2_);
      load("output_bias", m.b2_);
      return m;
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, std::string("embedding-bag checkpoint: ") + e.what());
    }
  }

  friend class EmbeddingBagTrainer;

 private:
  std::vector<double> pooled(const TokenizedText& x) const {
    std::vector<double> mean(dim_, 0.0);
    if (x.empty()) return mean;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (const auto& w : x.words) {
      const double* row = &embedding_[vocab_.lookup(w) * dim_];
      for (std::size_t d = 0; d < dim_; ++d) mean[d] += row[d] * inv_n;
    }
    return mean;
  }

  void forward_hidden(const std::vector<double>& mean, std::vector<double>& pre, std::vector<double>& act) const {
    for (std::size_t h = 0; h < hidden_; ++h) {
      double s = b1_[h];
      const double* w = &w1_[h * dim_];
      for (std::size_t d = 0; d < dim_; ++d) s += w[d] * mean[d];
      pre[h] = s;
      act[h] = s > 0.0 ? s : 0.0;
    }
  }

  std::vector<double> output(const std::vector<double>& act) const {
    std::vector<double> z(labels_.size());
    for (std::size_t c = 0; c < z.size(); ++c) {
      double s = b2_[c];
      const double* w = &w2_[c * hidden_];
      for (std::size_t h = 0; h < hidden_; ++h) s += w[h] * act[h];
      z[c] = s;
    }
    return z;
  }

  std::vector<double> logits_from_mean(const std::vector<double>& mean) const {
    std::vector<double> pre(hidden_), act(hidden_);
    forward_hidden(mean, pre, act);
    return output(act);
  }

  std::vector<double> backprop_to_mean(const std::vector<double>& dz, const std::vector<double>& pre) const {
    std::vector<double> da(hidden_, 0.0);
    for (std::size_t c = 0; c < dz.size(); ++c)
      for (std::size_t h = 0; h < hidden_; ++h) da[h] += w2_[c * hidden_ + h] * dz[c];
    for (std::size_t h = 0; h < hidden_; ++h)
      if (pre[h] <= 0.0) da[h] = 0.0;
    std::vector<double> dmean(dim_, 0.0);
    for (std::size_t h = 0; h < hidden_; ++h)
      for (std::size_t d = 0; d < dim_; ++d) dmean[d] += w1_[h * dim_ + d] * da[h];
    return dmean;
  }

  Vocabulary vocab_;
  std::vector<std::string> labels_;
  std::size_t dim_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> embedding_;  // |V| x d
  std::vector<double> w1_;         // h x d
  std::vector<double> b1_;         // h
  std::vector<double> w2_;         // C x h
  std::vector<double> b2_;         // C
};

namespace detail {

// Adam with L2 weight decay folded into the gradient.
struct AdamState {
  std::vector<double> m, v;
  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& param, std::vector<double>& grad, const TrainConfig& cfg, std::size_t t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = grad[i] + cfg.weight_decay * param[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      param[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      grad[i] = 0.0;
    }
  }
};

}  // namespace detail

class EmbeddingBagTrainer {
 public:
  static EmbeddingBagClassifier train(const Dataset& data, const TrainConfig& cfg,
                                      std::vector<std::string> label_order = {}) {
    if (data.empty()) throw Error(Errc::degenerate_dataset, "training set is empty");
    std::set<std::string> present;
    for (const auto& ex : data) present.insert(ex.label);
    if (present.size() < 2)
      throw Error(Errc::degenerate_dataset, "training set has a single class ('" + *present.begin() + "')");
    if (label_order.empty()) label_order.assign(present.begin(), present.end());
    std::map<std::string, std::size_t> label_index;
    for (std::size_t i = 0; i < label_order.size(); ++i) label_index[label_order[i]] = i;

    Vocabulary vocab;
    std::vector<std::vector<std::size_t>> docs;
    std::vector<std::size_t> targets;
    docs.reserve(data.size());
    for (const auto& ex : data) {
      auto it = label_index.find(ex.label);
      if (it == label_index.end()) throw Error(Errc::degenerate_dataset, "unknown label '" + ex.label + "'");
      const TokenizedText t = tokenize(ex.text);
      std::vector<std::size_t> ids;
      for (const auto& w : t.words) ids.push_back(vocab.add(w));
      docs.push_back(std::move(ids));
      targets.push_back(it->second);
    }

    EmbeddingBagClassifier model(std::move(vocab), label_order, cfg.embedding_dim, cfg.hidden_dim);
    Rng rng(cfg.seed);
    initialize(model, rng);

    const std::size_t dim = model.dim_, hid = model.hidden_, classes = model.labels_.size();
    std::vector<double> g_emb(model.embedding_.size(), 0.0), g_w1(model.w1_.size(), 0.0), g_b1(hid, 0.0),
        g_w2(model.w2_.size(), 0.0), g_b2(classes, 0.0);
    detail::AdamState s_emb(g_emb.size()), s_w1(g_w1.size()), s_b1(hid), s_w2(g_w2.size()), s_b2(classes);

    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
    std::size_t step = 0;
    std::vector<double> mean(dim), pre(hid), act(hid), dz(classes), da(hid), dmean(dim);
    std::vector<std::size_t> ids;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t end = std::min(order.size(), start + batch);
        const double scale = 1.0 / static_cast<double>(end - start);
        for (std::size_t b = start; b < end; ++b) {
          ids = docs[order[b]];
          if (cfg.unknown_rate > 0.0)
            for (auto& id : ids)
              if (rng.uniform() < cfg.unknown_rate) id = 0;
          const double inv_n = 1.0 / static_cast<double>(ids.size());
          std::fill(mean.begin(), mean.end(), 0.0);
          for (std::size_t id : ids)
            for (std::size_t d = 0; d < dim; ++d) mean[d] += model.embedding_[id * dim + d] * inv_n;
          model.forward_hidden(mean, pre, act);
          const auto p = softmax(model.output(act));
          for (std::size_t c = 0; c < classes; ++c)
            dz[c] = (p[c] - (c == targets[order[b]] ? 1.0 : 0.0)) * scale;

          for (std::size_t c = 0; c < classes; ++c) {
            g_b2[c] += dz[c];
            for (std::size_t h = 0; h < hid; ++h) g_w2[c * hid + h] += dz[c] * act[h];
          }
          std::fill(da.begin(), da.end(), 0.0);
          for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t h = 0; h < hid; ++h) da[h] += model.w2_[c * hid + h] * dz[c];
          for (std::size_t h = 0; h < hid; ++h)
            if (pre[h] <= 0.0) da[h] = 0.0;
          std::fill(dmean.begin(), dmean.end(), 0.0);
          for (std::size_t h = 0; h < hid; ++h) {
            g_b1[h] += da[h];
            for (std::size_t d = 0; d < dim; ++d) {
              g_w1[h * dim + d] += da[h] * mean[d];
              dmean[d] += model.w1_[h * dim + d] * da[h];
            }
          }
          for (std::size_t id : ids)
            for (std::size_t d = 0; d < dim; ++d) g_emb[id * dim + d] += dmean[d] * inv_n;
        }
        ++step;
        s_emb.step(model.embedding_, g_emb, cfg, step);
        s_w1.step(model.w1_, g_w1, cfg, step);
        s_b1.step(model.b1_, g_b1, cfg, step);
        s_w2.step(model.w2_, g_w2, cfg, step);
        s_b2.step(model.b2_, g_b2, cfg, step);
      }
    }
    return model;
  }

 private:
  // Embeddings ~ N(0, 1); linear layers ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static void initialize(EmbeddingBagClassifier& m, Rng& rng) {
    for (double& v : m.embedding_) v = rng.normal();
    const double k1 = 1.0 / std::sqrt(static_cast<double>(m.dim_));
    for (double& v : m.w1_) v = rng.uniform(-k1, k1);
    for (double& v : m.b1_) v = rng.uniform(-k1, k1);
    const double k2 = 1.0 / std::sqrt(static_cast<double>(m.hidden_));
    for (double& v : m.w2_) v = rng.uniform(-k2, k2);
    for (double& v : m.b2_) v = rng.uniform(-k2, k2);
  }
};

inline EmbeddingBagClassifier train_classifier(const Dataset& data, const TrainConfig& cfg) {
  return EmbeddingBagTrainer::train(data, cfg);
}

inline double accuracy(const Classifier& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : data)
    if (model.classify(tokenize(ex.text)).argmax_label() == ex.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace cat::reference
