#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/models.hpp"

namespace cat::reference {

class ConstantClassifier final : public Classifier {
 public:
  ConstantClassifier(std::vector<std::string> labels, std::vector<double> probs)
      : dist_{std::move(probs), std::move(labels)} {
    if (!dist_.valid()) throw Error(Errc::config_error, "constant classifier needs a valid distribution");
  }

  ClassDistribution classify(const TokenizedText&) const override { return dist_; }
  const std::vector<std::string>& labels() const override { return dist_.labels; }

 private:
  ClassDistribution dist_;
};

// Wraps an arbitrary callable; handy for tests and adapters.
class FunctionClassifier final : public Classifier {
 public:
  using Fn = std::function<std::vector<double>(const TokenizedText&)>;

  FunctionClassifier(std::vector<std::string> labels, Fn fn) : labels_(std::move(labels)), fn_(std::move(fn)) {}

  ClassDistribution classify(const TokenizedText& x) const override { return {fn_(x), labels_}; }
  const std::vector<std::string>& labels() const override { return labels_; }

 private:
  std::vector<std::string> labels_;
  Fn fn_;
};

/// Each keyword votes for one label with a confidence q: the vote puts q on
/// its label and spreads 1-q over the rest. Votes are averaged over keyword
/// occurrences; a text without keywords gets the uniform distribution.
class KeywordClassifier final : public Classifier {
 public:
  struct Rule {
    std::size_t label = 0;
    double confidence = 0.9;
  };

  KeywordClassifier(std::vector<std::string> labels, std::map<std::string, Rule> rules)
      : labels_(std::move(labels)), rules_(std::move(rules)) {
    if (labels_.size() < 2) throw Error(Errc::config_error, "keyword classifier needs at least two labels");
    for (const auto& [w, r] : rules_)
      if (r.label >= labels_.size() || !(r.confidence >= 0.0 && r.confidence <= 1.0))
        throw Error(Errc::config_error, "bad keyword rule for '" + w + "'");
  }

  ClassDistribution classify(const TokenizedText& x) const override {
    const std::size_t c = labels_.size();
    std::vector<double> acc(c, 0.0);
    std::size_t votes = 0;
    for (const auto& w : x.words) {
      auto it = rules_.find(w);
      if (it == rules_.end()) continue;
      const double rest = (1.0 - it->second.confidence) / static_cast<double>(c - 1);
      for (std::size_t j = 0; j < c; ++j) acc[j] += j == it->second.label ? it->second.confidence : rest;
      ++votes;
    }
    if (votes == 0) return {std::vector<double>(c, 1.0 / static_cast<double>(c)), labels_};
    for (double& v : acc) v /= static_cast<double>(votes);
    return {std::move(acc), labels_};
  }

  const std::vector<std::string>& labels() const override { return labels_; }

  Json to_json() const {
    Json j;
    j["type"] = "keyword";
    j["labels"] = labels_;
    Json rules = Json::object();
    for (const auto& [w, r] : rules_) rules[w] = {{"label", labels_[r.label]}, {"confidence", r.confidence}};
    j["keywords"] = rules;
    return j;
  }

  static KeywordClassifier from_json(const Json& j) {
    try {
      auto labels = j.at("labels").get<std::vector<std::string>>();
      std::map<std::string, Rule> rules;
      for (auto it = j.at("keywords").begin(); it != j.at("keywords").end(); ++it) {
        const auto label = it.value().at("label").get<std::string>();
        auto pos = std::find(labels.begin(), labels.end(), label);
        if (pos == labels.end()) throw Error(Errc::config_error, "keyword label '" + label + "' not in labels");
        rules[it.key()] = {static_cast<std::size_t>(pos - labels.begin()),
                           it.value().value("confidence", 0.9)};
      }
      return {std::move(labels), std::move(rules)};
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, std::string("keyword classifier: ") + e.what());
    }
  }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, Rule> rules_;
};

/// score_i = 1 - prod(1 - w) over matched keyword occurrences; 0 without evidence.
class KeywordAttributeScorer final : public AttributeScorer {
 public:
  struct Attribute {
    std::string name;
    std::map<std::string, double> keywords;
    double tau = 0.3;
  };

  explicit KeywordAttributeScorer(std::vector<Attribute> attrs) : attrs_(std::move(attrs)) {}

  AttributeScoreVector score_attributes(const TokenizedText& x) const override {
    AttributeScoreVector out;
    for (const auto& a : attrs_) {
      double absent = 1.0;
      for (const auto& w : x.words) {
        auto it = a.keywords.find(w);
        if (it != a.keywords.end()) absent *= 1.0 - it->second;
      }
      out.scores.push_back(1.0 - absent);
      out.names.push_back(a.name);
      out.thresholds.push_back(a.tau);
    }
    return out;
  }

  Json to_json() const {
    Json j;
    j["type"] = "keyword-attributes";
    Json arr = Json::array();
    for (const auto& a : attrs_) arr.push_back({{"name", a.name}, {"tau", a.tau}, {"keywords", a.keywords}});
    j["attributes"] = arr;
    return j;
  }

  static KeywordAttributeScorer from_json(const Json& j) {
    try {
      std::vector<Attribute> attrs;
      for (const auto& a : j.at("attributes"))
        attrs.push_back({a.at("name").get<std::string>(), a.at("keywords").get<std::map<std::string, double>>(),
                         a.value("tau", 0.3)});
      return KeywordAttributeScorer(std::move(attrs));
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, std::string("keyword attribute scorer: ") + e.what());
    }
  }

 private:
  std::vector<Attribute> attrs_;
};

}  // namespace cat::reference
