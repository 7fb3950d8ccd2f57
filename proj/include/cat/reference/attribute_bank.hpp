#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/models.hpp"
#include "cat/random.hpp"
#include "cat/reference/embedding_bag.hpp"

namespace cat::reference {

// Merge target that removes a row instead of relabelling it.
inline constexpr const char* kDropLabel = "DROP";

using MergeMap = std::map<std::string, std::string>;

struct BinaryAttributeSpec {
  std::string name;
  MergeMap merge;  // labels mapped onto `name` count as positives
  double tau = 0.3;
};

struct MulticlassFamilySpec {
  std::vector<std::string> classes;
  double tau = 0.05;
};

struct AttributeBankSpec {
  std::vector<BinaryAttributeSpec> binary_attributes;
  std::optional<MulticlassFamilySpec> multiclass_family;
  double negative_cap_fraction = 0.8;

  void validate() const {
    std::set<std::string> seen;
    auto check = [&](const std::string& n) {
      if (!seen.insert(n).second) throw Error(Errc::config_error, "duplicate attribute name '" + n + "'");
    };
    for (const auto& a : binary_attributes) {
      check(a.name);
      if (!(a.tau > 0.0 && a.tau < 1.0)) throw Error(Errc::config_error, "tau must lie in (0,1) for " + a.name);
    }
    if (multiclass_family) {
      for (const auto& c : multiclass_family->classes) check(c);
      if (!(multiclass_family->tau > 0.0 && multiclass_family->tau < 1.0))
        throw Error(Errc::config_error, "multiclass tau must lie in (0,1)");
    }
    if (!(negative_cap_fraction > 0.0 && negative_cap_fraction <= 1.0))
      throw Error(Errc::config_error, "negative_cap_fraction must lie in (0,1]");
  }

  std::size_t attribute_count() const {
    return binary_attributes.size() + (multiclass_family ? multiclass_family->classes.size() : 0);
  }

  static AttributeBankSpec from_json(const Json& j) {
    try {
      AttributeBankSpec spec;
      for (const auto& a : j.at("binary_attributes")) {
        BinaryAttributeSpec b;
        b.name = a.at("name").get<std::string>();
        if (a.contains("merge")) b.merge = a.at("merge").get<MergeMap>();
        b.tau = a.value("tau", 0.3);
        spec.binary_attributes.push_back(std::move(b));
      }
      if (j.contains("multiclass_family") && !j.at("multiclass_family").is_null()) {
        const auto& m = j.at("multiclass_family");
        spec.multiclass_family = MulticlassFamilySpec{m.at("classes").get<std::vector<std::string>>(),
                                                      m.value("tau", 0.05)};
      }
      spec.negative_cap_fraction = j.value("negative_cap_fraction", 0.8);
      spec.validate();
      return spec;
    } catch (const Json::exception& e) {
      throw Error(Errc::config_error, std::string("attribute bank spec: ") + e.what());
    }
  }
};

/// Keeps every positive and a uniform sample of negatives, as many as
/// possible subject to negatives <= cap * (positives + negatives).
/// Input order is preserved within each group.
template <typename T>
std::vector<T> subsample_negatives(const std::vector<T>& positives, const std::vector<T>& negatives, double cap,
                                   std::uint64_t seed) {
  if (!(cap > 0.0 && cap <= 1.0)) throw Error(Errc::config_error, "cap must lie in (0,1]");
  const std::size_t p = positives.size();
  const auto fits = [&](std::size_t n) {
    return static_cast<double>(n) <= cap * static_cast<double>(p + n);
  };
  std::size_t keep = negatives.size();
  if (!fits(keep)) {
    const double bound = cap * static_cast<double>(p) / (1.0 - cap);
    keep = std::min(negatives.size(), static_cast<std::size_t>(bound) + 1);
    while (keep > 0 && !fits(keep)) --keep;
  }

  std::vector<T> out = positives;
  if (keep == negatives.size()) {
    out.insert(out.end(), negatives.begin(), negatives.end());
    return out;
  }
  // Partial Fisher-Yates over indices, then restore file order.
  std::vector<std::size_t> idx(negatives.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) out.push_back(negatives[i]);
  return out;
}

inline Dataset merge_labels(const Dataset& data, const MergeMap& merge) {
  if (merge.empty()) return data;
  Dataset out;
  out.reserve(data.size());
  for (const auto& ex : data) {
    auto it = merge.find(ex.label);
    if (it == merge.end()) {
      out.push_back(ex);
    } else if (it->second != kDropLabel) {
      out.push_back({ex.text, it->second});
    }
  }
  return out;
}

/// One binary embedding-bag scorer per attribute plus one shared multiclass
/// scorer for the family; scores are the presence probability / class
/// probability respectively.
class AttributeBank final : public AttributeScorer {
 public:
  struct Binary {
    std::string name;
    double tau = 0.3;
    EmbeddingBagClassifier model;  // labels {absent, present}
  };
  struct Family {
    double tau = 0.05;
    EmbeddingBagClassifier model;  // labels = family classes
  };

  AttributeBank(std::vector<Binary> binary, std::optional<Family> family)
      : binary_(std::move(binary)), family_(std::move(family)) {}

  AttributeScoreVector score_attributes(const TokenizedText& x) const override {
    AttributeScoreVector out;
    for (const auto& b : binary_) {
      out.scores.push_back(b.model.classify(x).probabilities[1]);
      out.names.push_back(b.name);
      out.thresholds.push_back(b.tau);
    }
    if (family_) {
      const auto d = family_->model.classify(x);
      for (std::size_t i = 0; i < d.size(); ++i) {
        out.scores.push_back(d.probabilities[i]);
        out.names.push_back(d.labels[i]);
        out.thresholds.push_back(family_->tau);
      }
    }
    return out;
  }

  std::size_t size() const { return binary_.size() + (family_ ? family_->model.labels().size() : 0); }

  Json to_json() const {
    Json j;
    j["type"] = "attribute-bank";
    Json arr = Json::array();
    for (const auto& b : binary_) arr.push_back({{"name", b.name}, {"tau", b.tau}, {"model", b.model.to_json()}});
    j["binary"] = arr;
    if (family_)
      j["multiclass"] = {{"tau", family_->tau}, {"model", family_->model.to_json()}};
    else
      j["multiclass"] = nullptr;
    return j;
  }

  static AttributeBank from_json(const Json& j) {
    try {
      if (j.at("type").get<std::string>() != "attribute-bank")
        throw Error(Errc::malformed_record, "checkpoint type is not attribute-bank");
      std::vector<Binary> binary;
      for (const auto& b : j.at("binary"))
        binary.push_back({b.at("name").get<std::string>(), b.at("tau").get<double>(),
                          EmbeddingBagClassifier::from_json(b.at("model"))});
      std::optional<Family> family;
      if (!j.at("multiclass").is_null())
        family = Family{j.at("multiclass").at("tau").get<double>(),
                        EmbeddingBagClassifier::from_json(j.at("multiclass").at("model"))};
      return {std::move(binary), std::move(family)};
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, std::string("attribute bank checkpoint: ") + e.what());
    }
  }

 private:
  std::vector<Binary> binary_;
  std::optional<Family> family_;
};

struct AttributeDatasets {
  Dataset binary;      // multi-topic headlines; one label per row
  Dataset multiclass;  // family corpus
};

inline TrainConfig default_attribute_train_config() {
  TrainConfig cfg;
  cfg.epochs = 10;
  return cfg;
}

inline AttributeBank train_attribute_bank(const AttributeDatasets& data, const AttributeBankSpec& spec,
                                          const TrainConfig& cfg) {
  spec.validate();
  std::vector<AttributeBank::Binary> binary;
  for (std::size_t a = 0; a < spec.binary_attributes.size(); ++a) {
    const auto& attr = spec.binary_attributes[a];
    const Dataset merged = merge_labels(data.binary, attr.merge);
    Dataset pos, neg;
    for (const auto& ex : merged) (ex.label == attr.name ? pos : neg).push_back({ex.text, "present"});
    for (auto& ex : neg) ex.label = "absent";
    TrainConfig local = cfg;
    local.seed = cfg.seed + 1000003ULL * (a + 1);
    const Dataset train = subsample_negatives(pos, neg, spec.negative_cap_fraction, local.seed);
    try {
      binary.push_back({attr.name, attr.tau, EmbeddingBagTrainer::train(train, local, {"absent", "present"})});
    } catch (const Error& e) {
      throw Error(e.code(), "attribute '" + attr.name + "': " + e.what());
    }
  }
  std::optional<AttributeBank::Family> family;
  if (spec.multiclass_family) {
    const auto& classes = spec.multiclass_family->classes;
    Dataset rows;
    for (const auto& ex : data.multiclass)
      if (std::find(classes.begin(), classes.end(), ex.label) != classes.end()) rows.push_back(ex);
    family = AttributeBank::Family{spec.multiclass_family->tau, EmbeddingBagTrainer::train(rows, cfg, classes)};
  }
  return {std::move(binary), std::move(family)};
}

}  // namespace cat::reference
