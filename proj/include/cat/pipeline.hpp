#pragma once

#include <atomic>
#include <iomanip>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cat/config.hpp"
#include "cat/dataset.hpp"
#include "cat/error.hpp"
#include "cat/eval.hpp"
#include "cat/explanation.hpp"
#include "cat/reference/attribute_bank.hpp"
#include "cat/reference/embedder.hpp"
#include "cat/reference/embedding_bag.hpp"
#include "cat/reference/ngram.hpp"
#include "cat/reference/simple.hpp"
#include "cat/search.hpp"

namespace cat {

struct Backends {
  std::unique_ptr<Classifier> classifier;
  std::unique_ptr<AttributeScorer> attributes;
  std::unique_ptr<MaskFiller> filler;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<FluencyModel> fluency;

  bool thread_safe() const {
    return classifier->thread_safe() && attributes->thread_safe() && filler->thread_safe() &&
           embedder->thread_safe() && fluency->thread_safe();
  }
};

enum class BackendNeeds { explain, evaluate };

namespace detail {

inline std::unique_ptr<Classifier> make_classifier(const RunConfig& c) {
  require_file(c, "classifier_checkpoint", c.classifier_checkpoint);
  const Json j = read_json_file(c.resolve(c.classifier_checkpoint));
  if (c.classifier == "embedding-bag")
    return std::make_unique<reference::EmbeddingBagClassifier>(reference::EmbeddingBagClassifier::from_json(j));
  if (c.classifier == "keyword")
    return std::make_unique<reference::KeywordClassifier>(reference::KeywordClassifier::from_json(j));
  if (c.classifier == "constant") {
    try {
      return std::make_unique<reference::ConstantClassifier>(j.at("labels").get<std::vector<std::string>>(),
                                                             json_doubles(j.at("probabilities")));
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, std::string("constant classifier: ") + e.what());
    }
  }
  throw Error(Errc::config_error, "unknown classifier backend '" + c.classifier + "'");
}

inline std::unique_ptr<AttributeScorer> make_attributes(const RunConfig& c) {
  if (c.attribute_bank == "none") return std::make_unique<reference::KeywordAttributeScorer>(
      std::vector<reference::KeywordAttributeScorer::Attribute>{});
  require_file(c, "attribute_checkpoint", c.attribute_checkpoint);
  const Json j = read_json_file(c.resolve(c.attribute_checkpoint));
  if (c.attribute_bank == "embedding-bag")
    return std::make_unique<reference::AttributeBank>(reference::AttributeBank::from_json(j));
  if (c.attribute_bank == "keyword")
    return std::make_unique<reference::KeywordAttributeScorer>(reference::KeywordAttributeScorer::from_json(j));
  throw Error(Errc::config_error, "unknown attribute_bank backend '" + c.attribute_bank + "'");
}

inline std::unique_ptr<MaskFiller> make_filler(const RunConfig& c) {
  std::size_t order = 0;
  if (c.filler == "bigram") order = 2;
  else if (c.filler == "bigram-left") order = 1;
  else throw Error(Errc::config_error, "unknown filler backend '" + c.filler + "'");
  require_file(c, "filler_checkpoint", c.filler_checkpoint);
  return std::make_unique<reference::NgramFiller>(
      reference::NgramCounts::from_json(read_json_file(c.resolve(c.filler_checkpoint))), order);
}

inline std::unique_ptr<Embedder> make_embedder(const RunConfig& c, const Classifier* clf) {
  if (c.embedder == "hashed") return std::make_unique<reference::HashedEmbedder>(c.embedder_dim, 0);
  if (c.embedder == "classifier") {
    const auto* bag = dynamic_cast<const reference::EmbeddingBagClassifier*>(clf);
    if (!bag) throw Error(Errc::config_error, "embedder 'classifier' needs an embedding-bag classifier");
    return std::make_unique<reference::MeanEmbedder>(reference::MeanEmbedder::from_classifier(*bag));
  }
  throw Error(Errc::config_error, "unknown embedder backend '" + c.embedder + "'");
}

inline std::unique_ptr<FluencyModel> make_fluency(const RunConfig& c) {
  const std::string& ckpt = c.fluency_checkpoint.empty() ? c.filler_checkpoint : c.fluency_checkpoint;
  require_file(c, "fluency_checkpoint", ckpt);
  auto counts = reference::NgramCounts::from_json(read_json_file(c.resolve(ckpt)));
  if (c.fluency == "bigram") return std::make_unique<reference::BigramFluencyModel>(std::move(counts));
  if (c.fluency == "unigram")
    return std::make_unique<reference::UnigramFluencyModel>(reference::UnigramFluencyModel::from_counts(counts));
  throw Error(Errc::config_error, "unknown fluency backend '" + c.fluency + "'");
}

}  // namespace detail

/// Builds the backends named in the config. Every referenced checkpoint must
/// exist; evaluation does not need the attribute bank or the filler.
inline Backends load_backends(const RunConfig& c, BackendNeeds needs) {
  Backends b;
  b.classifier = detail::make_classifier(c);
  if (needs == BackendNeeds::explain) {
    b.attributes = detail::make_attributes(c);
    b.filler = detail::make_filler(c);
  }
  b.embedder = detail::make_embedder(c, b.classifier.get());
  b.fluency = detail::make_fluency(c);
  return b;
}

struct ExplainSummary {
  std::size_t ok = 0;
  std::size_t no_contrast = 0;
  bool attribution_fell_back = false;
};

inline ExplanationRecord explain_one(const DatasetRecord& rec, const Backends& b, const RunConfig& c,
                                     const std::string& hash, bool* fell_back = nullptr) {
  ExplanationRecord out;
  out.id = rec.id;
  out.seed = c.params.seed;
  out.config_hash = hash;
  const TokenizedText x = tokenize(rec.text);
  try {
    const SearchResult res = search_contrast(x, *b.classifier, *b.attributes, *b.filler, c.attribution, c.params);
    if (fell_back) *fell_back = res.stats.attribution_fell_back;
    out.status = ExplanationStatus::ok;
    out.explanation = res.explanation;
    const MetricRecord m =
        measure({*b.embedder, *b.fluency}, rec.id, out.explanation.input, out.explanation.contrast, true);
    out.explanation.metrics = InstanceMetrics{*m.dist, *m.cont, *m.fluency};
  } catch (const Error&) {
    // Any per-instance failure is recorded inline; the batch continues.
    out.status = ExplanationStatus::no_contrast;
    out.explanation = Explanation{};
    out.explanation.input = x;
    out.explanation.input_dist = b.classifier->classify(x);
  }
  return out;
}

/// Explains every record and writes one JSONL line per record in input order.
inline ExplainSummary run_explain(const RunConfig& c, const Backends& b, const std::vector<DatasetRecord>& records,
                                  std::ostream& out) {
  const std::string hash = config_hash(c);
  std::vector<ExplanationRecord> results(records.size());
  std::vector<char> fell(records.size(), 0);
  const std::size_t jobs = b.thread_safe() ? std::max<std::size_t>(1, c.jobs) : 1;
  if (jobs == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      bool f = false;
      results[i] = explain_one(records[i], b, c, hash, &f);
      fell[i] = f;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
          bool f = false;
          results[i] = explain_one(records[i], b, c, hash, &f);
          fell[i] = f;
        }
      });
    for (auto& th : pool) th.join();
  }
  ExplainSummary s;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out << to_jsonl_line(results[i]) << '\n';
    (results[i].status == ExplanationStatus::ok ? s.ok : s.no_contrast)++;
    s.attribution_fell_back |= fell[i] != 0;
  }
  return s;
}

// --- evaluation ----------------------------------------------------------

/// The subset of an explanation line evaluation needs. Lines from other
/// explainers only have to carry id, input_text and (when they produced one)
/// contrast_text.
struct ContrastPair {
  std::string id;
  TokenizedText input;
  std::optional<TokenizedText> contrast;
  std::optional<bool> stored_flip;
  std::optional<InstanceMetrics> stored_metrics;
};

inline std::vector<ContrastPair> load_contrast_pairs(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<ContrastPair> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const Json j = Json::parse(line);
      ContrastPair p;
      p.id = j.at("id").get<std::string>();
      p.input = tokenize(j.at("input_text").get<std::string>());
      const std::string status = j.value("status", std::string("ok"));
      if (status == "ok" && j.contains("contrast_text") && !j.at("contrast_text").is_null())
        p.contrast = tokenize(j.at("contrast_text").get<std::string>());
      if (p.contrast && j.contains("input_label") && j.contains("contrast_label"))
        p.stored_flip = j.at("input_label") != j.at("contrast_label");
      if (p.contrast && j.contains("metrics")) {
        const auto& m = j.at("metrics");
        p.stored_metrics = InstanceMetrics{m.at("dist").get<double>(), m.at("cont").get<double>(),
                                           m.at("fluency").get<double>()};
      }
      if (!ids.insert(p.id).second) throw Error(Errc::duplicate_id, where + ": duplicate id '" + p.id + "'");
      out.push_back(std::move(p));
    } catch (const Json::exception& e) {
      throw Error(Errc::malformed_record, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::duplicate_id) throw;
      throw Error(Errc::malformed_record, where + ": " + e.what());
    }
  }
  return out;
}

/// Recomputes flip and metrics with the given backends. Without backends the
/// values stored in the file are used.
inline std::vector<MetricRecord> metric_records(const std::vector<ContrastPair>& pairs, const Backends* b) {
  std::vector<MetricRecord> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.contrast) {
      out.push_back({p.id, false, {}, {}, {}});
      continue;
    }
    if (b) {
      const bool flipped =
          b->classifier->classify(*p.contrast).argmax() != b->classifier->classify(p.input).argmax();
      out.push_back(measure({*b->embedder, *b->fluency}, p.id, p.input, *p.contrast, flipped));
    } else {
      if (!p.stored_metrics || !p.stored_flip)
        throw Error(Errc::config_error, "line '" + p.id + "' has no stored metrics; pass --config to recompute");
      out.push_back({p.id, *p.stored_flip, p.stored_metrics->dist, p.stored_metrics->cont,
                     p.stored_metrics->fluency});
    }
  }
  return out;
}

namespace detail {

inline Json summary_json(const Summary& s) {
  Json j;
  j["mean"] = s.n ? Json(s.mean) : Json(nullptr);
  j["std"] = s.stddev ? Json(*s.stddev) : Json(nullptr);
  j["n"] = s.n;
  return j;
}

inline std::string cell(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

inline std::string cell(const Summary& s) {
  if (s.n == 0) return "NR";
  std::string out = cell(s.mean);
  if (s.stddev) out += " (" + cell(*s.stddev) + ")";
  return out;
}

inline std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

}  // namespace detail

inline Json report_json(const AggregateReport& r) {
  Json j;
  j["instances"] = r.instances;
  j["produced"] = r.produced;
  j["flip"] = r.flip_rate;
  j["dist"] = detail::summary_json(r.dist);
  j["cont"] = detail::summary_json(r.cont);
  j["fluency"] = detail::summary_json(r.fluency);
  return j;
}

inline std::string report_table(const std::vector<std::pair<std::string, AggregateReport>>& rows) {
  std::string out = detail::pad("Method", 12) + detail::pad("Flip", 10) + detail::pad("Dist", 20) +
                    detail::pad("Cont", 20) + "Fluency\n";
  for (const auto& [name, r] : rows)
    out += detail::pad(name, 12) + detail::pad(detail::cell(r.flip_rate), 10) + detail::pad(detail::cell(r.dist), 20) +
           detail::pad(detail::cell(r.cont), 20) + detail::cell(r.fluency) + "\n";
  return out;
}

inline Json comparison_json(const ComparisonReport& rep) {
  Json j;
  j["test"] = rep.kind == TestKind::paired ? "paired-t" : "welch-t";
  j["a"] = report_json(rep.a);
  j["b"] = report_json(rep.b);
  Json tests = Json::array();
  for (const auto& m : rep.metrics) {
    Json t;
    t["metric"] = m.metric;
    t["pairs"] = m.pairs;
    t["mean_a"] = m.mean_a;
    t["mean_b"] = m.mean_b;
    t["mean_difference_a_minus_b"] = m.mean_difference;
    if (m.test) {
      t["t"] = std::isfinite(m.test->t) ? Json(m.test->t) : Json(m.test->t > 0 ? "inf" : "-inf");
      t["df"] = m.test->df;
      t["p"] = m.test->p;
    } else {
      t["t"] = nullptr;
      t["df"] = nullptr;
      t["p"] = nullptr;
    }
    tests.push_back(t);
  }
  j["tests"] = tests;
  return j;
}

inline std::string comparison_table(const ComparisonReport& rep) {
  std::string out = report_table({{"A", rep.a}, {"B", rep.b}});
  out += "\n" + detail::pad("Metric", 12) + detail::pad("A-B", 12) + detail::pad("t", 12) + "p\n";
  for (const auto& m : rep.metrics) {
    out += detail::pad(m.metric, 12) + detail::pad(detail::cell(m.mean_difference), 12);
    if (m.test) {
      std::ostringstream p;
      p << std::setprecision(4) << m.test->p;
      out += detail::pad(detail::cell(m.test->t), 12) + p.str() + "\n";
    } else {
      out += detail::pad("-", 12) + "-\n";
    }
  }
  return out;
}

// --- training --------------------------------------------------------------

enum class TrainTarget { classifier, attribute_bank, filler };

inline TrainTarget parse_train_target(const std::string& s) {
  if (s == "classifier") return TrainTarget::classifier;
  if (s == "attribute-bank") return TrainTarget::attribute_bank;
  if (s == "filler") return TrainTarget::filler;
  throw Error(Errc::config_error, "unknown train target '" + s + "'");
}

struct TrainReport {
  std::string checkpoint;
  std::optional<double> heldout_accuracy;
  std::string detail;
};

/// Trains one reference backend and writes its JSON checkpoint. All input
/// paths are checked before any training starts.
inline TrainReport run_train(const RunConfig& c, TrainTarget target) {
  TrainReport rep;
  switch (target) {
    case TrainTarget::classifier: {
      require_file(c, "train_data", c.train_data);
      if (!c.test_data.empty()) require_file(c, "test_data", c.test_data);
      if (c.classifier_checkpoint.empty()) throw Error(Errc::config_error, "'classifier_checkpoint' is required");
      const auto train = as_examples(load_dataset(c.resolve(c.train_data)));
      auto tc = c.train;
      tc.seed = c.params.seed;
      const auto model = reference::train_classifier(train, tc);
      rep.checkpoint = c.resolve(c.classifier_checkpoint);
      write_file(rep.checkpoint, dump_exact(model.to_json()) + "\n");
      const auto eval_set = c.test_data.empty() ? train : as_examples(load_dataset(c.resolve(c.test_data)));
      rep.heldout_accuracy = reference::accuracy(model, eval_set);
      rep.detail = std::to_string(model.labels().size()) + " classes, vocabulary " +
                   std::to_string(model.vocabulary().size());
      break;
    }
    case TrainTarget::attribute_bank: {
      require_file(c, "attribute_spec", c.attribute_spec);
      require_file(c, "attribute_binary_data", c.attribute_binary_data);
      if (!c.attribute_multiclass_data.empty())
        require_file(c, "attribute_multiclass_data", c.attribute_multiclass_data);
      if (!c.attribute_test_data.empty()) require_file(c, "attribute_test_data", c.attribute_test_data);
      if (c.attribute_checkpoint.empty()) throw Error(Errc::config_error, "'attribute_checkpoint' is required");
      const auto spec = reference::AttributeBankSpec::from_json(read_json_file(c.resolve(c.attribute_spec)));
      reference::AttributeDatasets data;
      data.binary = as_examples(load_dataset(c.resolve(c.attribute_binary_data)));
      if (!c.attribute_multiclass_data.empty())
        data.multiclass = as_examples(load_dataset(c.resolve(c.attribute_multiclass_data)));
      auto tc = c.train;
      tc.epochs = c.attribute_epochs;
      tc.seed = c.params.seed;
      const auto bank = reference::train_attribute_bank(data, spec, tc);
      rep.checkpoint = c.resolve(c.attribute_checkpoint);
      write_file(rep.checkpoint, dump_exact(bank.to_json()) + "\n");
      if (!c.attribute_test_data.empty()) {
        // Held-out check for the binary scorers: presence iff the merged label matches.
        const auto test = as_examples(load_dataset(c.resolve(c.attribute_test_data)));
        std::size_t hits = 0, total = 0;
        for (const auto& ex : test) {
          const auto scores = bank.score_attributes(tokenize(ex.text));
          for (std::size_t a = 0; a < spec.binary_attributes.size(); ++a) {
            const auto& attr = spec.binary_attributes[a];
            auto it = attr.merge.find(ex.label);
            const std::string label = it == attr.merge.end() ? ex.label : it->second;
            hits += (scores.scores[a] > 0.5) == (label == attr.name) ? 1 : 0;
            ++total;
          }
        }
        if (total) rep.heldout_accuracy = static_cast<double>(hits) / static_cast<double>(total);
      }
      rep.detail = std::to_string(bank.size()) + " attributes";
      break;
    }
    case TrainTarget::filler: {
      require_file(c, "filler_corpus", c.filler_corpus);
      if (c.filler_checkpoint.empty()) throw Error(Errc::config_error, "'filler_checkpoint' is required");
      std::vector<std::string> corpus;
      for (const auto& r : load_dataset(c.resolve(c.filler_corpus))) corpus.push_back(r.text);
      const auto counts = reference::NgramCounts::from_corpus(corpus);
      rep.checkpoint = c.resolve(c.filler_checkpoint);
      write_file(rep.checkpoint, dump_exact(counts.to_json(2)) + "\n");
      rep.detail = std::to_string(counts.types()) + " word types, " + std::to_string(counts.tokens) + " tokens";
      break;
    }
  }
  return rep;
}

}  // namespace cat
