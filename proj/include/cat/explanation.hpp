#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/models.hpp"
#include "cat/objective.hpp"
#include "cat/text.hpp"

namespace cat {

struct InstanceMetrics {
  double dist = 0.0;     // normalized word Levenshtein
  double cont = 0.0;     // cosine of sentence embeddings
  double fluency = 0.0;  // lm_loss(contrast) / lm_loss(input)

  friend bool operator==(const InstanceMetrics&, const InstanceMetrics&) = default;
};

struct Explanation {
  TokenizedText input;
  ClassDistribution input_dist;
  TokenizedText contrast;
  ClassDistribution contrast_dist;
  EditPath path;
  std::vector<AttributeDelta> attribute_changes;
  ObjectiveBreakdown objective;
  std::optional<InstanceMetrics> metrics;

  const std::string& input_label() const { return input_dist.argmax_label(); }
  const std::string& contrast_label() const { return contrast_dist.argmax_label(); }

  friend bool operator==(const Explanation& a, const Explanation& b) {
    return a.input == b.input && a.input.raw == b.input.raw && a.input_dist == b.input_dist &&
           a.contrast == b.contrast && a.contrast_dist == b.contrast_dist && a.path == b.path &&
           a.attribute_changes == b.attribute_changes && a.objective == b.objective && a.metrics == b.metrics;
  }
};

enum class ExplanationStatus { ok, no_contrast };

/// One line of an explanation file. For no_contrast only the input side of
/// `explanation` is meaningful.
struct ExplanationRecord {
  std::string id;
  ExplanationStatus status = ExplanationStatus::ok;
  Explanation explanation;
  std::uint64_t seed = 0;
  std::string config_hash;

  friend bool operator==(const ExplanationRecord&, const ExplanationRecord&) = default;
};

namespace detail {

inline Json probs_json(const ClassDistribution& d) {
  Json j = Json::object();
  for (std::size_t i = 0; i < d.size(); ++i) j[d.labels[i]] = d.probabilities[i];
  return j;
}

inline ClassDistribution probs_from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::malformed_record, "probabilities must be an object keyed by label");
  ClassDistribution d;
  for (auto it = j.begin(); it != j.end(); ++it) {
    d.labels.push_back(it.key());
    d.probabilities.push_back(it.value().get<double>());
  }
  return d;
}

inline Json objective_json(const ObjectiveBreakdown& b) {
  Json j;
  j["attr_linf"] = b.attr_linf;
  j["attr_changed_count"] = b.attr_changed_count;
  j["contrast_gain"] = b.contrast_gain;
  j["lm_surrogate"] = b.lm_surrogate;
  j["lev_raw"] = b.lev_raw;
  j["total"] = b.total;
  return j;
}

inline ObjectiveBreakdown objective_from_json(const Json& j) {
  ObjectiveBreakdown b;
  b.attr_linf = j.at("attr_linf").get<double>();
  b.attr_changed_count = j.at("attr_changed_count").get<std::size_t>();
  b.contrast_gain = j.at("contrast_gain").get<double>();
  b.lm_surrogate = j.at("lm_surrogate").get<double>();
  b.lev_raw = j.at("lev_raw").get<std::size_t>();
  b.total = j.at("total").get<double>();
  return b;
}

inline Json edit_json(const Edit& e) {
  Json j;
  j["kind"] = edit_kind_name(e.kind);
  j["position"] = e.position;
  j["old"] = e.old_word ? Json(*e.old_word) : Json(nullptr);
  j["new"] = e.new_word ? Json(*e.new_word) : Json(nullptr);
  return j;
}

inline Edit edit_from_json(const Json& j) {
  Edit e;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "substitute")
    e.kind = EditKind::substitute;
  else if (kind == "insert")
    e.kind = EditKind::insert;
  else if (kind == "delete")
    e.kind = EditKind::remove;
  else
    throw Error(Errc::malformed_record, "unknown edit kind '" + kind + "'");
  e.position = j.at("position").get<std::size_t>();
  if (!j.at("old").is_null()) e.old_word = j.at("old").get<std::string>();
  if (!j.at("new").is_null()) e.new_word = j.at("new").get<std::string>();
  return e;
}

}  // namespace detail

inline Json to_json(const ExplanationRecord& r) {
  const Explanation& e = r.explanation;
  const bool ok = r.status == ExplanationStatus::ok;
  Json j;
  j["id"] = r.id;
  j["status"] = ok ? "ok" : "no_contrast";
  j["input_text"] = e.input.raw;
  j["input_label"] = e.input_label();
  j["input_probs"] = detail::probs_json(e.input_dist);
  if (ok) {
    j["contrast_text"] = e.contrast.joined();
    j["contrast_label"] = e.contrast_label();
    j["contrast_probs"] = detail::probs_json(e.contrast_dist);
  }
  Json edits = Json::array();
  for (const auto& ed : e.path) edits.push_back(detail::edit_json(ed));
  j["edits"] = edits;
  Json changes = Json::array();
  for (const auto& d : e.attribute_changes)
    changes.push_back({{"name", d.name},
                       {"direction", d.direction == AttributeDirection::added ? "added" : "removed"},
                       {"delta", d.delta}});
  j["attribute_changes"] = changes;
  if (ok) {
    j["objective"] = detail::objective_json(e.objective);
    if (e.metrics)
      j["metrics"] = {{"dist", e.metrics->dist}, {"cont", e.metrics->cont}, {"fluency", e.metrics->fluency}};
  }
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  return j;
}

inline std::string to_jsonl_line(const ExplanationRecord& r) { return dump_exact(to_json(r)); }

inline ExplanationRecord record_from_json(const Json& j) {
  try {
    ExplanationRecord r;
    r.id = j.at("id").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "ok")
      r.status = ExplanationStatus::ok;
    else if (status == "no_contrast")
      r.status = ExplanationStatus::no_contrast;
    else
      throw Error(Errc::malformed_record, "unknown status '" + status + "'");
    Explanation& e = r.explanation;
    e.input = tokenize(j.at("input_text").get<std::string>());
    e.input_dist = detail::probs_from_json(j.at("input_probs"));
    if (e.input_label() != j.at("input_label").get<std::string>())
      throw Error(Errc::malformed_record, "input_label disagrees with input_probs");
    if (r.status == ExplanationStatus::ok) {
      e.contrast = tokenize(j.at("contrast_text").get<std::string>());
      e.contrast.raw = e.contrast.joined();
      e.contrast_dist = detail::probs_from_json(j.at("contrast_probs"));
      if (e.contrast_label() != j.at("contrast_label").get<std::string>())
        throw Error(Errc::malformed_record, "contrast_label disagrees with contrast_probs");
      e.objective = detail::objective_from_json(j.at("objective"));
      if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        e.metrics = InstanceMetrics{m.at("dist").get<double>(), m.at("cont").get<double>(),
                                    m.at("fluency").get<double>()};
      }
    }
    for (const auto& ed : j.at("edits")) e.path.push_back(detail::edit_from_json(ed));
    for (const auto& d : j.at("attribute_changes")) {
      const auto dir = d.at("direction").get<std::string>();
      if (dir != "added" && dir != "removed") throw Error(Errc::malformed_record, "bad attribute direction");
      e.attribute_changes.push_back({d.at("name").get<std::string>(),
                                     dir == "added" ? AttributeDirection::added : AttributeDirection::removed,
                                     d.at("delta").get<double>()});
    }
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    return r;
  } catch (const Json::exception& ex) {
    throw Error(Errc::malformed_record, ex.what());
  }
}

inline ExplanationRecord parse_jsonl_line(std::string_view line) {
  try {
    return record_from_json(Json::parse(line));
  } catch (const Json::parse_error& ex) {
    throw Error(Errc::malformed_record, ex.what());
  }
}

// --- rendering -------------------------------------------------------------

enum class RenderStyle { plain_diff, json };

enum class AlignOp { keep, substitute, insert, remove };

struct AlignStep {
  AlignOp op;
  std::string old_word;
  std::string new_word;
};

/// Minimal word alignment from the Levenshtein table; on ties prefers a
/// substitution, then a deletion, then an insertion.
inline std::vector<AlignStep> align_words(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1)});

  std::vector<AlignStep> steps;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] && at(i, j) == at(i - 1, j - 1)) {
      steps.push_back({AlignOp::keep, a[i - 1], b[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
      steps.push_back({AlignOp::substitute, a[i - 1], b[j - 1]});
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      steps.push_back({AlignOp::remove, a[i - 1], {}});
      --i;
    } else {
      steps.push_back({AlignOp::insert, {}, b[j - 1]});
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

namespace detail {

inline bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Shared affixes are pulled out of the markers only when they start (or end)
// at a punctuation boundary, so "file-swapping" -> "salary-swapping" renders
// as [-file-]{+salary+}-swapping while "cat" -> "bat" stays whole.
inline std::string render_substitution(const std::string& old_w, const std::string& new_w) {
  std::size_t pre = 0;
  const std::size_t limit = std::min(old_w.size(), new_w.size());
  std::size_t p = 0;
  while (p < limit && old_w[p] == new_w[p]) {
    ++p;
    if (!is_word_char(old_w[p - 1])) pre = p;
  }
  std::size_t suf = 0;
  std::size_t s = 0;
  while (s < limit - pre && old_w[old_w.size() - 1 - s] == new_w[new_w.size() - 1 - s]) {
    ++s;
    if (!is_word_char(old_w[old_w.size() - s])) suf = s;
  }
  const std::string old_core = old_w.substr(pre, old_w.size() - pre - suf);
  const std::string new_core = new_w.substr(pre, new_w.size() - pre - suf);
  if (old_core.empty() || new_core.empty()) return "[-" + old_w + "-]{+" + new_w + "+}";
  return old_w.substr(0, pre) + "[-" + old_core + "-]{+" + new_core + "+}" + old_w.substr(old_w.size() - suf);
}

}  // namespace detail

inline std::string render_diff(const TokenizedText& input, const TokenizedText& contrast) {
  std::string out;
  for (const auto& st : align_words(input.words, contrast.words)) {
    if (!out.empty()) out += ' ';
    switch (st.op) {
      case AlignOp::keep: out += st.old_word; break;
      case AlignOp::substitute: out += detail::render_substitution(st.old_word, st.new_word); break;
      case AlignOp::insert: out += "{+" + st.new_word + "+}"; break;
      case AlignOp::remove: out += "[-" + st.old_word + "-]"; break;
    }
  }
  return out;
}

inline std::string render_attribute_changes(const std::vector<AttributeDelta>& deltas) {
  if (deltas.empty()) return "none";
  std::string out;
  for (auto dir : {AttributeDirection::added, AttributeDirection::removed})
    for (const auto& d : deltas) {
      if (d.direction != dir) continue;
      if (!out.empty()) out += ' ';
      out += (dir == AttributeDirection::added ? '+' : '-') + d.name;
    }
  return out;
}

inline std::string render_explanation(const Explanation& e, RenderStyle style) {
  if (style == RenderStyle::json) {
    ExplanationRecord r{"", ExplanationStatus::ok, e, 0, ""};
    return to_jsonl_line(r);
  }
  std::string out;
  out += "input:      " + e.input.joined() + "\n";
  out += "contrast:   " + render_diff(e.input, e.contrast) + "\n";
  out += "prediction: " + e.input_label() + " -> " + e.contrast_label() + "\n";
  out += "attributes: " + render_attribute_changes(e.attribute_changes) + "\n";
  return out;
}

inline Explanation parse_rendered_json(std::string_view s) { return parse_jsonl_line(s).explanation; }

}  // namespace cat
