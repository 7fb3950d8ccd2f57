#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cat/attribution.hpp"
#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/objective.hpp"
#include "cat/random.hpp"
#include "cat/reference/embedding_bag.hpp"

namespace cat {

// Flat `key = value` document; `#` starts a comment. Relative paths resolve
// against the directory holding the config file.
struct RunConfig {
  HyperParams params;
  AttributionMethod attribution = AttributionMethod::integrated_gradients;

  std::string classifier = "embedding-bag";  // embedding-bag | keyword | constant
  std::string classifier_checkpoint;
  std::string attribute_bank = "embedding-bag";  // embedding-bag | keyword | none
  std::string attribute_checkpoint;
  std::string filler = "bigram";  // bigram | bigram-left
  std::string filler_checkpoint;
  std::string embedder = "hashed";  // hashed | classifier
  std::size_t embedder_dim = 64;
  std::string fluency = "bigram";  // bigram | unigram
  std::string fluency_checkpoint;

  std::string input;  // dataset explained by `cat explain` when --input is absent
  std::size_t sample_size = 0;

  // training
  std::string train_data;
  std::string test_data;
  std::string filler_corpus;
  std::string attribute_spec;
  std::string attribute_binary_data;
  std::string attribute_multiclass_data;
  std::string attribute_test_data;
  reference::TrainConfig train;
  std::size_t attribute_epochs = 10;

  std::size_t jobs = 1;
  std::string base_dir = ".";

  std::string resolve(const std::string& p) const {
    if (p.empty() || p == "-") return p;
    std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(Errc::config_error, "'" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw Error(Errc::config_error, "'" + key + "' expects a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw Error(Errc::config_error, "'" + key + "' is out of range");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(Errc::config_error, "'" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& base_dir = ".") {
  RunConfig c;
  c.base_dir = base_dir;
  std::map<std::string, std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config_error, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!seen.emplace(key, val).second)
      throw Error(Errc::config_error, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");

    auto& p = c.params;
    auto& t = c.train;
    if (key == "lambda") p.lambda = detail::to_double(key, val);
    else if (key == "beta") p.beta = detail::to_double(key, val);
    else if (key == "eta") p.eta = detail::to_double(key, val);
    else if (key == "nu") p.nu = detail::to_double(key, val);
    else if (key == "beam_k") p.beam_k = detail::to_uint(key, val);
    else if (key == "edit_budget") p.edit_budget = detail::to_uint(key, val);
    else if (key == "top_positions") p.top_positions = detail::to_uint(key, val);
    else if (key == "ig_steps") p.ig_steps = detail::to_uint(key, val);
    else if (key == "seed") p.seed = detail::to_uint(key, val);
    else if (key == "early_exit") p.early_exit = detail::to_bool(key, val);
    else if (key == "attribution") c.attribution = parse_attribution(val);
    else if (key == "classifier") c.classifier = val;
    else if (key == "classifier_checkpoint") c.classifier_checkpoint = val;
    else if (key == "attribute_bank") c.attribute_bank = val;
    else if (key == "attribute_checkpoint") c.attribute_checkpoint = val;
    else if (key == "filler") c.filler = val;
    else if (key == "filler_checkpoint") c.filler_checkpoint = val;
    else if (key == "embedder") c.embedder = val;
    else if (key == "embedder_dim") c.embedder_dim = detail::to_uint(key, val);
    else if (key == "fluency") c.fluency = val;
    else if (key == "fluency_checkpoint") c.fluency_checkpoint = val;
    else if (key == "input") c.input = val;
    else if (key == "sample_size") c.sample_size = detail::to_uint(key, val);
    else if (key == "train_data") c.train_data = val;
    else if (key == "test_data") c.test_data = val;
    else if (key == "filler_corpus") c.filler_corpus = val;
    else if (key == "attribute_spec") c.attribute_spec = val;
    else if (key == "attribute_binary_data") c.attribute_binary_data = val;
    else if (key == "attribute_multiclass_data") c.attribute_multiclass_data = val;
    else if (key == "attribute_test_data") c.attribute_test_data = val;
    else if (key == "learning_rate") t.learning_rate = detail::to_double(key, val);
    else if (key == "weight_decay") t.weight_decay = detail::to_double(key, val);
    else if (key == "batch_size") t.batch_size = detail::to_uint(key, val);
    else if (key == "epochs") t.epochs = detail::to_uint(key, val);
    else if (key == "attribute_epochs") c.attribute_epochs = detail::to_uint(key, val);
    else if (key == "embedding_dim") t.embedding_dim = detail::to_uint(key, val);
    else if (key == "hidden_dim") t.hidden_dim = detail::to_uint(key, val);
    else if (key == "unknown_rate") t.unknown_rate = detail::to_double(key, val);
    else if (key == "jobs") c.jobs = detail::to_uint(key, val);
    else throw Error(Errc::config_error, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  c.params.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  auto dir = std::filesystem::path(path).parent_path();
  return parse_config(text, dir.empty() ? "." : dir.string());
}

/// CAT_SEED in the environment replaces the configured seed.
inline void apply_env_overrides(RunConfig& c) {
  if (const char* s = std::getenv("CAT_SEED"); s && *s) {
    c.params.seed = detail::to_uint("CAT_SEED", s);
    c.train.seed = c.params.seed;
  }
}

inline void require_file(const RunConfig& c, const std::string& key, const std::string& value) {
  if (value.empty()) throw Error(Errc::config_error, "'" + key + "' is required");
  const std::string p = c.resolve(value);
  if (!std::filesystem::exists(p)) throw Error(Errc::config_error, "'" + key + "' points at missing file " + p);
}

namespace detail {

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_digest(const RunConfig& c, const std::string& path) {
  if (path.empty()) return "-";
  return hex64(fnv1a64(read_file(c.resolve(path))));
}

}  // namespace detail

/// Digest of every setting that can change `cat explain` output, including
/// the contents (not the paths) of the checkpoints the backends load.
inline std::string config_hash(const RunConfig& c) {
  const auto& p = c.params;
  std::ostringstream s;
  s << "lambda=" << format_double(p.lambda) << ";beta=" << format_double(p.beta)
    << ";eta=" << format_double(p.eta) << ";nu=" << format_double(p.nu) << ";beam_k=" << p.beam_k
    << ";edit_budget=" << p.edit_budget << ";top_positions=" << p.top_positions << ";ig_steps=" << p.ig_steps
    << ";seed=" << p.seed << ";early_exit=" << p.early_exit << ";attribution=" << attribution_name(c.attribution)
    << ";classifier=" << c.classifier << ":" << detail::file_digest(c, c.classifier_checkpoint)
    << ";attribute_bank=" << c.attribute_bank << ":" << detail::file_digest(c, c.attribute_checkpoint)
    << ";filler=" << c.filler << ":" << detail::file_digest(c, c.filler_checkpoint) << ";embedder=" << c.embedder
    << ":" << c.embedder_dim << ";fluency=" << c.fluency << ":" << detail::file_digest(c, c.fluency_checkpoint)
    << ";sample_size=" << c.sample_size;
  return detail::hex64(fnv1a64(s.str()));
}

}  // namespace cat
