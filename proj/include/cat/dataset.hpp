#pragma once

#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cat/error.hpp"
#include "cat/json_io.hpp"
#include "cat/random.hpp"
#include "cat/reference/embedding_bag.hpp"
#include "cat/text.hpp"

namespace cat {

struct DatasetRecord {
  std::string id;
  std::string text;
  std::string label;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// One JSON object per line with string keys id/text/label (exactly those).
/// Blank lines are skipped; line numbers in errors are 1-based.
inline std::vector<DatasetRecord> load_dataset(std::istream& in, const std::string& source = "<stream>") {
  std::vector<DatasetRecord> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(Errc::malformed_record, where + ": " + e.what());
    }
    if (!j.is_object()) throw Error(Errc::malformed_record, where + ": expected a JSON object");
    for (const char* key : {"id", "text", "label"})
      if (!j.contains(key) || !j.at(key).is_string())
        throw Error(Errc::malformed_record, where + ": missing string field \"" + key + "\"");
    if (j.size() != 3) throw Error(Errc::malformed_record, where + ": unexpected extra fields");
    DatasetRecord r{j.at("id").get<std::string>(), j.at("text").get<std::string>(), j.at("label").get<std::string>()};
    if (normalize(r.text).empty()) throw Error(Errc::malformed_record, where + ": empty text");
    if (!ids.insert(r.id).second) throw Error(Errc::duplicate_id, where + ": duplicate id '" + r.id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::istringstream in(read_file(path));
  return load_dataset(in, path);
}

inline reference::Dataset as_examples(const std::vector<DatasetRecord>& records) {
  reference::Dataset out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.text, r.label});
  return out;
}

/// Uniform sample of `n` records without replacement, kept in file order.
/// n == 0 or n >= size returns everything.
inline std::vector<DatasetRecord> sample_records(const std::vector<DatasetRecord>& records, std::size_t n,
                                                 std::uint64_t seed) {
  if (n == 0 || n >= records.size()) return records;
  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<DatasetRecord> out;
  for (std::size_t i : idx) out.push_back(records[i]);
  return out;
}

}  // namespace cat
