#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cat/error.hpp"

namespace cat {

// Word sequence plus the string it was built from. Words are lowercase and
// whitespace-free; punctuation stays glued to the word it touches.
struct TokenizedText {
  std::vector<std::string> words;
  std::string raw;

  std::size_t size() const noexcept { return words.size(); }
  bool empty() const noexcept { return words.empty(); }

  std::string joined() const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    return out;
  }

  friend bool operator==(const TokenizedText& a, const TokenizedText& b) { return a.words == b.words; }
};

inline std::string normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char ch : raw) {
    if (std::isspace(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(ch));
  }
  return out;
}

inline TokenizedText tokenize(std::string_view raw) {
  TokenizedText t;
  t.raw = std::string(raw);
  const std::string norm = normalize(raw);
  if (norm.empty()) throw Error(Errc::empty_text, "text is empty after normalization");
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    t.words.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return t;
}

inline TokenizedText from_words(std::vector<std::string> words) {
  TokenizedText t;
  t.words = std::move(words);
  t.raw = t.joined();
  return t;
}

enum class EditKind { substitute, insert, remove };

constexpr std::string_view edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::substitute: return "substitute";
    case EditKind::insert: return "insert";
    case EditKind::remove: return "delete";
  }
  return "?";
}

// For inserts `position` is a gap index in [0, len]: the new word lands
// before the word currently at `position`.
struct Edit {
  EditKind kind = EditKind::substitute;
  std::size_t position = 0;
  std::optional<std::string> new_word;  // absent for delete
  std::optional<std::string> old_word;  // absent for insert

  static Edit substitute(std::size_t pos, std::string old_w, std::string new_w) {
    return {EditKind::substitute, pos, std::move(new_w), std::move(old_w)};
  }
  static Edit insert(std::size_t gap, std::string new_w) {
    return {EditKind::insert, gap, std::move(new_w), std::nullopt};
  }
  static Edit remove(std::size_t pos, std::string old_w) {
    return {EditKind::remove, pos, std::nullopt, std::move(old_w)};
  }

  friend bool operator==(const Edit&, const Edit&) = default;
};

// Each edit is indexed against the text produced by all earlier edits.
using EditPath = std::vector<Edit>;

namespace detail {

inline void check_word(const std::optional<std::string>& w, const char* what) {
  if (!w || w->empty() ||
      std::any_of(w->begin(), w->end(), [](unsigned char c) { return std::isspace(c) != 0; }))
    throw Error(Errc::invalid_edit, std::string(what) + " must be a single non-empty word");
}

}  // namespace detail

inline void apply_edit_in_place(std::vector<std::string>& words, const Edit& e) {
  switch (e.kind) {
    case EditKind::substitute: {
      if (e.position >= words.size())
        throw Error(Errc::invalid_edit, "substitute position " + std::to_string(e.position) + " out of bounds");
      detail::check_word(e.new_word, "substitute word");
      if (e.old_word && *e.old_word != words[e.position])
        throw Error(Errc::invalid_edit, "substitute old word '" + *e.old_word + "' does not match '" +
                                            words[e.position] + "'");
      if (*e.new_word == words[e.position])
        throw Error(Errc::invalid_edit, "substitute repeats the old word '" + *e.new_word + "'");
      words[e.position] = *e.new_word;
      break;
    }
    case EditKind::insert: {
      if (e.position > words.size())
        throw Error(Errc::invalid_edit, "insert gap " + std::to_string(e.position) + " out of bounds");
      detail::check_word(e.new_word, "insert word");
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(e.position), *e.new_word);
      break;
    }
    case EditKind::remove: {
      if (e.position >= words.size())
        throw Error(Errc::invalid_edit, "delete position " + std::to_string(e.position) + " out of bounds");
      if (e.old_word && *e.old_word != words[e.position])
        throw Error(Errc::invalid_edit, "delete old word '" + *e.old_word + "' does not match '" +
                                            words[e.position] + "'");
      if (words.size() == 1) throw Error(Errc::invalid_edit, "cannot delete the only word");
      words.erase(words.begin() + static_cast<std::ptrdiff_t>(e.position));
      break;
    }
  }
}

inline TokenizedText apply_edits(const TokenizedText& x, std::span<const Edit> path) {
  if (path.empty()) return x;
  std::vector<std::string> words = x.words;
  for (const Edit& e : path) apply_edit_in_place(words, e);
  return from_words(std::move(words));
}

// Classic two-row dynamic program over whole words.
inline std::size_t word_levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t word_levenshtein(const TokenizedText& a, const TokenizedText& b) {
  return word_levenshtein(std::span<const std::string>(a.words), std::span<const std::string>(b.words));
}

/// Reported Dist metric: raw word distance over the input's word count.
inline double normalized_levenshtein(const TokenizedText& input, const TokenizedText& contrast) {
  if (input.empty()) throw Error(Errc::empty_text, "normalized distance needs a non-empty input");
  return static_cast<double>(word_levenshtein(input, contrast)) / static_cast<double>(input.size());
}

}  // namespace cat
