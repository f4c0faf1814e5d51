#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "warpbci/error.hpp"

namespace warpbci {

// Phone keypad letter groups, keys 2-9.
struct T9Map {
  static constexpr std::array<std::string_view, 8> kGroups = {"abc", "def", "ghi", "jkl",
                                                              "mno", "pqrs", "tuv", "wxyz"};

  static constexpr std::string_view letters(char key) {
    return key >= '2' && key <= '9' ? kGroups[static_cast<std::size_t>(key - '2')]
                                    : std::string_view{};
  }

  static constexpr char key_for(char letter) {
    for (std::size_t k = 0; k < kGroups.size(); ++k) {
      if (kGroups[k].find(letter) != std::string_view::npos) return static_cast<char>('2' + k);
    }
    return '\0';
  }
};

inline bool is_lower_alpha(std::string_view w) {
  return std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

inline std::string encode_t9(std::string_view word) {
  std::string digits;
  digits.reserve(word.size());
  for (char ch : word) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const char key = lower >= 'a' && lower <= 'z' ? T9Map::key_for(lower) : '\0';
    if (!key) throw NonAlphabetic("cannot encode '" + std::string(word) + "' on a T9 keypad");
    digits.push_back(key);
  }
  return digits;
}

struct WordCount {
  std::string word;
  std::uint64_t count{0};
};

// Unigram dictionary with digit-string and letter-prefix lookups. Immutable
// once built. Suggestions list words exactly as long as the query before
// longer completions, each group by count descending, then alphabetically.
class Lexicon {
 public:
  Lexicon() = default;

  // Duplicate words (after lowercasing) have their counts summed; words
  // below min_count are dropped afterwards.
  explicit Lexicon(const std::vector<WordCount>& entries, std::uint64_t min_count = 0) {
    std::map<std::string, std::uint64_t> merged;
    for (const auto& e : entries) {
      std::string w = e.word;
      for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (w.empty() || !is_lower_alpha(w)) throw NonAlphabetic("non-alphabetic word '" + e.word + "'");
      merged[w] += e.count;
    }
    for (auto& [w, c] : merged) {
      if (c >= min_count) words_.push_back({w, c});
    }
    // words_ is alphabetical; by_code_ orders by digit string, then word.
    codes_.reserve(words_.size());
    for (const auto& w : words_) codes_.push_back(encode_t9(w.word));
    by_code_.resize(words_.size());
    for (std::size_t i = 0; i < by_code_.size(); ++i) by_code_[i] = i;
    std::sort(by_code_.begin(), by_code_.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(codes_[a], words_[a].word) < std::tie(codes_[b], words_[b].word);
    });
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::size_t skipped() const { return skipped_; }
  const std::vector<WordCount>& words() const { return words_; }

  std::uint64_t count(std::string_view word) const {
    auto it = std::lower_bound(words_.begin(), words_.end(), word,
                               [](const WordCount& w, std::string_view v) { return w.word < v; });
    return it != words_.end() && it->word == word ? it->count : 0;
  }

  // Words whose T9 encoding starts with digits.
  std::vector<std::string> suggest_t9(std::string_view digits, std::size_t limit = 5) const {
    for (char d : digits) {
      if (d < '2' || d > '9') throw ArgError("T9 digits must be 2-9");
    }
    auto lo = std::lower_bound(by_code_.begin(), by_code_.end(), digits,
                               [&](std::size_t i, std::string_view d) { return codes_[i] < d; });
    std::vector<std::size_t> hits;
    for (auto it = lo; it != by_code_.end() && std::string_view(codes_[*it]).starts_with(digits); ++it) {
      hits.push_back(*it);
    }
    return rank(std::move(hits), digits.size(), limit);
  }

  // Words starting with the (case-insensitive) letter prefix.
  std::vector<std::string> suggest_prefix(std::string_view letters, std::size_t limit = 5) const {
    std::string prefix(letters);
    for (char& c : prefix) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!is_lower_alpha(prefix)) throw NonAlphabetic("prefix must be alphabetic");
    auto lo = std::lower_bound(words_.begin(), words_.end(), prefix,
                               [](const WordCount& w, const std::string& p) { return w.word < p; });
    std::vector<std::size_t> hits;
    for (auto it = lo; it != words_.end() && it->word.starts_with(prefix); ++it) {
      hits.push_back(static_cast<std::size_t>(it - words_.begin()));
    }
    return rank(std::move(hits), prefix.size(), limit);
  }

  friend Lexicon read_lexicon(std::istream& in, std::uint64_t min_count);

 private:
  std::vector<std::string> rank(std::vector<std::size_t> hits, std::size_t query_len,
                                std::size_t limit) const {
    auto key = [&](std::size_t i) {
      return std::tuple<bool, std::uint64_t, const std::string&>(
          words_[i].word.size() != query_len, ~words_[i].count, words_[i].word);
    };
    const std::size_t keep = std::min(limit, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                      [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < keep; ++i) out.push_back(words_[hits[i]].word);
    return out;
  }

  std::vector<WordCount> words_;
  std::vector<std::string> codes_;
  std::vector<std::size_t> by_code_;
  std::size_t skipped_{0};
};

// `word<TAB>count` lines. Tokens with non-letters are skipped and counted;
// lines without a tab or with a bad count are format errors.
inline Lexicon read_lexicon(std::istream& in, std::uint64_t min_count = 0) {
  std::vector<WordCount> entries;
  std::size_t skipped = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(lineno, "expected word<TAB>count");
    std::string word = line.substr(0, tab);
    const std::string_view num = std::string_view(line).substr(tab + 1);
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), count);
    if (ec != std::errc{} || ptr != num.data() + num.size()) {
      throw FormatError(lineno, "bad count '" + std::string(num) + "'");
    }
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (word.empty() || !is_lower_alpha(word)) {
      ++skipped;
      continue;
    }
    entries.push_back({std::move(word), count});
  }
  Lexicon lex(entries, min_count);
  lex.skipped_ = skipped;
  return lex;
}

inline Lexicon load_lexicon(const std::string& path, std::uint64_t min_count = 0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon '" + path + "'");
  return read_lexicon(in, min_count);
}

}  // namespace warpbci
