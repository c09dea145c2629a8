#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "triclass/unicode.hpp"

namespace triclass {

/// The five per-message surface counts.
struct SurfaceFeatures {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t punctuation = 0;
  std::size_t numbers = 0;
  std::size_t emoji = 0;

  static constexpr std::size_t kWidth = 5;

  std::array<double, kWidth> as_array() const {
    return {static_cast<double>(words), static_cast<double>(sentences),
            static_cast<double>(punctuation), static_cast<double>(numbers),
            static_cast<double>(emoji)};
  }

  friend bool operator==(const SurfaceFeatures&, const SurfaceFeatures&) = default;
};

/// Splits text into word tokens (maximal runs of letters, marks and
/// numbers) and single-scalar tokens for every other non-whitespace
/// scalar. No case folding or normalization is applied.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t start = pos;
    const char32_t c = unicode::next_scalar(text, pos);
    if (unicode::is_word(c)) {
      // Keep the original bytes unless the sequence was ill-formed.
      if (c == unicode::kReplacement) {
        unicode::append_utf8(word, c);
      } else {
        word.append(text.substr(start, pos - start));
      }
      continue;
    }
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
    if (unicode::is_space(c)) continue;
    std::string single;
    if (c == unicode::kReplacement) {
      unicode::append_utf8(single, c);
    } else {
      single.assign(text.substr(start, pos - start));
    }
    tokens.push_back(std::move(single));
  }
  if (!word.empty()) tokens.push_back(std::move(word));
  return tokens;
}

inline bool is_sentence_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U'…' || c == U'।';
}

inline SurfaceFeatures surface_features(std::string_view text) {
  SurfaceFeatures f;
  bool in_word = false;
  bool in_digits = false;
  bool segment_has_content = false;
  bool in_terminator_run = false;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t c = unicode::next_scalar(text, pos);

    const bool word = unicode::is_word(c);
    if (word && !in_word) ++f.words;
    in_word = word;

    const bool digit = unicode::is_decimal_digit(c);
    if (digit && !in_digits) ++f.numbers;
    in_digits = digit;

    if (unicode::is_punctuation(c)) ++f.punctuation;
    if (unicode::is_unrecognized(c)) ++f.emoji;

    // A sentence is a segment holding at least one non-whitespace scalar,
    // closed by a run of terminators or by the end of the text.
    if (is_sentence_terminator(c)) {
      segment_has_content = true;
      in_terminator_run = true;
    } else if (!unicode::is_space(c)) {
      if (in_terminator_run) {
        ++f.sentences;
        in_terminator_run = false;
      }
      segment_has_content = true;
    }
  }
  if (segment_has_content) ++f.sentences;
  return f;
}

/// Tokens plus surface counts for one instance.
struct TokenizedDoc {
  std::string id;
  std::vector<std::string> tokens;
  SurfaceFeatures surface;
};

inline TokenizedDoc tokenize_doc(std::string id, std::string_view text) {
  return TokenizedDoc{std::move(id), tokenize(text), surface_features(text)};
}

}  // namespace triclass
