#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace triclass::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the scalar starting at byte `pos` and advances `pos`.
/// Ill-formed sequences decode to U+FFFD and consume at least one byte.
inline char32_t next_scalar(std::string_view s, std::size_t& pos) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(s.data());
  const auto length = static_cast<std::int32_t>(s.size());
  auto i = static_cast<std::int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(bytes, i, length, c);
  pos = static_cast<std::size_t>(i);
  return c < 0 ? kReplacement : static_cast<char32_t>(c);
}

inline void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

inline std::uint32_t category_mask(char32_t c) {
  return U_MASK(u_charType(static_cast<UChar32>(c)));
}

/// Letters, marks and numbers: the scalars that make up word tokens.
inline bool is_word(char32_t c) {
  return (category_mask(c) & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
}

inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0; }

inline bool is_punctuation(char32_t c) { return (category_mask(c) & U_GC_P_MASK) != 0; }

inline bool is_decimal_digit(char32_t c) {
  return u_charType(static_cast<UChar32>(c)) == U_DECIMAL_DIGIT_NUMBER;
}

/// Anything outside letter/mark/number/punctuation/whitespace and outside
/// the ASCII range.
inline bool is_unrecognized(char32_t c) {
  if (c < 0x80) return false;
  return !is_word(c) && !is_punctuation(c) && !is_space(c);
}

inline std::size_t scalar_count(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    next_scalar(s, pos);
    ++n;
  }
  return n;
}

}  // namespace triclass::unicode
