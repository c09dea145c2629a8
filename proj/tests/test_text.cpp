#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "triclass/random.hpp"
#include "triclass/text.hpp"

using namespace triclass;
using Tokens = std::vector<std::string>;

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationIsSplitPerScalar) {
  EXPECT_EQ(tokenize("Hello, world!!"), (Tokens{"Hello", ",", "world", "!", "!"}));
}

TEST(Tokenize, DigitsJoinWords) { EXPECT_EQ(tokenize("abc123 #tag"), (Tokens{"abc123", "#", "tag"})); }

TEST(Tokenize, CombiningMarksStayInWord) {
  // Devanagari with vowel signs (category Mc/Mn) is one word.
  EXPECT_EQ(tokenize("नमस्ते दुनिया"), (Tokens{"नमस्ते", "दुनिया"}));
}

TEST(Tokenize, EmojiAreSingleTokens) { EXPECT_EQ(tokenize("ok🐶🐶"), (Tokens{"ok", "🐶", "🐶"})); }

TEST(Tokenize, UnicodeWhitespaceSeparates) {
  EXPECT_EQ(tokenize("a b　c\td\ne"), (Tokens{"a", "b", "c", "d", "e"}));
}

TEST(Tokenize, InvalidUtf8BecomesReplacement) {
  const std::string bad = std::string("ab") + char(0xFF) + "cd";
  const auto t = tokenize(bad);
  ASSERT_FALSE(t.empty());
  std::string joined;
  for (const auto& s : t) joined += s;
  EXPECT_NE(joined.find("\xEF\xBF\xBD"), std::string::npos);
}

TEST(Surface, EmptyIsZero) { EXPECT_EQ(surface_features(""), SurfaceFeatures{}); }

TEST(Surface, WorkedSentence) {
  const auto f = surface_features("I won 2 games. Really!");
  EXPECT_EQ(f.words, 5u);
  EXPECT_EQ(f.sentences, 2u);
  EXPECT_EQ(f.punctuation, 2u);
  EXPECT_EQ(f.numbers, 1u);
  EXPECT_EQ(f.emoji, 0u);
}

TEST(Surface, DogEmoji) {
  const auto f = surface_features("ok 🐶🐶");
  EXPECT_EQ(f.emoji, 2u);
  EXPECT_EQ(f.words, 1u);
  EXPECT_EQ(f.sentences, 1u);
}

TEST(Surface, Sentences) {
  EXPECT_EQ(surface_features("   ").sentences, 0u);
  EXPECT_EQ(surface_features("no terminator").sentences, 1u);
  EXPECT_EQ(surface_features("one. two").sentences, 2u);
  EXPECT_EQ(surface_features("wait... what?!").sentences, 2u);
  EXPECT_EQ(surface_features("पहला। दूसरा।").sentences, 2u);
  EXPECT_EQ(surface_features("so… yes").sentences, 2u);
  EXPECT_EQ(surface_features("!!!").sentences, 1u);
}

TEST(Surface, NumbersAreDigitRuns) {
  const auto f = surface_features("call 555 1234 or ab12cd34");
  EXPECT_EQ(f.numbers, 4u);
  EXPECT_EQ(f.words, 5u);
}

TEST(Surface, AsciiSymbolsAreNotEmoji) {
  const auto f = surface_features("a + b = c $ ^");
  EXPECT_EQ(f.emoji, 0u);
  EXPECT_EQ(f.punctuation, 0u);
}

namespace {

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces{"a",  "bc", "123", "x9", " ",  "  ", "\t", ".", "!", "?", ",",
                                               "…", "।", "🐶", "é", "ने", "\n", "#", "中文", "😀", "'"};
  std::string s;
  const std::size_t n = rng.below(15);
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng.below(pieces.size())];
  return s;
}

std::string strip_space(std::string_view s) {
  std::string out;
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t start = pos;
    const char32_t c = unicode::next_scalar(s, pos);
    if (!unicode::is_space(c)) out.append(s.substr(start, pos - start));
  }
  return out;
}

}  // namespace

TEST(TokenizeProperty, ConcatenationRebuildsNonWhitespace) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string text = random_text(rng);
    std::string joined;
    for (const auto& t : tokenize(text)) {
      ASSERT_FALSE(t.empty());
      joined += t;
    }
    ASSERT_EQ(joined, strip_space(text)) << text;
  }
}

TEST(TokenizeProperty, WordTokensAreFixedPoints) {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    for (const auto& t : tokenize(random_text(rng))) {
      ASSERT_EQ(tokenize(t), Tokens{t});
    }
  }
}

TEST(SurfaceProperty, WordsAddAcrossSpaceJoin) {
  Rng rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::string a = random_text(rng);
    const std::string b = random_text(rng);
    ASSERT_EQ(surface_features(a + " " + b).words, surface_features(a).words + surface_features(b).words)
        << a << " | " << b;
  }
}

TEST(TokenizedDoc, CarriesIdTokensAndSurface) {
  const auto d = tokenize_doc("C1", "hi there!");
  EXPECT_EQ(d.id, "C1");
  EXPECT_EQ(d.tokens, (Tokens{"hi", "there", "!"}));
  EXPECT_EQ(d.surface.words, 2u);
}
