#include <gtest/gtest.h>

#include <cctype>
#include <sstream>

#include "test_support.hpp"
#include "textsculpt/error.hpp"
#include "textsculpt/text_corpus.hpp"

using namespace textsculpt;

namespace {

AugmentationPolicy no_augment() {
  AugmentationPolicy p;
  p.p_number = p.p_symbol = p.p_casing = 0.0;
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

bool has_digit(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

TEST(Lexicon, SingleEntryDefaultWeight) {
  const auto lex = lexicon_from_lines({"open"});
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex.entries()[0], (LexiconEntry{"open", 1.0}));
  EXPECT_DOUBLE_EQ(lex.total_weight(), 1.0);
}

TEST(Lexicon, DuplicatesMergeBySummingWeights) {
  const auto lex = lexicon_from_lines({"open\t2.0", "now\t1.0", "open\t1.0"});
  ASSERT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.entries()[0], (LexiconEntry{"open", 3.0}));
  EXPECT_EQ(lex.entries()[1], (LexiconEntry{"now", 1.0}));
  EXPECT_DOUBLE_EQ(lex.total_weight(), 4.0);
}

TEST(Lexicon, TenThousandLinesTotalMatchesIndependentSum) {
  Rng rng(11);
  std::ostringstream doc;
  double oracle = 0;
  doc << "# generated\n\n";
  for (int i = 0; i < 10000; ++i) {
    const int w = rng.uniform_int(1, 500);
    oracle += w / 8.0;
    doc << "w" << i << '\t' << (w / 8.0) << '\n';
  }
  std::istringstream in(doc.str());
  const auto lex = load_lexicon(in);
  EXPECT_EQ(lex.size(), 10000u);
  EXPECT_DOUBLE_EQ(lex.total_weight(), oracle);
}

TEST(Lexicon, ShippedWordListLoads) {
  const auto lex = load_lexicon(tstest::data_dir() / "lexicon" / "words.txt");
  EXPECT_GT(lex.size(), 100u);
  for (const auto& e : lex.entries()) EXPECT_FALSE(has_digit(e.word)) << e.word;
}

TEST(Lexicon, Errors) {
  EXPECT_EQ(code_of([] { lexicon_from_lines({}); }), ErrorCode::EmptyLexicon);
  EXPECT_EQ(code_of([] { lexicon_from_lines({"# only a comment", "   "}); }), ErrorCode::EmptyLexicon);
  EXPECT_EQ(code_of([] { lexicon_from_lines({"open\tabc"}); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { lexicon_from_lines({"open\t-1"}); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { lexicon_from_lines({"two words\t1"}); }), ErrorCode::MalformedLine);
  EXPECT_EQ(code_of([] { lexicon_from_lines({"a\t0"}); }), ErrorCode::EmptyLexicon);
}

TEST(SampleText, SingleOutcome) {
  const auto lex = lexicon_from_lines({"open"});
  Rng rng(1);
  const auto t = sample_text(lex, no_augment(), {1, 1}, rng);
  EXPECT_EQ(t, TextContent::from_words({"open"}));
  EXPECT_EQ(t.text, "open");
}

TEST(SampleText, UpperCasingIsPhraseGlobal) {
  const auto lex = lexicon_from_lines({"open", "now"});
  auto p = no_augment();
  p.p_casing = 1.0;
  p.casing_modes = {Casing::Upper};
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto t = sample_text(lex, p, {2, 2}, rng);
    ASSERT_EQ(t.words.size(), 2u);
    for (const auto& w : t.words) EXPECT_TRUE(w == "OPEN" || w == "NOW") << w;
  }
  EXPECT_EQ(apply_casing("open now", Casing::Upper), "OPEN NOW");
  EXPECT_EQ(apply_casing("oPEN nOW", Casing::Title), "Open Now");
  EXPECT_EQ(apply_casing("OPEN", Casing::Lower), "open");
}

TEST(SampleText, NumberProbabilityMatchesFrequency) {
  const auto lex = load_lexicon(tstest::data_dir() / "lexicon" / "words.txt");
  auto p = no_augment();
  p.p_number = 0.3;
  Rng rng(20240601);
  int with_digit = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    if (has_digit(sample_text(lex, p, {1, 4}, rng).text)) ++with_digit;
  const double frac = static_cast<double>(with_digit) / n;
  EXPECT_GE(frac, 0.28);
  EXPECT_LE(frac, 0.32);
}

TEST(SampleText, WeightProportional) {
  const auto lex = lexicon_from_lines({"a\t3", "b\t1"});
  Rng rng(77);
  int a = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (sample_text(lex, no_augment(), {1, 1}, rng).words[0] == "a") ++a;
  EXPECT_NEAR(static_cast<double>(a) / n, 0.75, 0.01);
}

TEST(SampleText, Deterministic) {
  const auto lex = load_lexicon(tstest::data_dir() / "lexicon" / "words.txt");
  AugmentationPolicy p;
  Rng a(9), b(9);
  for (int i = 0; i < 500; ++i) ASSERT_EQ(sample_text(lex, p, {1, 5}, a), sample_text(lex, p, {1, 5}, b));
}

TEST(SampleText, WordsWhitespaceFreeAndCountInRange) {
  const auto lex = load_lexicon(tstest::data_dir() / "lexicon" / "words.txt");
  AugmentationPolicy p;
  p.p_number = 0.6;
  p.p_symbol = 0.6;
  p.p_casing = 0.6;
  Rng rng(123);
  for (int i = 0; i < 5000; ++i) {
    const IntRange r{1 + i % 4, 1 + i % 4 + i % 3};
    const auto t = sample_text(lex, p, r, rng);
    ASSERT_GE(static_cast<int>(t.words.size()), r.lo);
    ASSERT_LE(static_cast<int>(t.words.size()), r.hi);
    ASSERT_EQ(t.text, join_words(t.words));
    for (const auto& w : t.words) {
      ASSERT_FALSE(w.empty());
      for (char c : w) ASSERT_FALSE(std::isspace(static_cast<unsigned char>(c)));
    }
  }
}

TEST(SampleText, SymbolsOnlyAtWordBoundaries) {
  const auto lex = lexicon_from_lines({"open"});
  auto p = no_augment();
  p.p_symbol = 1.0;
  p.symbol_set = "#";
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto t = sample_text(lex, p, {1, 1}, rng);
    EXPECT_TRUE(t.text == "#open" || t.text == "open#") << t.text;
  }
}

TEST(AugmentationPolicy, Validate) {
  AugmentationPolicy p;
  EXPECT_NO_THROW(p.validate());
  p.p_number = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.min_digits = 3;
  p.max_digits = 2;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.max_digits = 7;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.casing_modes.clear();
  EXPECT_THROW(p.validate(), Error);
}

TEST(TextContent, FromTextSplitsWhitespaceRuns) {
  const auto t = TextContent::from_text("  OPEN \t NOW\n");
  EXPECT_EQ(t.words, (std::vector<std::string>{"OPEN", "NOW"}));
  EXPECT_EQ(t.text, "OPEN NOW");
}
