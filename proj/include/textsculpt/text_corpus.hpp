#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "textsculpt/rng.hpp"

namespace textsculpt {

struct LexiconEntry {
  std::string word;
  double weight = 1.0;
  bool operator==(const LexiconEntry&) const = default;
};

/// Weighted word list. Entries keep first-occurrence order; duplicate words
/// have their weights summed.
class Lexicon {
 public:
  explicit Lexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  double total_weight() const { return total_weight_; }
  std::size_t size() const { return entries_.size(); }

  /// Weight-proportional draw.
  const std::string& draw(Rng& rng) const;

 private:
  std::vector<LexiconEntry> entries_;
  std::vector<double> cumulative_;
  double total_weight_ = 0.0;
};

/// Parses `word[\tweight]` lines; `#` comments and blank lines are skipped.
Lexicon load_lexicon(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon lexicon_from_lines(const std::vector<std::string>& lines);

enum class Casing { Lower, Upper, Title };

struct AugmentationPolicy {
  double p_number = 0.15;
  double p_symbol = 0.15;
  double p_casing = 0.3;
  std::vector<Casing> casing_modes{Casing::Lower, Casing::Upper, Casing::Title};
  std::string symbol_set = "!?#&@*%$+";
  int min_digits = 1;
  int max_digits = 4;

  /// Throws InvalidArgument on out-of-range probabilities or digit bounds.
  void validate() const;
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

struct TextContent {
  std::vector<std::string> words;
  std::string text;

  static TextContent from_words(std::vector<std::string> words);
  /// Splits on whitespace runs.
  static TextContent from_text(const std::string& text);

  bool empty() const { return words.empty(); }
  bool operator==(const TextContent&) const = default;
};

TextContent sample_text(const Lexicon& lexicon, const AugmentationPolicy& policy, IntRange length_range, Rng& rng);

std::string apply_casing(const std::string& s, Casing mode);
std::string join_words(const std::vector<std::string>& words);
std::vector<std::string> split_whitespace(const std::string& s);

}  // namespace textsculpt
