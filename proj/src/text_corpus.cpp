#include "textsculpt/text_corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "textsculpt/error.hpp"

namespace textsculpt {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Lexicon::Lexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::EmptyLexicon, "lexicon has no entries");
  cumulative_.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.word.empty() || std::any_of(e.word.begin(), e.word.end(), is_space))
      throw Error(ErrorCode::InvalidArgument, "lexicon word must be nonempty and whitespace-free");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
      throw Error(ErrorCode::InvalidArgument, "lexicon weight must be finite and nonnegative: " + e.word);
    total_weight_ += e.weight;
    cumulative_.push_back(total_weight_);
  }
  if (!(total_weight_ > 0.0)) throw Error(ErrorCode::EmptyLexicon, "lexicon total weight is zero");
}

const std::string& Lexicon::draw(Rng& rng) const {
  const double u = rng.uniform01() * total_weight_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  // Skip zero-weight entries that share a cumulative value with their predecessor.
  auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  while (entries_[idx].weight == 0.0 && idx + 1 < entries_.size()) ++idx;
  return entries_[idx].word;
}

Lexicon lexicon_from_lines(const std::vector<std::string>& lines) {
  std::vector<LexiconEntry> entries;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  for (const auto& raw : lines) {
    ++line_no;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;

    std::string word;
    double weight = 1.0;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      word = trim(line);
    } else {
      word = trim(std::string_view(line).substr(0, tab));
      const std::string w = trim(std::string_view(line).substr(tab + 1));
      const char* end = w.data() + w.size();
      auto [ptr, ec] = std::from_chars(w.data(), end, weight);
      if (w.empty() || ec != std::errc() || ptr != end || !std::isfinite(weight) || weight < 0.0)
        throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": bad weight '" + w + "'");
    }
    if (word.empty() || std::any_of(word.begin(), word.end(), is_space))
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": bad word '" + word + "'");

    if (auto it = index.find(word); it != index.end()) {
      entries[it->second].weight += weight;
    } else {
      index.emplace(word, entries.size());
      entries.push_back({word, weight});
    }
  }
  if (entries.empty()) throw Error(ErrorCode::EmptyLexicon, "no valid lexicon lines");
  return Lexicon(std::move(entries));
}

Lexicon load_lexicon(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return lexicon_from_lines(lines);
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open lexicon " + path.string());
  return load_lexicon(in);
}

void AugmentationPolicy::validate() const {
  for (double p : {p_number, p_symbol, p_casing})
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0,1]");
  if (casing_modes.empty()) throw Error(ErrorCode::InvalidArgument, "casing_modes must be nonempty");
  if (symbol_set.empty() || std::any_of(symbol_set.begin(), symbol_set.end(), is_space))
    throw Error(ErrorCode::InvalidArgument, "symbol_set must be nonempty and whitespace-free");
  if (min_digits < 1 || max_digits > 6 || min_digits > max_digits)
    throw Error(ErrorCode::InvalidArgument, "digit range must satisfy 1 <= min <= max <= 6");
}

std::vector<std::string> split_whitespace(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

TextContent TextContent::from_words(std::vector<std::string> words) {
  TextContent c;
  c.text = join_words(words);
  c.words = std::move(words);
  return c;
}

TextContent TextContent::from_text(const std::string& text) { return from_words(split_whitespace(text)); }

std::string apply_casing(const std::string& s, Casing mode) {
  std::string out = s;
  switch (mode) {
    case Casing::Lower:
      for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      break;
    case Casing::Upper:
      for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    case Casing::Title: {
      bool at_start = true;
      for (auto& c : out) {
        const auto uc = static_cast<unsigned char>(c);
        if (is_space(c)) {
          at_start = true;
        } else if (std::isalpha(uc)) {
          c = static_cast<char>(at_start ? std::toupper(uc) : std::tolower(uc));
          at_start = false;
        }
      }
      break;
    }
  }
  return out;
}

TextContent sample_text(const Lexicon& lexicon, const AugmentationPolicy& policy, IntRange length_range, Rng& rng) {
  const int lo = std::clamp(length_range.lo, 1, 12);
  const int hi = std::clamp(length_range.hi, lo, 12);
  const int n = rng.uniform_int(lo, hi);

  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) words.push_back(lexicon.draw(rng));

  if (rng.bernoulli(policy.p_number)) {
    const int digits = rng.uniform_int(policy.min_digits, policy.max_digits);
    std::string number;
    for (int i = 0; i < digits; ++i) number += static_cast<char>('0' + rng.below(10));
    // Appending would exceed the length cap, so replace in that case.
    const bool replace = rng.bernoulli(0.5) || static_cast<int>(words.size()) >= hi;
    if (replace)
      words[rng.below(words.size())] = number;
    else
      words.push_back(number);
  }

  if (rng.bernoulli(policy.p_symbol)) {
    const char sym = policy.symbol_set[rng.below(policy.symbol_set.size())];
    auto& w = words[rng.below(words.size())];
    if (rng.bernoulli(0.5))
      w.insert(w.begin(), sym);
    else
      w.push_back(sym);
  }

  if (rng.bernoulli(policy.p_casing)) {
    const Casing mode = rng.pick(policy.casing_modes);
    for (auto& w : words) w = apply_casing(w, mode);
  }

  return TextContent::from_words(std::move(words));
}

}  // namespace textsculpt
