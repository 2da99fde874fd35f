#include "textsculpt/quality_gate.hpp"

#include <algorithm>

namespace textsculpt {

OcrResult OcrResult::from_boxes(std::vector<TextBox> boxes) {
  OcrResult r;
  r.boxes = reading_order(std::move(boxes));
  r.full_text_words = textsculpt::full_text_words(r.boxes);
  return r;
}

namespace {

int matched_words(const WordAlignment& a, std::size_t expected_count) {
  return static_cast<int>(expected_count) - (a.substitutions + a.deletions);
}

}  // namespace

double word_accuracy(const std::vector<std::string>& expected_words, const std::vector<std::string>& recognized_words) {
  if (expected_words.empty()) return 1.0;
  const auto a = align_words(expected_words, recognized_words);
  return static_cast<double>(matched_words(a, expected_words.size())) / static_cast<double>(expected_words.size());
}

GateVerdict gate_sample(const std::vector<std::string>& expected_words, const OcrResult& ocr,
                        const std::optional<std::vector<Rect>>& regions) {
  std::vector<std::string> recognized = ocr.full_text_words;
  if (regions) {
    std::vector<TextBox> kept;
    for (const auto& b : ocr.boxes) {
      const int cx = b.rect.x + b.rect.w / 2, cy = b.rect.y + b.rect.h / 2;
      if (std::any_of(regions->begin(), regions->end(), [&](const Rect& r) { return r.contains(cx, cy); }))
        kept.push_back(b);
    }
    recognized = full_text_words(kept);
  }

  GateVerdict v;
  v.alignment = align_words(expected_words, recognized);
  v.expected_count = static_cast<int>(expected_words.size());
  v.matched = matched_words(v.alignment, expected_words.size());
  v.word_accuracy = expected_words.empty() ? 1.0 : static_cast<double>(v.matched) / v.expected_count;
  v.retained = v.alignment.perfect();
  return v;
}

}  // namespace textsculpt
