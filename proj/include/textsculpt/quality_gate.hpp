#pragma once

#include <optional>
#include <string>
#include <vector>

#include "textsculpt/composer.hpp"
#include "textsculpt/eval_metrics.hpp"

namespace textsculpt {

struct OcrResult {
  std::vector<TextBox> boxes;             // reading order
  std::vector<std::string> full_text_words;

  /// Sorts boxes into reading order and flattens them through `tokenize`.
  static OcrResult from_boxes(std::vector<TextBox> boxes);
};

struct GateVerdict {
  bool retained = false;
  double word_accuracy = 0;
  int matched = 0;
  int expected_count = 0;
  WordAlignment alignment;
};

/// matched / max(1, |expected|) with matched = |expected| − (S + D).
/// An empty expectation is vacuously satisfied (1.0).
double word_accuracy(const std::vector<std::string>& expected_words, const std::vector<std::string>& recognized_words);

/// Retains only exact word-sequence matches (S = I = D = 0). When `regions` is
/// given, only OCR boxes whose center lies in some region are considered.
GateVerdict gate_sample(const std::vector<std::string>& expected_words, const OcrResult& ocr,
                        const std::optional<std::vector<Rect>>& regions = std::nullopt);

}  // namespace textsculpt
