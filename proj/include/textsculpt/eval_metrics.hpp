#pragma once

#include <map>
#include <string>
#include <vector>

#include "textsculpt/composer.hpp"
#include "textsculpt/geometry.hpp"
#include "textsculpt/image.hpp"
#include "textsculpt/task_factory.hpp"

namespace textsculpt {

/// NFC-normalizes, splits on Unicode whitespace, and strips leading/trailing
/// punctuation from each word. Interior characters (apostrophes, hyphens) and
/// case are preserved; words that are pure punctuation vanish.
std::vector<std::string> tokenize(const std::string& text);

/// Tokenizes each entry and concatenates the results in order.
std::vector<std::string> tokenize_entries(const std::vector<std::string>& entries);

/// Reading-order word sequence of a set of text boxes.
std::vector<std::string> full_text_words(const std::vector<TextBox>& boxes);

enum class AlignOp { Match, Substitute, Insert, Delete };
std::string_view to_string(AlignOp op);

struct AlignmentStep {
  AlignOp op = AlignOp::Match;
  std::string expected;  // empty for Insert
  std::string observed;  // empty for Delete
  bool operator==(const AlignmentStep&) const = default;
};

struct WordAlignment {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  std::vector<AlignmentStep> ops;

  int cost() const { return substitutions + insertions + deletions; }
  bool perfect() const { return cost() == 0; }
};

/// Unit-cost Levenshtein alignment over words. Backtrace prefers the
/// diagonal (match/substitution), then insertion, then deletion.
WordAlignment align_words(const std::vector<std::string>& expected, const std::vector<std::string>& observed);

/// Applies an edit script to `expected`, yielding the observed sequence.
std::vector<std::string> replay(const std::vector<std::string>& expected, const std::vector<AlignmentStep>& ops);

/// 1 − min((S+I+D) / N_edit, 1). Throws InvalidNEdit when n_edit < 1.
double text_accuracy(int edit_cost, int n_edit);
inline double text_accuracy(const WordAlignment& a, int n_edit) { return text_accuracy(a.cost(), n_edit); }

struct VisualQualityJudgment {
  bool location_ok = false;
  bool style_ok = false;
  bool physical_ok = false;
  bool operator==(const VisualQualityJudgment&) const = default;
};

double vq_score(const VisualQualityJudgment& j);

struct ExclusionMask {
  BinaryMask raster;  // 1 = text, 0 = background
  int dilation_px = 0;

  long long background_pixels() const { return raster.size().area() - raster.count(); }
};

/// Union of all boxes, then dilation by a (2r+1)×(2r+1) square.
ExclusionMask build_exclusion_mask(Size image_size, const std::vector<TextBox>& source_boxes,
                                   const std::vector<TextBox>& edited_boxes, int dilation_px);

/// max(5, round(0.15 × median box height)); 5 px with no boxes.
int default_dilation_px(const std::vector<TextBox>& source_boxes, const std::vector<TextBox>& edited_boxes);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// Per-pixel SSIM map on BT.601 luma, Gaussian window, edges replicated.
std::vector<double> ssim_map(const Image& a, const Image& b, const SsimParams& params = {});

/// Mean SSIM over background-labeled pixel centers, in [-1, 1].
/// Throws DimensionMismatch or EmptyBackground.
double masked_ssim(const Image& a, const Image& b, const ExclusionMask& mask, const SsimParams& params = {});

/// masked_ssim clamped to [0, 1].
double background_preservation(const Image& a, const Image& b, const ExclusionMask& mask);

struct MetricTriple {
  double ta = 0;
  double vq = 0;
  double bp = 0;
  bool operator==(const MetricTriple&) const = default;
};

struct SampleReport {
  std::string sample_id;
  TaskType task_type = TaskType::Addition;
  double ta = 0;
  double vq = 0;
  double bp = 0;
  WordAlignment alignment;
  VisualQualityJudgment judgment;
  int n_edit = 1;
};

struct AggregateReport {
  std::map<TaskType, MetricTriple> per_type;
  std::map<TaskType, int> counts;
  MetricTriple overall;
  double avg = 0;
  int total = 0;
};

/// Means per task type and overall; avg = mean of the three overall means.
/// Summation runs in sample_id order. Throws EmptyReportSet.
AggregateReport aggregate(std::vector<SampleReport> reports);

/// Table-1-style text table: per-type TA/VQ/BP triplets, then overall TA/VQ/BP and Avg.
std::string format_table(const AggregateReport& report, const std::string& row_label);

}  // namespace textsculpt
