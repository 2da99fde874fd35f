#include "textsculpt/eval_metrics.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "textsculpt/error.hpp"

namespace textsculpt {

// ---------------------------------------------------------------------------
// Tokenization

std::vector<std::string> tokenize(const std::string& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::InvalidArgument, "ICU NFC normalizer unavailable");
  const icu::UnicodeString normalized = nfc->normalize(icu::UnicodeString::fromUTF8(text), status);
  if (U_FAILURE(status)) throw Error(ErrorCode::InvalidArgument, "normalization failed");

  std::vector<std::string> out;
  std::vector<UChar32> word;
  auto flush = [&] {
    std::size_t b = 0, e = word.size();
    while (b < e && u_ispunct(word[b])) ++b;
    while (e > b && u_ispunct(word[e - 1])) --e;
    if (b < e) {
      icu::UnicodeString w;
      for (std::size_t i = b; i < e; ++i) w.append(word[i]);
      std::string utf8;
      w.toUTF8String(utf8);
      out.push_back(std::move(utf8));
    }
    word.clear();
  };
  for (int32_t i = 0; i < normalized.length();) {
    const UChar32 c = normalized.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c))
      flush();
    else
      word.push_back(c);
  }
  flush();
  return out;
}

std::vector<std::string> tokenize_entries(const std::vector<std::string>& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    auto words = tokenize(e);
    out.insert(out.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
  }
  return out;
}

std::vector<std::string> full_text_words(const std::vector<TextBox>& boxes) {
  std::vector<std::string> texts;
  for (const auto& b : reading_order(boxes)) texts.push_back(b.text);
  return tokenize_entries(texts);
}

// ---------------------------------------------------------------------------
// Alignment

std::string_view to_string(AlignOp op) {
  switch (op) {
    case AlignOp::Match: return "match";
    case AlignOp::Substitute: return "sub";
    case AlignOp::Insert: return "ins";
    case AlignOp::Delete: return "del";
  }
  return "?";
}

WordAlignment align_words(const std::vector<std::string>& expected, const std::vector<std::string>& observed) {
  const std::size_t n = expected.size(), m = observed.size();
  std::vector<int> dist((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return dist[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (expected[i - 1] == observed[j - 1] ? 0 : 1), at(i, j - 1) + 1,
                           at(i - 1, j) + 1});

  WordAlignment out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = expected[i - 1] == observed[j - 1];
      if (at(i - 1, j - 1) + (same ? 0 : 1) == at(i, j)) {
        out.ops.push_back({same ? AlignOp::Match : AlignOp::Substitute, expected[i - 1], observed[j - 1]});
        if (!same) ++out.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && at(i, j - 1) + 1 == at(i, j)) {
      out.ops.push_back({AlignOp::Insert, "", observed[j - 1]});
      ++out.insertions;
      --j;
      continue;
    }
    out.ops.push_back({AlignOp::Delete, expected[i - 1], ""});
    ++out.deletions;
    --i;
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

std::vector<std::string> replay(const std::vector<std::string>& expected, const std::vector<AlignmentStep>& ops) {
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& step : ops) {
    switch (step.op) {
      case AlignOp::Match:
        if (i >= expected.size()) throw Error(ErrorCode::InvalidArgument, "edit script overruns expected");
        out.push_back(expected[i++]);
        break;
      case AlignOp::Substitute:
        if (i >= expected.size()) throw Error(ErrorCode::InvalidArgument, "edit script overruns expected");
        ++i;
        out.push_back(step.observed);
        break;
      case AlignOp::Insert:
        out.push_back(step.observed);
        break;
      case AlignOp::Delete:
        if (i >= expected.size()) throw Error(ErrorCode::InvalidArgument, "edit script overruns expected");
        ++i;
        break;
    }
  }
  if (i != expected.size()) throw Error(ErrorCode::InvalidArgument, "edit script does not consume expected");
  return out;
}

double text_accuracy(int edit_cost, int n_edit) {
  if (n_edit < 1) throw Error(ErrorCode::InvalidNEdit, "n_edit must be >= 1, got " + std::to_string(n_edit));
  if (edit_cost < 0) throw Error(ErrorCode::InvalidArgument, "edit cost must be >= 0");
  return 1.0 - std::min(static_cast<double>(edit_cost) / n_edit, 1.0);
}

double vq_score(const VisualQualityJudgment& j) {
  return ((j.location_ok ? 1.0 : 0.0) + (j.style_ok ? 1.0 : 0.0) + (j.physical_ok ? 1.0 : 0.0)) / 3.0;
}

// ---------------------------------------------------------------------------
// Background preservation

ExclusionMask build_exclusion_mask(Size image_size, const std::vector<TextBox>& source_boxes,
                                   const std::vector<TextBox>& edited_boxes, int dilation_px) {
  if (dilation_px < 0) throw Error(ErrorCode::InvalidArgument, "dilation_px must be >= 0");
  // Square dilation of a union of rects is the union of the expanded rects.
  ExclusionMask mask{BinaryMask(image_size.width, image_size.height), dilation_px};
  for (const auto* boxes : {&source_boxes, &edited_boxes})
    for (const auto& b : *boxes) {
      if (b.rect.empty()) continue;
      mask.raster.fill(b.rect.expanded(dilation_px));
    }
  return mask;
}

int default_dilation_px(const std::vector<TextBox>& source_boxes, const std::vector<TextBox>& edited_boxes) {
  std::vector<int> heights;
  for (const auto* boxes : {&source_boxes, &edited_boxes})
    for (const auto& b : *boxes)
      if (!b.rect.empty()) heights.push_back(b.rect.h);
  if (heights.empty()) return 5;
  std::sort(heights.begin(), heights.end());
  const std::size_t k = heights.size();
  const double median = k % 2 ? heights[k / 2] : (heights[k / 2 - 1] + heights[k / 2]) / 2.0;
  return std::max(5, static_cast<int>(std::lround(0.15 * median)));
}

namespace {

std::vector<double> gaussian_kernel(int window, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(window));
  const int r = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - r;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable filter, edge pixels replicated.
std::vector<double> blur(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * src[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

}  // namespace

std::vector<double> ssim_map(const Image& a, const Image& b, const SsimParams& p) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "SSIM inputs differ in size");
  const int w = a.width(), h = a.height();
  const auto la = to_luma(a), lb = to_luma(b);
  std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    aa[i] = la[i] * la[i];
    bb[i] = lb[i] * lb[i];
    ab[i] = la[i] * lb[i];
  }
  const auto k = gaussian_kernel(p.window, p.sigma);
  const auto mu_a = blur(la, w, h, k), mu_b = blur(lb, w, h, k);
  const auto e_aa = blur(aa, w, h, k), e_bb = blur(bb, w, h, k), e_ab = blur(ab, w, h, k);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

  std::vector<double> map(la.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    map[i] = ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return map;
}

double masked_ssim(const Image& a, const Image& b, const ExclusionMask& mask, const SsimParams& params) {
  if (a.size() != b.size() || mask.raster.size() != a.size())
    throw Error(ErrorCode::DimensionMismatch, "images and mask must share dimensions");
  if (mask.background_pixels() == 0) throw Error(ErrorCode::EmptyBackground, "mask leaves no background pixels");
  const auto map = ssim_map(a, b, params);
  double sum = 0.0;
  long long n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (!mask.raster.at(x, y)) {
        sum += map[static_cast<std::size_t>(y) * a.width() + x];
        ++n;
      }
  return sum / static_cast<double>(n);
}

double background_preservation(const Image& a, const Image& b, const ExclusionMask& mask) {
  return std::clamp(masked_ssim(a, b, mask), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Aggregation

AggregateReport aggregate(std::vector<SampleReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyReportSet, "no sample reports to aggregate");
  std::stable_sort(reports.begin(), reports.end(),
                   [](const SampleReport& l, const SampleReport& r) { return l.sample_id < r.sample_id; });
  AggregateReport out;
  for (const auto& r : reports) {
    auto& t = out.per_type[r.task_type];
    t.ta += r.ta;
    t.vq += r.vq;
    t.bp += r.bp;
    ++out.counts[r.task_type];
    out.overall.ta += r.ta;
    out.overall.vq += r.vq;
    out.overall.bp += r.bp;
  }
  for (auto& [type, t] : out.per_type) {
    const double n = out.counts[type];
    t = {t.ta / n, t.vq / n, t.bp / n};
  }
  out.total = static_cast<int>(reports.size());
  const double n = out.total;
  out.overall = {out.overall.ta / n, out.overall.vq / n, out.overall.bp / n};
  out.avg = (out.overall.ta + out.overall.vq + out.overall.bp) / 3.0;
  return out;
}

std::string format_table(const AggregateReport& report, const std::string& row_label) {
  std::ostringstream os;
  char buf[64];
  auto cell = [&](double v) {
    std::snprintf(buf, sizeof buf, " %5.2f", v);
    return std::string(buf);
  };
  auto dash = [] { return std::string("     -"); };

  const int label_w = std::max<int>(12, static_cast<int>(row_label.size()));
  std::string head1(static_cast<std::size_t>(label_w), ' ');
  std::string head2 = "Model" + std::string(static_cast<std::size_t>(label_w - 5), ' ');
  for (auto t : kAllTaskTypes) {
    std::snprintf(buf, sizeof buf, " | %-17s", std::string(to_string(t)).c_str());
    head1 += buf;
    head2 += " |    TA    VQ    BP";
  }
  head1 += " | Overall";
  head2 += " |    TA    VQ    BP   Avg";
  os << head1 << "\n" << head2 << "\n" << std::string(head2.size(), '-') << "\n";

  os << row_label << std::string(static_cast<std::size_t>(label_w) - row_label.size(), ' ');
  for (auto t : kAllTaskTypes) {
    os << " |";
    const auto it = report.per_type.find(t);
    if (it == report.per_type.end())
      os << dash() << dash() << dash();
    else
      os << cell(it->second.ta) << cell(it->second.vq) << cell(it->second.bp);
  }
  os << " |" << cell(report.overall.ta) << cell(report.overall.vq) << cell(report.overall.bp) << cell(report.avg)
     << "\n";
  return os.str();
}

}  // namespace textsculpt
