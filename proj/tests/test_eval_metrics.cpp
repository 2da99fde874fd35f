#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

#include "test_support.hpp"
#include "textsculpt/error.hpp"
#include "textsculpt/eval_metrics.hpp"

using namespace textsculpt;

namespace {

using Strings = std::vector<std::string>;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

// Memoized recursive edit distance, structured differently from the library's table fill.
int distance_oracle(const Strings& a, const Strings& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  std::function<int(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int v = std::min({d(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1), d(i + 1, j) + 1, d(i, j + 1) + 1});
    memo[key] = v;
    return v;
  };
  return d(0, 0);
}

Strings random_words(Rng& rng, int max_len, int vocab) {
  Strings out(rng.below(static_cast<std::uint64_t>(max_len) + 1));
  for (auto& w : out) w = "w" + std::to_string(rng.below(static_cast<std::uint64_t>(vocab)));
  return out;
}

// Direct 2-D windowed SSIM with replicated borders.
double ssim_oracle_at(const std::vector<double>& a, const std::vector<double>& b, int w, int h, int x, int y) {
  const int r = 5;
  const double sigma = 1.5;
  double wsum = 0, ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double g = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
      const double pa = a[static_cast<std::size_t>(sy) * w + sx], pb = b[static_cast<std::size_t>(sy) * w + sx];
      wsum += g;
      ma += g * pa;
      mb += g * pb;
      saa += g * pa * pa;
      sbb += g * pb * pb;
      sab += g * pa * pb;
    }
  ma /= wsum;
  mb /= wsum;
  const double va = saa / wsum - ma * ma, vb = sbb / wsum - mb * mb, cov = sab / wsum - ma * mb;
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

Image gray(int w, int h, int v) {
  return tstest::solid(w, h, {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v), 255});
}

Image add_noise(const Image& img, double stddev, std::uint64_t seed) {
  Rng rng(seed);
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      // Box–Muller from the shared uniform stream.
      const double u1 = std::max(rng.uniform01(), 1e-12), u2 = rng.uniform01();
      const double n = stddev * std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
      auto p = img.at(x, y);
      const auto v = static_cast<std::uint8_t>(std::clamp<long>(std::lround(p.r + n), 0, 255));
      out.set(x, y, {v, v, v, 255});
    }
  return out;
}

SampleReport report(std::string id, TaskType t, double ta, double vq, double bp) {
  SampleReport r;
  r.sample_id = std::move(id);
  r.task_type = t;
  r.ta = ta;
  r.vq = vq;
  r.bp = bp;
  return r;
}

}  // namespace

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("OPEN NOW!"), (Strings{"OPEN", "NOW"}));
  EXPECT_EQ(tokenize(""), Strings{});
  EXPECT_EQ(tokenize("state-of-the-art, it's"), (Strings{"state-of-the-art", "it's"}));
  EXPECT_EQ(tokenize("  \"Hello,\"\t(world)  ... "), (Strings{"Hello", "world"}));
  EXPECT_EQ(tokenize("Case Stays"), (Strings{"Case", "Stays"}));
}

TEST(Tokenize, NfcComposesAndUnicodeWhitespaceSplits) {
  // "cafe" + combining acute vs precomposed; then a no-break space separator.
  EXPECT_EQ(tokenize("cafe\xCC\x81"), tokenize("caf\xC3\xA9"));
  EXPECT_EQ(tokenize("caf\xC3\xA9")[0], "caf\xC3\xA9");
  EXPECT_EQ(tokenize("A\xC2\xA0" "B"), (Strings{"A", "B"}));
}

TEST(Align, Examples) {
  auto a = align_words({"A", "B"}, {"A", "B"});
  EXPECT_EQ(a.cost(), 0);
  a = align_words({"GRAND", "OPENING", "SALE"}, {"GRAND", "SALE"});
  EXPECT_EQ(a.substitutions, 0);
  EXPECT_EQ(a.insertions, 0);
  EXPECT_EQ(a.deletions, 1);
  a = align_words({}, {"X", "Y"});
  EXPECT_EQ(a.insertions, 2);
  EXPECT_EQ(a.cost(), 2);
}

TEST(Align, TieBreakPrefersSubstitution) {
  const auto a = align_words({"A"}, {"B"});
  EXPECT_EQ(a.substitutions, 1);
  EXPECT_EQ(a.insertions + a.deletions, 0);
}

TEST(Align, MatchesOracleAndReplays) {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_words(rng, 10, 6), b = random_words(rng, 10, 6);
    const auto al = align_words(a, b);
    ASSERT_EQ(al.cost(), distance_oracle(a, b));
    ASSERT_EQ(replay(a, al.ops), b);
    int s = 0, ins = 0, del = 0;
    for (const auto& op : al.ops) {
      s += op.op == AlignOp::Substitute;
      ins += op.op == AlignOp::Insert;
      del += op.op == AlignOp::Delete;
    }
    ASSERT_EQ(s, al.substitutions);
    ASSERT_EQ(ins, al.insertions);
    ASSERT_EQ(del, al.deletions);
  }
}

TEST(Align, IdentityZeroCost) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_words(rng, 15, 5);
    EXPECT_TRUE(align_words(a, a).perfect());
  }
}

TEST(Align, SymmetryAndTriangle) {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_words(rng, 8, 4), b = random_words(rng, 8, 4), c = random_words(rng, 8, 4);
    const auto ab = align_words(a, b), ba = align_words(b, a);
    EXPECT_EQ(ab.cost(), ba.cost());
    const int growth = static_cast<int>(b.size()) - static_cast<int>(a.size());
    EXPECT_EQ(ab.insertions - ab.deletions, growth);
    EXPECT_EQ(ba.deletions - ba.insertions, growth);
    EXPECT_LE(align_words(a, c).cost(), ab.cost() + align_words(b, c).cost());
  }
}

TEST(TextAccuracy, Formula) {
  EXPECT_DOUBLE_EQ(text_accuracy(0, 7), 1.0);
  EXPECT_DOUBLE_EQ(text_accuracy(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(text_accuracy(5, 2), 0.0);
  EXPECT_EQ(code_of([] { text_accuracy(0, 0); }), ErrorCode::InvalidNEdit);
  EXPECT_EQ(code_of([] { text_accuracy(1, -3); }), ErrorCode::InvalidNEdit);
}

TEST(TextAccuracy, Monotone) {
  for (int n = 1; n <= 10; ++n)
    for (int c = 0; c <= 15; ++c) {
      EXPECT_LE(text_accuracy(c + 1, n), text_accuracy(c, n));
      EXPECT_GE(text_accuracy(c, n + 1), text_accuracy(c, n));
      EXPECT_GE(text_accuracy(c, n), 0.0);
      EXPECT_LE(text_accuracy(c, n), 1.0);
    }
}

TEST(VisualQuality, MeanOfBinaries) {
  EXPECT_DOUBLE_EQ(vq_score({true, true, true}), 1.0);
  EXPECT_DOUBLE_EQ(vq_score({false, false, false}), 0.0);
  EXPECT_DOUBLE_EQ(vq_score({true, true, false}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(vq_score({false, true, false}), 1.0 / 3.0);
}

TEST(ExclusionMask, NoBoxesAllBackground) {
  const auto m = build_exclusion_mask({30, 20}, {}, {}, 5);
  EXPECT_EQ(m.raster.count(), 0);
  EXPECT_EQ(m.background_pixels(), 600);
}

TEST(ExclusionMask, DilationMatchesBruteForceNeighbourhoodMax) {
  const Size size{60, 50};
  for (const Rect box : {Rect{20, 20, 10, 10}, Rect{0, 3, 10, 10}, Rect{52, 44, 8, 6}}) {
    const int r = 5;
    BinaryMask base(size.width, size.height);
    base.fill(box);
    const auto m = build_exclusion_mask(size, {{box, "x", 1}}, {}, r);
    long long expected = 0;
    for (int y = 0; y < size.height; ++y)
      for (int x = 0; x < size.width; ++x) {
        bool any = false;
        for (int dy = -r; dy <= r && !any; ++dy)
          for (int dx = -r; dx <= r && !any; ++dx) {
            const int sx = x + dx, sy = y + dy;
            any = sx >= 0 && sy >= 0 && sx < size.width && sy < size.height && base.at(sx, sy);
          }
        ASSERT_EQ(m.raster.at(x, y), any) << x << "," << y;
        expected += any;
      }
    EXPECT_EQ(m.raster.count(), expected);
  }
  EXPECT_EQ(build_exclusion_mask({60, 50}, {{{20, 20, 10, 10}, "x", 1}}, {}, 5).raster.count(), 20 * 20);
}

TEST(ExclusionMask, UnionOfSourceAndEdited) {
  const auto m = build_exclusion_mask({40, 40}, {{{0, 0, 5, 5}, "a", 1}}, {{{30, 30, 5, 5}, "b", 1}}, 0);
  EXPECT_EQ(m.raster.count(), 50);
}

TEST(DefaultDilation, FloorAndMedian) {
  EXPECT_EQ(default_dilation_px({}, {}), 5);
  EXPECT_EQ(default_dilation_px({{{0, 0, 10, 20}, "a", 1}}, {}), 5);
  EXPECT_EQ(default_dilation_px({{{0, 0, 10, 100}, "a", 1}}, {{{0, 0, 10, 60}, "b", 1}, {{0, 0, 10, 200}, "c", 1}}), 15);
}

TEST(Ssim, MapMatchesDirect2DOracle) {
  const auto a = tstest::noise_image(23, 17, 1, 40, 200);
  const auto b = add_noise(a, 12, 2);
  const auto map = ssim_map(a, b);
  const auto la = to_luma(a), lb = to_luma(b);
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 23; ++x) ASSERT_NEAR(map[y * 23 + x], ssim_oracle_at(la, lb, 23, 17, x, y), 1e-9);
}

TEST(Ssim, SelfIsOne) {
  const auto a = tstest::noise_image(40, 30, 3);
  const auto m = build_exclusion_mask(a.size(), {{{5, 5, 10, 10}, "x", 1}}, {}, 5);
  EXPECT_NEAR(masked_ssim(a, a, m), 1.0, 1e-9);
}

TEST(Ssim, ChangesInsideMaskIgnored) {
  const auto a = tstest::noise_image(64, 48, 4);
  auto b = a;
  const Rect box{20, 15, 12, 10};
  Rng rng(5);
  for (int y = box.y; y < box.bottom(); ++y)
    for (int x = box.x; x < box.right(); ++x)
      b.set(x, y, {static_cast<std::uint8_t>(rng.below(256)), 0, 0, 255});
  // Window radius 5 fits inside a dilation of 5 around the changed box.
  const auto m = build_exclusion_mask(a.size(), {{box, "x", 1}}, {}, 5);
  EXPECT_NEAR(masked_ssim(a, b, m), 1.0, 1e-6);
  const auto unmasked = build_exclusion_mask(a.size(), {}, {}, 0);
  EXPECT_LT(masked_ssim(a, b, unmasked), 0.99);
}

TEST(Ssim, Errors) {
  const auto a = tstest::noise_image(10, 10, 1);
  const auto full = build_exclusion_mask({10, 10}, {{{0, 0, 10, 10}, "x", 1}}, {}, 0);
  EXPECT_EQ(code_of([&] { masked_ssim(a, a, full); }), ErrorCode::EmptyBackground);
  const auto m = build_exclusion_mask({10, 10}, {}, {}, 0);
  EXPECT_EQ(code_of([&] { masked_ssim(a, Image(9, 10), m); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { masked_ssim(a, a, build_exclusion_mask({9, 9}, {}, {}, 0)); }), ErrorCode::DimensionMismatch);
}

TEST(Ssim, NoiseMonotone) {
  const auto base = gray(64, 64, 128);
  const auto m = build_exclusion_mask(base.size(), {{{10, 10, 8, 8}, "x", 1}}, {}, 5);
  double prev = 1.0 + 1e-12;
  for (double sd : {2.0, 5.0, 10.0, 20.0, 40.0}) {
    const double s = masked_ssim(base, add_noise(base, sd, 77), m);
    EXPECT_LT(s, prev) << sd;
    prev = s;
  }
}

TEST(Ssim, BackgroundPreservationClamped) {
  const auto a = gray(32, 32, 0);
  auto b = a;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if ((x + y) % 2) b.set(x, y, {255, 255, 255, 255});
  const auto m = build_exclusion_mask(a.size(), {}, {}, 0);
  const double bp = background_preservation(a, b, m);
  EXPECT_GE(bp, 0.0);
  EXPECT_LE(bp, 1.0);
}

TEST(Aggregate, SingleReport) {
  const auto agg = aggregate({report("a", TaskType::Removal, 1, 1, 1)});
  EXPECT_DOUBLE_EQ(agg.avg, 1.0);
  EXPECT_EQ(agg.total, 1);
  EXPECT_EQ(agg.counts.at(TaskType::Removal), 1);
}

TEST(Aggregate, PublishedRowsAvgWithinRounding) {
  struct Row {
    double ta, vq, bp, avg;
  };
  // Overall columns of the published comparison table.
  const Row rows[] = {{.63, .69, .72, .68}, {.56, .57, .63, .59}, {.76, .76, .63, .72}, {.21, .28, .67, .39},
                      {.26, .25, .77, .43}, {.47, .45, .73, .55}, {.54, .54, .67, .58}, {.62, .70, .73, .68},
                      {.55, .63, .76, .65}, {.60, .68, .78, .69}};
  for (const auto& r : rows) {
    const auto agg = aggregate({report("x", TaskType::Addition, r.ta, r.vq, r.bp)});
    EXPECT_NEAR(agg.avg, r.avg, 0.005);
  }
  const auto tsr = aggregate({report("x", TaskType::Hybrid, .60, .68, .78)});
  EXPECT_NEAR(tsr.avg, 0.686666, 1e-5);
}

TEST(Aggregate, PerTypeAndOverallMeans) {
  const auto agg = aggregate({report("a", TaskType::Addition, 1, 0, 0.5), report("b", TaskType::Addition, 0, 1, 0.5),
                              report("c", TaskType::Hybrid, 1, 1, 1)});
  EXPECT_DOUBLE_EQ(agg.per_type.at(TaskType::Addition).ta, 0.5);
  EXPECT_DOUBLE_EQ(agg.per_type.at(TaskType::Hybrid).bp, 1.0);
  EXPECT_NEAR(agg.overall.ta, 2.0 / 3, 1e-15);
  EXPECT_NEAR(agg.avg, (agg.overall.ta + agg.overall.vq + agg.overall.bp) / 3, 1e-15);
  EXPECT_EQ(agg.per_type.count(TaskType::Removal), 0u);
}

TEST(Aggregate, OrderIndependentBitwise) {
  Rng rng(6);
  std::vector<SampleReport> reps;
  for (int i = 0; i < 200; ++i)
    reps.push_back(report("s" + std::to_string(1000 + i), kAllTaskTypes[i % 4], rng.uniform01(), rng.uniform01(),
                          rng.uniform01()));
  const auto first = aggregate(reps);
  for (int k = 0; k < 5; ++k) {
    for (std::size_t i = reps.size() - 1; i > 0; --i) std::swap(reps[i], reps[rng.below(i + 1)]);
    const auto again = aggregate(reps);
    EXPECT_EQ(again.overall, first.overall);
    EXPECT_EQ(again.avg, first.avg);
    EXPECT_EQ(again.per_type, first.per_type);
  }
  EXPECT_EQ(code_of([] { aggregate({}); }), ErrorCode::EmptyReportSet);
}

TEST(Aggregate, TableLayout) {
  const auto agg = aggregate({report("a", TaskType::Addition, 1, 1, 1), report("b", TaskType::Removal, 0.5, 0.5, 0.5),
                              report("c", TaskType::Replacement, 0, 0, 0), report("d", TaskType::Hybrid, 1, 0, 1)});
  const auto t = format_table(agg, "editor");
  EXPECT_NE(t.find("addition"), std::string::npos);
  EXPECT_NE(t.find("hybrid"), std::string::npos);
  EXPECT_NE(t.find("Overall"), std::string::npos);
  EXPECT_NE(t.find("Avg"), std::string::npos);
  // Row: 4 type triplets + overall triplet + avg = 16 numbers.
  const auto row = t.substr(t.find("editor"));
  int numbers = 0;
  for (std::size_t p = 0; p + 3 < row.size(); ++p)
    if (std::isdigit(static_cast<unsigned char>(row[p])) && row[p + 1] == '.') ++numbers;
  EXPECT_EQ(numbers, 16);
}
