#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "textsculpt/composer.hpp"
#include "textsculpt/error.hpp"

using namespace textsculpt;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

EditTask task_of(TaskType type, std::vector<std::string> scene, std::vector<EditOperation> ops) {
  EditTask t;
  t.task_type = type;
  t.scene_text_before = std::move(scene);
  t.operations = std::move(ops);
  const auto e = expected_text_after_edit(t.scene_text_before, t.operations);
  t.expected_text_after = e.text_after;
  t.n_edit = e.n_edit;
  Rng rng(1);
  t.instruction = render_instruction(t.operations, TemplateBank::builtin(), rng);
  return t;
}

const Lexicon& lexicon() {
  static const auto lex = load_lexicon(tstest::data_dir() / "lexicon" / "words.txt");
  return lex;
}

ComposerOptions options_with_corpus() {
  ComposerOptions o;
  o.distraction_corpus.lexicon = &lexicon();
  o.styles.size_min_px = 18;
  o.styles.size_max_px = 36;
  return o;
}

}  // namespace

TEST(Occupancy, NoBoxesNoMarginIsFree) {
  const auto m = build_occupancy({40, 30}, {}, 0);
  EXPECT_EQ(m.grid.count(), 0);
}

TEST(Occupancy, FullImageBoxIsFullyOccupied) {
  const auto m = build_occupancy({40, 30}, {{{0, 0, 40, 30}, "X", 1}}, 0);
  EXPECT_EQ(m.grid.count(), 40 * 30);
}

TEST(Occupancy, DisjointBoxesWithMarginMatchPaintedOracle) {
  const Size size{200, 150};
  const std::vector<TextBox> boxes{{{30, 40, 20, 10}, "A", 1}, {{120, 90, 40, 25}, "B", 1}};
  const int margin = 10;
  std::vector<std::vector<int>> oracle(size.height, std::vector<int>(size.width, 0));
  auto paint = [&](int x0, int y0, int x1, int y1) {
    for (int y = std::max(0, y0); y < std::min(size.height, y1); ++y)
      for (int x = std::max(0, x0); x < std::min(size.width, x1); ++x) oracle[y][x] = 1;
  };
  for (const auto& b : boxes)
    paint(b.rect.x - margin, b.rect.y - margin, b.rect.x + b.rect.w + margin, b.rect.y + b.rect.h + margin);
  paint(0, 0, size.width, margin);
  paint(0, size.height - margin, size.width, size.height);
  paint(0, 0, margin, size.height);
  paint(size.width - margin, 0, size.width, size.height);
  long long expected = 0;
  for (const auto& row : oracle)
    for (int v : row) expected += v;

  const auto m = build_occupancy(size, boxes, margin);
  EXPECT_EQ(m.grid.count(), expected);
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x) ASSERT_EQ(m.grid.at(x, y), oracle[y][x] == 1);
}

TEST(IntegralMask, MatchesDirectCount) {
  Rng rng(8);
  BinaryMask m(37, 29);
  for (int i = 0; i < 300; ++i) m.set(rng.uniform_int(0, 36), rng.uniform_int(0, 28), true);
  const IntegralMask im(m);
  for (int i = 0; i < 200; ++i) {
    const Rect r{rng.uniform_int(-5, 36), rng.uniform_int(-5, 28), rng.uniform_int(0, 20), rng.uniform_int(0, 20)};
    long long direct = 0;
    for (int y = 0; y < 29; ++y)
      for (int x = 0; x < 37; ++x)
        if (r.contains(x, y) && m.at(x, y)) ++direct;
    ASSERT_EQ(im.count(r), direct);
  }
}

TEST(FindPlacement, EmptyMaskGivesFreeRect) {
  const auto m = build_occupancy({100, 80}, {}, 0);
  Rng rng(1);
  const auto p = find_placement(m, {30, 20}, rng);
  EXPECT_GE(p.x, 0);
  EXPECT_GE(p.y, 0);
  EXPECT_LE(p.x + 30, 100);
  EXPECT_LE(p.y + 20, 80);
}

TEST(FindPlacement, LayerLargerThanImage) {
  const auto m = build_occupancy({100, 80}, {}, 0);
  Rng rng(1);
  EXPECT_EQ(code_of([&] { find_placement(m, {101, 10}, rng); }), ErrorCode::NoSafeRegion);
}

TEST(FindPlacement, LeftHalfOccupiedMatchesBruteForce) {
  const Size size{60, 40};
  const auto m = build_occupancy(size, {{{0, 0, 30, 40}, "L", 1}}, 0);
  const Size layer{25, 12};
  for (int seed = 0; seed < 50; ++seed) {
    for (int attempts : {1, 64}) {
      Rng rng(seed);
      const auto p = find_placement(m, layer, rng, attempts);
      EXPECT_GE(p.x, size.width / 2);
      bool clear = true;
      for (int y = p.y; y < p.y + layer.height; ++y)
        for (int x = p.x; x < p.x + layer.width; ++x) clear = clear && !m.grid.at(x, y);
      EXPECT_TRUE(clear);
    }
  }
}

TEST(FindPlacement, ExhaustiveFallbackFindsTheOnlySlot) {
  // One free 10×10 hole in an otherwise occupied 120×120 mask.
  OccupancyMask m{BinaryMask(120, 120, true), 0};
  for (int y = 70; y < 80; ++y)
    for (int x = 33; x < 43; ++x) m.grid.set(x, y, false);
  Rng rng(2);
  EXPECT_EQ(find_placement(m, {10, 10}, rng, 1), (Point{33, 70}));
  EXPECT_EQ(code_of([&] { find_placement(m, {11, 10}, rng, 4); }), ErrorCode::NoSafeRegion);
}

TEST(Composite, TransparentLayerIsIdentity) {
  const auto bg = tstest::noise_image(50, 40, 3);
  EXPECT_EQ(composite_layer(bg, Image(20, 10), {5, 5}), bg);
}

TEST(Composite, OpaqueLayerCopiesColors) {
  const auto bg = tstest::noise_image(50, 40, 3);
  const auto layer = tstest::noise_image(20, 10, 4);
  const auto out = composite_layer(bg, layer, {7, 9});
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 50; ++x) {
      const bool in = x >= 7 && x < 27 && y >= 9 && y < 19;
      ASSERT_EQ(out.at(x, y), in ? layer.at(x - 7, y - 9) : bg.at(x, y));
    }
}

TEST(Composite, HalfAlphaRedOverBlueMatchesFloatBlend) {
  const auto bg = tstest::solid(16, 16, {0, 0, 255, 255});
  const auto layer = tstest::solid(8, 8, {255, 0, 0, 128});
  const auto out = composite_layer(bg, layer, {4, 4});
  const double a = 128 / 255.0;
  const double r = 255 * a, b = 255 * (1 - a);
  const auto px = out.at(6, 6);
  EXPECT_NEAR(px.r, r, 1.0);
  EXPECT_NEAR(px.g, 0, 1.0);
  EXPECT_NEAR(px.b, b, 1.0);
  EXPECT_EQ(px.a, 255);
  EXPECT_EQ(out.at(0, 0), bg.at(0, 0));
}

TEST(Composite, OutOfBounds) {
  const auto bg = tstest::solid(16, 16, {0, 0, 0, 255});
  EXPECT_EQ(code_of([&] { composite_layer(bg, Image(8, 8), {9, 0}); }), ErrorCode::OutOfBounds);
  EXPECT_EQ(code_of([&] { composite_layer(bg, Image(8, 8), {-1, 0}); }), ErrorCode::OutOfBounds);
}

TEST(Synthesize, RemovalTargetEqualsBackground) {
  const auto bg = tstest::noise_image(320, 240, 5, 100, 160);
  const auto task = task_of(TaskType::Removal, {"SALE"}, {EditOperation::remove("SALE")});
  Rng rng(10);
  const auto pair = synthesize_pair(bg, task, tstest::fonts(), 0, rng, options_with_corpus());
  EXPECT_EQ(pair.target, bg);
  EXPECT_NE(pair.source, bg);
  ASSERT_EQ(pair.edited_regions.size(), 1u);
  EXPECT_EQ(count_diff_outside(pair.source, bg, pair.edited_regions), 0);
  EXPECT_TRUE(pair.target_boxes.empty());
  ASSERT_EQ(pair.source_boxes.size(), 1u);
  EXPECT_EQ(pair.source_boxes[0].text, "SALE");
}

TEST(Synthesize, ReplacementLocksStyleAndOrigin) {
  const auto bg = tstest::noise_image(320, 240, 6, 100, 160);
  const auto task = task_of(TaskType::Replacement, {"OPEN"}, {EditOperation::replace("OPEN", "CLOSED")});
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto pair = synthesize_pair(bg, task, tstest::fonts(), 0, rng, options_with_corpus());
    ASSERT_EQ(pair.layers.size(), 1u);
    const auto& l = pair.layers[0];
    EXPECT_EQ(l.role, LayerRole::Rewritten);
    EXPECT_EQ(l.source_style, l.target_style);
    EXPECT_EQ(l.source_rect.x, l.origin.x);
    EXPECT_EQ(l.source_rect.y, l.origin.y);
    EXPECT_EQ(l.target_rect.x, l.origin.x);
    EXPECT_EQ(l.target_rect.y, l.origin.y);
    EXPECT_EQ(count_diff_outside(pair.source, pair.target, pair.edited_regions), 0);
  }
}

TEST(Synthesize, DistractionsIdenticalInBothImages) {
  const auto bg = tstest::noise_image(800, 600, 7, 90, 170);
  Rng trng(3);
  CorpusSource corpus{&lexicon(), {}, {1, 2}};
  for (TaskType type : kAllTaskTypes) {
    for (int seed = 0; seed < 5; ++seed) {
      Rng rng(100 + seed);
      const std::vector<std::string> scene{"OPEN NOW", "Cafe Mira", "EST 1999"};
      const auto task = make_task(type, type == TaskType::Addition ? std::vector<std::string>{} : scene, corpus,
                                  TemplateBank::builtin(), trng);
      const auto pair = synthesize_pair(bg, task, tstest::fonts(), 3, rng, options_with_corpus());
      ASSERT_EQ(pair.distraction_regions.size(), 3u);
      for (const auto& r : pair.distraction_regions)
        for (int y = r.y; y < r.bottom(); ++y)
          for (int x = r.x; x < r.right(); ++x) ASSERT_EQ(pair.source.at(x, y), pair.target.at(x, y));
      EXPECT_EQ(count_diff_outside(pair.source, pair.target, pair.edited_regions), 0);
    }
  }
}

TEST(Synthesize, PlacementAvoidsExistingText) {
  const auto bg = tstest::noise_image(640, 480, 9, 90, 170);
  auto opts = options_with_corpus();
  opts.existing_text = {{{20, 20, 180, 60}, "EXISTING", 1}, {{220, 180, 150, 90}, "MORE", 1}};
  const auto mask = build_occupancy(bg.size(), opts.existing_text, 0);
  const IntegralMask im(mask.grid);
  CorpusSource corpus{&lexicon(), {}, {1, 2}};
  Rng trng(5);
  for (int seed = 0; seed < 12; ++seed) {
    const auto type = kAllTaskTypes[seed % 4];
    const auto task = make_task(type, type == TaskType::Addition ? std::vector<std::string>{} :
                                                                   std::vector<std::string>{"OPEN NOW", "Cafe Mira", "EST"},
                                corpus, TemplateBank::builtin(), trng);
    Rng rng(seed);
    const auto pair = synthesize_pair(bg, task, tstest::fonts(), 2, rng, opts);
    for (const auto& r : pair.edited_regions) EXPECT_EQ(im.count(r), 0);
    for (const auto& r : pair.distraction_regions) EXPECT_EQ(im.count(r), 0);
  }
}

TEST(Synthesize, Deterministic) {
  const auto bg = tstest::noise_image(320, 240, 11, 90, 170);
  const auto task = task_of(TaskType::Hybrid, {"GRAND OPENING SALE", "Cafe Mira"},
                            {EditOperation::remove("OPENING", EditMode::InContext),
                             EditOperation::replace("SALE", "EVENT", EditMode::InContext), EditOperation::add("July 4")});
  Rng a(42), b(42);
  const auto p1 = synthesize_pair(bg, task, tstest::fonts(), 1, a, options_with_corpus());
  const auto p2 = synthesize_pair(bg, task, tstest::fonts(), 1, b, options_with_corpus());
  EXPECT_EQ(p1.source, p2.source);
  EXPECT_EQ(p1.target, p2.target);
  EXPECT_EQ(p1.layers, p2.layers);
  EXPECT_EQ(p1.edited_regions, p2.edited_regions);
}

TEST(Synthesize, NoRoomPropagatesNoSafeRegion) {
  const auto bg = tstest::noise_image(40, 30, 12);
  const auto task = task_of(TaskType::Addition, {}, {EditOperation::add("ENORMOUS")});
  Rng rng(1);
  auto opts = options_with_corpus();
  opts.styles.size_min_px = opts.styles.size_max_px = 20;
  opts.styles.max_width_fraction = 10.0;
  EXPECT_EQ(code_of([&] { synthesize_pair(bg, task, tstest::fonts(), 0, rng, opts); }), ErrorCode::NoSafeRegion);
}

TEST(Composer, ReadingOrderTopThenLeft) {
  const std::vector<TextBox> boxes{{{50, 10, 5, 5}, "b", 1}, {{10, 30, 5, 5}, "c", 1}, {{5, 10, 5, 5}, "a", 1}};
  const auto sorted = reading_order(boxes);
  EXPECT_EQ(sorted[0].text, "a");
  EXPECT_EQ(sorted[1].text, "b");
  EXPECT_EQ(sorted[2].text, "c");
}

TEST(Composer, CountDiffOutside) {
  auto a = tstest::solid(10, 10, {1, 2, 3, 255});
  auto b = a;
  b.set(2, 2, {9, 9, 9, 255});
  b.set(8, 8, {9, 9, 9, 255});
  EXPECT_EQ(count_diff_outside(a, b, {}), 2);
  EXPECT_EQ(count_diff_outside(a, b, {{0, 0, 5, 5}}), 1);
  EXPECT_THROW(count_diff_outside(a, Image(3, 3), {}), Error);
}
