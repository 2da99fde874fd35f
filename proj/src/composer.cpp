#include "textsculpt/composer.hpp"

#include <algorithm>
#include <cmath>

#include "textsculpt/error.hpp"

namespace textsculpt {

void OccupancyMask::occupy(const Rect& r) { grid.fill(r.expanded(margin_px)); }

OccupancyMask build_occupancy(Size image_size, const std::vector<TextBox>& boxes, int margin_px) {
  if (margin_px < 0) throw Error(ErrorCode::InvalidArgument, "margin_px must be >= 0");
  OccupancyMask mask{BinaryMask(image_size.width, image_size.height), margin_px};
  for (const auto& b : boxes) mask.occupy(b.rect);
  if (margin_px > 0) {
    const int w = image_size.width, h = image_size.height;
    mask.grid.fill({0, 0, w, margin_px});
    mask.grid.fill({0, h - margin_px, w, margin_px});
    mask.grid.fill({0, 0, margin_px, h});
    mask.grid.fill({w - margin_px, 0, margin_px, h});
  }
  return mask;
}

IntegralMask::IntegralMask(const BinaryMask& mask)
    : w_(mask.width()), h_(mask.height()), sums_(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0) {
  for (int y = 0; y < h_; ++y) {
    long long row = 0;
    for (int x = 0; x < w_; ++x) {
      row += mask.at(x, y) ? 1 : 0;
      sums_[static_cast<std::size_t>(y + 1) * (w_ + 1) + x + 1] = sums_[static_cast<std::size_t>(y) * (w_ + 1) + x + 1] + row;
    }
  }
}

long long IntegralMask::count(const Rect& r) const {
  const Rect c = r.clamped({w_, h_});
  if (c.empty()) return 0;
  auto at = [&](int x, int y) { return sums_[static_cast<std::size_t>(y) * (w_ + 1) + x]; };
  return at(c.right(), c.bottom()) - at(c.x, c.bottom()) - at(c.right(), c.y) + at(c.x, c.y);
}

Point find_placement(const OccupancyMask& mask, Size layer_size, Rng& rng, int max_attempts) {
  if (max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= 1");
  const Size img = mask.size();
  if (layer_size.width <= 0 || layer_size.height <= 0)
    throw Error(ErrorCode::InvalidArgument, "layer size must be positive");
  if (layer_size.width > img.width || layer_size.height > img.height)
    throw Error(ErrorCode::NoSafeRegion, "layer larger than image");

  const IntegralMask integral(mask.grid);
  const int span_x = img.width - layer_size.width + 1;
  const int span_y = img.height - layer_size.height + 1;
  auto free_at = [&](int x, int y) { return integral.count({x, y, layer_size.width, layer_size.height}) == 0; };

  for (int i = 0; i < max_attempts; ++i) {
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(span_x)));
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(span_y)));
    if (free_at(x, y)) return {x, y};
  }

  std::vector<Point> valid;
  for (int y = 0; y < span_y; ++y)
    for (int x = 0; x < span_x; ++x)
      if (free_at(x, y)) valid.push_back({x, y});
  if (valid.empty()) throw Error(ErrorCode::NoSafeRegion, "no free region for layer");
  return rng.pick(valid);
}

Image composite_layer(const Image& background, const Image& layer, Point origin) {
  const Rect rect{origin.x, origin.y, layer.width(), layer.height()};
  if (!Rect{0, 0, background.width(), background.height()}.contains(rect))
    throw Error(ErrorCode::OutOfBounds, "layer rect outside background");
  Image out = background;
  for (int y = 0; y < layer.height(); ++y)
    for (int x = 0; x < layer.width(); ++x) {
      const Rgba s = layer.at(x, y);
      if (s.a == 0) continue;
      if (s.a == 255) {
        out.set(origin.x + x, origin.y + y, s);
        continue;
      }
      const Rgba d = background.at(origin.x + x, origin.y + y);
      const double sa = s.a / 255.0, da = d.a / 255.0;
      const double oa = sa + da * (1.0 - sa);
      auto chan = [&](std::uint8_t sc, std::uint8_t dc) {
        return static_cast<std::uint8_t>(std::lround(std::clamp((sc * sa + dc * da * (1.0 - sa)) / oa, 0.0, 255.0)));
      };
      out.set(origin.x + x, origin.y + y,
              {chan(s.r, d.r), chan(s.g, d.g), chan(s.b, d.b),
               static_cast<std::uint8_t>(std::lround(std::clamp(oa * 255.0, 0.0, 255.0)))});
    }
  return out;
}

TextStyle sample_style(const FontRegistry& registry, const StyleRanges& ranges, Rng& rng) {
  TextStyle s;
  s.font_id = rng.pick(registry.ids());
  s.size_px = std::round(rng.uniform(ranges.size_min_px, ranges.size_max_px));
  s.rotation_deg = std::clamp(rng.uniform(-ranges.rotation_max_deg, ranges.rotation_max_deg), -45.0, 45.0);
  if (rng.bernoulli(ranges.p_stroke))
    s.stroke_width_px = std::min(rng.uniform(ranges.stroke_min_px, ranges.stroke_max_px), s.size_px / 4.0);
  s.letter_spacing_px = rng.uniform(0.0, ranges.letter_spacing_max_px);
  s.line_spacing_factor = rng.uniform(ranges.line_spacing_min, ranges.line_spacing_max);
  return s;
}

std::string_view to_string(LayerRole r) {
  switch (r) {
    case LayerRole::Unchanged: return "unchanged";
    case LayerRole::Rewritten: return "rewritten";
    case LayerRole::Removed: return "removed";
    case LayerRole::Added: return "added";
    case LayerRole::Distraction: return "distraction";
  }
  return "?";
}

LayerRole parse_layer_role(std::string_view s) {
  for (auto r : {LayerRole::Unchanged, LayerRole::Rewritten, LayerRole::Removed, LayerRole::Added, LayerRole::Distraction})
    if (to_string(r) == s) return r;
  throw Error(ErrorCode::InvalidArgument, "unknown layer role: " + std::string(s));
}

namespace {

double region_luma(const Image& img, const Rect& r) {
  const Rect c = r.clamped(img.size());
  if (c.empty()) return 128.0;
  double sum = 0.0;
  for (int y = c.y; y < c.bottom(); ++y)
    for (int x = c.x; x < c.right(); ++x) {
      const Rgba p = img.at(x, y);
      sum += 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
  return sum / static_cast<double>(c.area());
}

/// Fill contrasting with the region it lands on; stroke contrasting with the fill.
void choose_colors(TextStyle& s, double luma, Rng& rng) {
  auto channel = [&](bool dark) { return static_cast<std::uint8_t>(dark ? rng.uniform_int(0, 70) : rng.uniform_int(185, 255)); };
  const bool dark_fill = luma >= 128.0;
  s.fill = {channel(dark_fill), channel(dark_fill), channel(dark_fill), 255};
  s.stroke_color = {channel(!dark_fill), channel(!dark_fill), channel(!dark_fill), 255};
}

struct Placed {
  RenderedLayer layer;
  Point origin;
  Rect rect() const { return {origin.x, origin.y, layer.bitmap.width(), layer.bitmap.height()}; }
};

}  // namespace

CompositePair synthesize_pair(const Image& background, const EditTask& task, const FontRegistry& registry,
                              int distraction_count, Rng& rng, const ComposerOptions& options) {
  if (distraction_count < 0) throw Error(ErrorCode::InvalidArgument, "distraction_count must be >= 0");
  if (distraction_count > 0 && !options.distraction_corpus.lexicon)
    throw Error(ErrorCode::InvalidArgument, "distraction text needs a corpus");

  const Size size = background.size();
  const OccupancyMask existing = build_occupancy(size, options.existing_text, options.margin_px);
  OccupancyMask working = existing;

  CompositePair pair;
  pair.task = task;
  pair.source = background;
  pair.target = background;

  LayoutConstraints constraints;
  constraints.max_width_px = std::max(1.0, options.styles.max_width_fraction * size.width);
  constraints.max_lines = options.styles.max_lines;

  // Renders `texts` (one or two) with one shared style and places them at one
  // origin that fits the larger of the layers.
  auto place = [&](const std::vector<std::string>& texts) {
    TextStyle style = sample_style(registry, options.styles, rng);
    LayoutConstraints lc = constraints;
    lc.alignment = static_cast<Alignment>(rng.below(3));
    std::vector<LayoutPlan> plans;
    Size footprint;
    Point origin;
    // Too long or no room: step the size down toward the configured minimum.
    for (;;) {
      try {
        plans.clear();
        footprint = {};
        for (const auto& t : texts) {
          plans.push_back(layout_text(TextContent::from_text(t), style, lc, registry));
          const auto probe = rasterize(plans.back(), registry);
          footprint.width = std::max(footprint.width, probe.bitmap.width());
          footprint.height = std::max(footprint.height, probe.bitmap.height());
        }
        origin = find_placement(working, footprint, rng, options.max_attempts);
        break;
      } catch (const Error& e) {
        const bool retryable = e.code() == ErrorCode::Overflow || e.code() == ErrorCode::NoSafeRegion;
        if (!retryable || style.size_px <= options.styles.size_min_px) throw;
        style.size_px = std::max(options.styles.size_min_px, style.size_px * 0.8);
        style.stroke_width_px = std::min(style.stroke_width_px, style.size_px / 4.0);
      }
    }
    choose_colors(style, region_luma(background, {origin.x, origin.y, footprint.width, footprint.height}), rng);
    std::vector<Placed> out;
    for (auto& plan : plans) {
      plan.style = style;
      out.push_back({rasterize(plan, registry), origin});
      working.occupy(out.back().rect());
    }
    return out;
  };

  for (const auto& outcome : apply_operations(task.scene_text_before, task.operations)) {
    LayerRecord rec;
    if (!outcome.source_index) {
      auto placed = place({*outcome.after});
      rec.role = LayerRole::Added;
      rec.target_text = *outcome.after;
      rec.target_style = placed[0].layer.style;
      rec.target_rect = placed[0].rect();
      rec.origin = placed[0].origin;
      pair.target = composite_layer(pair.target, placed[0].layer, placed[0].origin);
      pair.edited_regions.push_back(rec.target_rect);
    } else if (!outcome.after) {
      auto placed = place({outcome.before});
      rec.role = LayerRole::Removed;
      rec.source_text = outcome.before;
      rec.source_style = placed[0].layer.style;
      rec.source_rect = placed[0].rect();
      rec.origin = placed[0].origin;
      pair.source = composite_layer(pair.source, placed[0].layer, placed[0].origin);
      pair.edited_regions.push_back(rec.source_rect);
    } else if (*outcome.after != outcome.before) {
      auto placed = place({outcome.before, *outcome.after});
      rec.role = LayerRole::Rewritten;
      rec.source_text = outcome.before;
      rec.target_text = *outcome.after;
      rec.source_style = placed[0].layer.style;
      rec.target_style = placed[1].layer.style;
      rec.source_rect = placed[0].rect();
      rec.target_rect = placed[1].rect();
      rec.origin = placed[0].origin;
      pair.source = composite_layer(pair.source, placed[0].layer, placed[0].origin);
      pair.target = composite_layer(pair.target, placed[1].layer, placed[1].origin);
      pair.edited_regions.push_back(rec.source_rect.united(rec.target_rect));
    } else {
      auto placed = place({outcome.before});
      rec.role = LayerRole::Unchanged;
      rec.source_text = rec.target_text = outcome.before;
      rec.source_style = rec.target_style = placed[0].layer.style;
      rec.source_rect = rec.target_rect = placed[0].rect();
      rec.origin = placed[0].origin;
      pair.source = composite_layer(pair.source, placed[0].layer, placed[0].origin);
      pair.target = composite_layer(pair.target, placed[0].layer, placed[0].origin);
    }
    pair.layers.push_back(std::move(rec));
  }

  for (int i = 0; i < distraction_count; ++i) {
    const auto& corpus = options.distraction_corpus;
    const std::string text = sample_text(*corpus.lexicon, corpus.policy, corpus.length_range, rng).text;
    auto placed = place({text});
    LayerRecord rec;
    rec.role = LayerRole::Distraction;
    rec.source_text = rec.target_text = text;
    rec.source_style = rec.target_style = placed[0].layer.style;
    rec.source_rect = rec.target_rect = placed[0].rect();
    rec.origin = placed[0].origin;
    pair.source = composite_layer(pair.source, placed[0].layer, placed[0].origin);
    pair.target = composite_layer(pair.target, placed[0].layer, placed[0].origin);
    pair.distraction_regions.push_back(rec.source_rect);
    pair.layers.push_back(std::move(rec));
  }

  for (const auto& rec : pair.layers) {
    if (!rec.source_text.empty()) pair.source_boxes.push_back({rec.source_rect, rec.source_text, 1.0});
    if (!rec.target_text.empty()) pair.target_boxes.push_back({rec.target_rect, rec.target_text, 1.0});
  }
  pair.source_boxes = reading_order(std::move(pair.source_boxes));
  pair.target_boxes = reading_order(std::move(pair.target_boxes));
  return pair;
}

long long count_diff_outside(const Image& a, const Image& b, const std::vector<Rect>& allowed) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "images differ in size");
  BinaryMask inside(a.width(), a.height());
  for (const auto& r : allowed) inside.fill(r);
  long long n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (!inside.at(x, y) && !(a.at(x, y) == b.at(x, y))) ++n;
  return n;
}

std::vector<TextBox> reading_order(std::vector<TextBox> boxes) {
  std::stable_sort(boxes.begin(), boxes.end(), [](const TextBox& l, const TextBox& r) {
    if (l.rect.y != r.rect.y) return l.rect.y < r.rect.y;
    return l.rect.x < r.rect.x;
  });
  return boxes;
}

}  // namespace textsculpt
