#include "textsculpt/typesetting.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "textsculpt/error.hpp"
#include "textsculpt/raster.hpp"

namespace textsculpt {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// FontRegistry

FontRegistry FontRegistry::from_directory(const fs::path& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw Error(ErrorCode::Io, "font directory not readable: " + directory.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ttf" || ext == ".otf" || ext == ".ttc") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  FontRegistry reg;
  for (const auto& path : files) {
    const std::string id = path.stem().string();
    if (reg.fonts_.count(id)) throw Error(ErrorCode::DuplicateFontId, id);
    try {
      reg.fonts_.emplace(id, Font::load(path));
    } catch (const Error& e) {
      reg.warnings_.push_back({path, e.what()});
    }
  }
  if (reg.fonts_.empty()) throw Error(ErrorCode::NoFontsFound, directory.string());
  for (const auto& [id, _] : reg.fonts_) reg.ids_.push_back(id);
  return reg;
}

FontRegistry FontRegistry::from_fonts(std::vector<std::pair<std::string, Font>> fonts) {
  FontRegistry reg;
  for (auto& [id, font] : fonts) {
    if (reg.fonts_.count(id)) throw Error(ErrorCode::DuplicateFontId, id);
    reg.fonts_.emplace(id, std::move(font));
  }
  if (reg.fonts_.empty()) throw Error(ErrorCode::NoFontsFound, "no fonts supplied");
  for (const auto& [id, _] : reg.fonts_) reg.ids_.push_back(id);
  return reg;
}

const Font& FontRegistry::font(const std::string& id) const {
  const auto it = fonts_.find(id);
  if (it == fonts_.end()) throw Error(ErrorCode::InvalidArgument, "unknown font id: " + id);
  return it->second;
}

// ---------------------------------------------------------------------------
// TextStyle

void TextStyle::validate() const {
  if (!(size_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "size_px must be positive");
  if (!(stroke_width_px >= 0.0) || !(stroke_width_px < size_px))
    throw Error(ErrorCode::InvalidArgument, "stroke_width_px must be in [0, size_px)");
  if (!(rotation_deg >= -45.0 && rotation_deg <= 45.0))
    throw Error(ErrorCode::InvalidArgument, "rotation_deg must be in [-45, 45]");
  if (!(letter_spacing_px >= 0.0)) throw Error(ErrorCode::InvalidArgument, "letter_spacing_px must be >= 0");
  if (!(line_spacing_factor >= 1.0)) throw Error(ErrorCode::InvalidArgument, "line_spacing_factor must be >= 1");
}

TextStyle TextStyle::clamped() const {
  TextStyle s = *this;
  s.rotation_deg = std::clamp(s.rotation_deg, -45.0, 45.0);
  return s;
}

// ---------------------------------------------------------------------------
// Layout

namespace {

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

std::vector<std::uint16_t> glyphs_for(const Font& font, const std::string& text) {
  std::vector<std::uint16_t> out;
  for (char32_t cp : decode_utf8(text)) {
    const auto g = font.glyph_index(cp);
    if (g == 0) throw Error(ErrorCode::MissingGlyph, "'" + encode_utf8(cp) + "'");
    out.push_back(g);
  }
  return out;
}

double run_width(const Font& font, const std::vector<std::uint16_t>& glyphs, double scale, double spacing) {
  double w = 0.0;
  for (std::size_t i = 0; i < glyphs.size(); ++i) {
    w += font.advance_width(glyphs[i]) * scale;
    if (i + 1 < glyphs.size()) w += spacing;
  }
  return w;
}

}  // namespace

double measure_text(const Font& font, const std::string& text, const TextStyle& style) {
  return run_width(font, glyphs_for(font, text), style.size_px / font.units_per_em(), style.letter_spacing_px);
}

LayoutPlan layout_text(const TextContent& content, const TextStyle& style, const LayoutConstraints& constraints,
                       const FontRegistry& registry) {
  style.validate();
  if (!(constraints.max_width_px > 0.0) || constraints.max_lines < 1)
    throw Error(ErrorCode::InvalidArgument, "layout constraints must be positive");
  const Font& font = registry.font(style.font_id);
  const double scale = style.size_px / font.units_per_em();
  const double spacing = style.letter_spacing_px;

  LayoutPlan plan;
  plan.content = content;
  plan.style = style;
  if (content.words.empty()) return plan;

  const std::uint16_t space = font.glyph_index(U' ');
  if (space == 0) throw Error(ErrorCode::MissingGlyph, "' '");
  const double join = font.advance_width(space) * scale + 2 * spacing;

  struct Measured {
    std::vector<std::uint16_t> glyphs;
    double width;
  };
  std::vector<Measured> words;
  for (const auto& w : content.words) {
    auto glyphs = glyphs_for(font, w);
    const double width = run_width(font, glyphs, scale, spacing);
    if (width > constraints.max_width_px)
      throw Error(ErrorCode::Overflow, "word '" + w + "' is wider than max_width_px");
    words.push_back({std::move(glyphs), width});
  }

  // Greedy first-fit.
  std::vector<std::vector<std::size_t>> line_words(1);
  std::vector<double> line_widths(1, 0.0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!line_words.back().empty() && line_widths.back() + join + words[i].width > constraints.max_width_px) {
      line_words.emplace_back();
      line_widths.push_back(0.0);
    }
    if (!line_words.back().empty()) line_widths.back() += join;
    line_words.back().push_back(i);
    line_widths.back() += words[i].width;
  }
  if (static_cast<int>(line_words.size()) > constraints.max_lines)
    throw Error(ErrorCode::Overflow, std::to_string(line_words.size()) + " lines exceed max_lines " +
                                         std::to_string(constraints.max_lines));

  std::unordered_map<std::uint16_t, RectF> ink_cache;
  auto ink = [&](std::uint16_t g) -> const RectF& {
    auto it = ink_cache.find(g);
    if (it == ink_cache.end()) it = ink_cache.emplace(g, font.outline(g).bounds).first;
    return it->second;
  };

  const double ascent = font.ascender() * scale;
  const double descent = font.descender() * scale;  // negative below baseline
  for (std::size_t li = 0; li < line_words.size(); ++li) {
    LayoutLine line;
    line.baseline_y = ascent + static_cast<double>(li) * style.size_px * style.line_spacing_factor;
    line.width = line_widths[li];
    switch (constraints.alignment) {
      case Alignment::Left: line.x_offset = 0.0; break;
      case Alignment::Center: line.x_offset = (constraints.max_width_px - line.width) / 2.0; break;
      case Alignment::Right: line.x_offset = constraints.max_width_px - line.width; break;
    }
    double pen = line.x_offset;
    for (std::size_t k = 0; k < line_words[li].size(); ++k) {
      const std::size_t wi = line_words[li][k];
      if (k) pen += join;
      PlacedWord pw;
      pw.text = content.words[wi];
      const double word_start = pen;
      for (std::size_t gi = 0; gi < words[wi].glyphs.size(); ++gi) {
        const auto g = words[wi].glyphs[gi];
        pw.glyphs.push_back({g, pen, line.baseline_y});
        const RectF& b = ink(g);
        if (!b.empty())
          pw.box = pw.box.united({pen + b.x0 * scale, line.baseline_y - b.y1 * scale, pen + b.x1 * scale,
                                  line.baseline_y - b.y0 * scale});
        pen += font.advance_width(g) * scale;
        if (gi + 1 < words[wi].glyphs.size()) pen += spacing;
      }
      if (pw.box.empty()) pw.box = {word_start, line.baseline_y - ascent, pen, line.baseline_y - descent};
      plan.word_boxes.push_back(pw.box);
      plan.tight_bbox = plan.tight_bbox.united(pw.box);
      line.words.push_back(std::move(pw));
    }
    plan.lines.push_back(std::move(line));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Rasterization

namespace {

/// Max-dilation of a coverage field with an anti-aliased disk of radius r.
std::vector<double> dilate_coverage(const std::vector<double>& cov, int w, int h, double r) {
  struct Tap {
    int dx, dy;
    double weight;
  };
  std::vector<Tap> taps;
  const int reach = static_cast<int>(std::ceil(r + 0.5));
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx) {
      const double wgt = std::clamp(r + 0.5 - std::hypot(dx, dy), 0.0, 1.0);
      if (wgt > 0.0) taps.push_back({dx, dy, wgt});
    }
  std::vector<double> out(cov.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double best = 0.0;
      for (const auto& t : taps) {
        const int sx = x + t.dx, sy = y + t.dy;
        if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
        best = std::max(best, cov[static_cast<std::size_t>(sy) * w + sx] * t.weight);
      }
      out[static_cast<std::size_t>(y) * w + x] = best;
    }
  return out;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

RenderedLayer rasterize(const LayoutPlan& plan, const FontRegistry& registry) {
  RenderedLayer layer;
  layer.style = plan.style;
  layer.content = plan.content;
  if (plan.lines.empty() || plan.tight_bbox.empty()) {
    layer.bitmap = Image(1, 1);
    return layer;
  }
  const TextStyle& style = plan.style;
  const Font& font = registry.font(style.font_id);
  const double scale = style.size_px / font.units_per_em();
  const double cx = (plan.tight_bbox.x0 + plan.tight_bbox.x1) / 2.0;
  const double cy = (plan.tight_bbox.y0 + plan.tight_bbox.y1) / 2.0;
  const Affine rot = Affine::rotate_about(style.rotation_deg, cx, cy);

  std::unordered_map<std::uint16_t, GlyphOutline> outlines;
  std::vector<Polyline> polys;
  for (const auto& line : plan.lines)
    for (const auto& word : line.words)
      for (const auto& pg : word.glyphs) {
        auto it = outlines.find(pg.glyph);
        if (it == outlines.end()) it = outlines.emplace(pg.glyph, font.outline(pg.glyph)).first;
        const Affine glyph_xf = rot.then_after(Affine{scale, 0, 0, -scale, pg.pen_x, pg.pen_y});
        for (auto& p : flatten(it->second.commands, glyph_xf)) polys.push_back(std::move(p));
      }

  auto rotated_bounds = [&](const RectF& r) {
    const PointF corners[4] = {rot({r.x0, r.y0}), rot({r.x1, r.y0}), rot({r.x0, r.y1}), rot({r.x1, r.y1})};
    RectF out{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
    for (const auto& c : corners) {
      out.x0 = std::min(out.x0, c.x);
      out.y0 = std::min(out.y0, c.y);
      out.x1 = std::max(out.x1, c.x);
      out.y1 = std::max(out.y1, c.y);
    }
    return out;
  };

  RectF extent = rotated_bounds(plan.tight_bbox);
  for (const auto& poly : polys)
    for (const auto& p : poly) extent = extent.united({p.x, p.y, p.x, p.y});

  const int stroke_pad = static_cast<int>(std::ceil(style.stroke_width_px + 0.5));
  const int pad = stroke_pad + 1;
  const int ox = static_cast<int>(std::floor(extent.x0)) - pad;
  const int oy = static_cast<int>(std::floor(extent.y0)) - pad;
  const int w = static_cast<int>(std::ceil(extent.x1)) - ox + pad;
  const int h = static_cast<int>(std::ceil(extent.y1)) - oy + pad;

  CoverageAccumulator acc(w, h);
  for (auto& poly : polys) {
    for (auto& p : poly) {
      p.x -= ox;
      p.y -= oy;
    }
    acc.add_polyline(poly);
  }
  const std::vector<double> fill_cov = acc.coverage();
  const bool stroked = style.stroke_width_px > 0.0;
  const std::vector<double> stroke_cov = stroked ? dilate_coverage(fill_cov, w, h, style.stroke_width_px)
                                                 : std::vector<double>();

  // Geometric extent of any coverage, independent of color alpha.
  int min_x = w, min_y = h, max_x = -1, max_y = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double c = stroked ? std::max(fill_cov[i], stroke_cov[i]) : fill_cov[i];
      if (to_byte(c * 255.0) == 0) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  if (max_x < 0) {
    layer.bitmap = Image(1, 1);
    return layer;
  }

  const Rect crop_rect{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
  layer.bitmap = Image(crop_rect.w, crop_rect.h);
  const double fa_max = style.fill.a / 255.0, sa_max = style.stroke_color.a / 255.0;
  for (int y = 0; y < crop_rect.h; ++y)
    for (int x = 0; x < crop_rect.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y + crop_rect.y) * w + (x + crop_rect.x);
      const double fa = fill_cov[i] * fa_max;
      const double sa = stroked ? stroke_cov[i] * sa_max : 0.0;
      const double out_a = fa + sa * (1.0 - fa);
      if (to_byte(out_a * 255.0) == 0) continue;
      auto chan = [&](std::uint8_t f, std::uint8_t s) { return (f * fa + s * sa * (1.0 - fa)) / out_a; };
      layer.bitmap.set(x, y,
                       {to_byte(chan(style.fill.r, style.stroke_color.r)), to_byte(chan(style.fill.g, style.stroke_color.g)),
                        to_byte(chan(style.fill.b, style.stroke_color.b)), to_byte(out_a * 255.0)});
    }

  const int dx = -(ox + crop_rect.x), dy = -(oy + crop_rect.y);
  for (const auto& box : plan.word_boxes) {
    Rect r = rotated_bounds(box).snapped_out().expanded(stroke_pad).translated(dx, dy);
    layer.word_boxes.push_back(r.clamped(layer.bitmap.size()));
  }
  return layer;
}

RenderedLayer render_text(const TextContent& content, const TextStyle& style, const LayoutConstraints& constraints,
                          const FontRegistry& registry) {
  return rasterize(layout_text(content, style, constraints, registry), registry);
}

}  // namespace textsculpt
