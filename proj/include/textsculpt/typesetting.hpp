#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "textsculpt/geometry.hpp"
#include "textsculpt/image.hpp"
#include "textsculpt/text_corpus.hpp"
#include "textsculpt/truetype.hpp"

namespace textsculpt {

/// Immutable after construction; share freely across workers.
class FontRegistry {
 public:
  struct LoadReport {
    std::filesystem::path path;
    std::string message;
  };

  /// Loads every parseable outline font (.ttf/.otf/.ttc) in `directory`,
  /// non-recursively. Unparseable files are listed in `warnings()`.
  static FontRegistry from_directory(const std::filesystem::path& directory);
  /// Registry over in-memory fonts; ids must be unique.
  static FontRegistry from_fonts(std::vector<std::pair<std::string, Font>> fonts);

  const std::vector<std::string>& ids() const { return ids_; }
  const Font& font(const std::string& id) const;
  bool contains(const std::string& id) const { return fonts_.count(id) != 0; }
  const std::vector<LoadReport>& warnings() const { return warnings_; }

 private:
  std::map<std::string, Font> fonts_;
  std::vector<std::string> ids_;
  std::vector<LoadReport> warnings_;
};

inline FontRegistry register_fonts(const std::filesystem::path& directory) {
  return FontRegistry::from_directory(directory);
}

struct TextStyle {
  std::string font_id;
  double size_px = 32.0;
  Rgba fill{0, 0, 0, 255};
  double stroke_width_px = 0.0;
  Rgba stroke_color{255, 255, 255, 255};
  double rotation_deg = 0.0;
  double letter_spacing_px = 0.0;
  double line_spacing_factor = 1.2;

  /// Throws InvalidArgument when an invariant is violated; rotation is clamped
  /// to [-45, 45] by `clamped()` rather than rejected.
  void validate() const;
  TextStyle clamped() const;

  bool operator==(const TextStyle&) const = default;
};

enum class Alignment { Left, Center, Right };

struct LayoutConstraints {
  double max_width_px = 512.0;
  int max_lines = 3;
  Alignment alignment = Alignment::Left;
};

struct PlacedGlyph {
  std::uint16_t glyph = 0;
  double pen_x = 0;  // layout coordinates, baseline origin
  double pen_y = 0;
};

struct PlacedWord {
  std::string text;
  std::vector<PlacedGlyph> glyphs;
  RectF box;  // ink extents, or the advance box when the word has no ink
};

struct LayoutLine {
  std::vector<PlacedWord> words;
  double baseline_y = 0;
  double x_offset = 0;
  double width = 0;
};

/// Layout coordinates: x right, y down, origin at the top-left of the
/// max_width_px column.
struct LayoutPlan {
  std::vector<LayoutLine> lines;
  std::vector<RectF> word_boxes;  // line-major word order
  RectF tight_bbox;               // union of glyph ink extents
  TextContent content;
  TextStyle style;
};

struct RenderedLayer {
  Image bitmap;                 // tight around all nonzero alpha, stroke and rotation included
  std::vector<Rect> word_boxes;  // bitmap coordinates
  TextStyle style;
  TextContent content;

  Size size() const { return bitmap.size(); }
};

/// Advance of `text` on one line: Σ glyph advances + letter spacing between glyphs.
double measure_text(const Font& font, const std::string& text, const TextStyle& style);

/// Greedy first-fit line wrapping. Throws MissingGlyph or Overflow.
LayoutPlan layout_text(const TextContent& content, const TextStyle& style, const LayoutConstraints& constraints,
                       const FontRegistry& registry);

/// Analytic-coverage rasterization (see CoverageAccumulator); unhinted,
/// stroke painted beneath the fill, rotation about the layout's ink center.
/// Empty plans give a 1×1 transparent layer.
RenderedLayer rasterize(const LayoutPlan& plan, const FontRegistry& registry);

/// Convenience: layout + rasterize.
RenderedLayer render_text(const TextContent& content, const TextStyle& style, const LayoutConstraints& constraints,
                          const FontRegistry& registry);

}  // namespace textsculpt
