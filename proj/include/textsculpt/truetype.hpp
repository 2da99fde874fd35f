#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "textsculpt/geometry.hpp"

namespace textsculpt {

struct PointF {
  double x = 0;
  double y = 0;
  bool operator==(const PointF&) const = default;
};

/// One path command in font units (y axis up).
struct PathCommand {
  enum class Kind { MoveTo, LineTo, QuadTo, Close } kind;
  PointF control;  // QuadTo only
  PointF to;       // MoveTo, LineTo, QuadTo
};

struct GlyphOutline {
  std::vector<PathCommand> commands;
  RectF bounds;  // exact curve extents in font units; empty for blank glyphs
};

/// Read-only view of a TrueType font with `glyf` outlines. Unhinted: outlines
/// are returned exactly as stored. Instances are immutable and thread-safe.
class Font {
 public:
  /// Throws Error(Io) when the data is not a parseable TrueType outline font.
  static Font parse(std::vector<std::uint8_t> bytes);
  static Font load(const std::filesystem::path& path);

  int units_per_em() const { return units_per_em_; }
  int ascender() const { return ascender_; }
  int descender() const { return descender_; }
  int line_gap() const { return line_gap_; }
  int glyph_count() const { return num_glyphs_; }

  /// 0 (.notdef) when the code point is not mapped.
  std::uint16_t glyph_index(char32_t codepoint) const;
  int advance_width(std::uint16_t glyph) const;
  GlyphOutline outline(std::uint16_t glyph) const;

 private:
  Font() = default;
  void outline_into(std::uint16_t glyph, const double m[6], int depth, GlyphOutline& out) const;

  std::shared_ptr<const std::vector<std::uint8_t>> data_;
  std::uint32_t glyf_ = 0, loca_ = 0, hmtx_ = 0;
  int units_per_em_ = 0;
  int ascender_ = 0, descender_ = 0, line_gap_ = 0;
  int num_glyphs_ = 0;
  int num_hmetrics_ = 0;
  bool long_loca_ = false;
  std::unordered_map<char32_t, std::uint16_t> cmap_;
};

/// Decodes UTF-8; invalid sequences become U+FFFD.
std::u32string decode_utf8(const std::string& s);

}  // namespace textsculpt
