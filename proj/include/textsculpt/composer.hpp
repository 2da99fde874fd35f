#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "textsculpt/geometry.hpp"
#include "textsculpt/image.hpp"
#include "textsculpt/rng.hpp"
#include "textsculpt/task_factory.hpp"
#include "textsculpt/typesetting.hpp"

namespace textsculpt {

struct TextBox {
  Rect rect;
  std::string text;
  double confidence = 1.0;

  bool operator==(const TextBox&) const = default;
};

/// Occupied (1) / free (0) raster used to keep new text away from existing text.
struct OccupancyMask {
  BinaryMask grid;
  int margin_px = 0;

  Size size() const { return grid.size(); }
  /// Marks `r` expanded by the margin (clamped to the image) as occupied.
  void occupy(const Rect& r);
};

OccupancyMask build_occupancy(Size image_size, const std::vector<TextBox>& boxes, int margin_px);

/// Summed-area table over a binary mask; O(1) occupied-pixel counts per rect.
class IntegralMask {
 public:
  explicit IntegralMask(const BinaryMask& mask);
  long long count(const Rect& r) const;

 private:
  int w_, h_;
  std::vector<long long> sums_;
};

/// Seeded rejection sampling over candidate origins, falling back to an
/// exhaustive scan after `max_attempts` rejections. Throws NoSafeRegion.
Point find_placement(const OccupancyMask& mask, Size layer_size, Rng& rng, int max_attempts = 64);

/// Source-over composite of `layer` onto `background` at `origin`. Pixels
/// outside the layer rect are copied unchanged. Throws OutOfBounds.
Image composite_layer(const Image& background, const Image& layer, Point origin);
inline Image composite_layer(const Image& background, const RenderedLayer& layer, Point origin) {
  return composite_layer(background, layer.bitmap, origin);
}

struct StyleRanges {
  double size_min_px = 22.0;
  double size_max_px = 56.0;
  double rotation_max_deg = 12.0;
  double p_stroke = 0.3;
  double stroke_min_px = 1.0;
  double stroke_max_px = 3.0;
  double letter_spacing_max_px = 2.0;
  double line_spacing_min = 1.1;
  double line_spacing_max = 1.4;
  double max_width_fraction = 0.6;
  int max_lines = 3;
};

/// Draws a style (font, size, stroke, rotation, spacing); colors are chosen
/// later against the placement region.
TextStyle sample_style(const FontRegistry& registry, const StyleRanges& ranges, Rng& rng);

enum class LayerRole { Unchanged, Rewritten, Removed, Added, Distraction };
std::string_view to_string(LayerRole r);
LayerRole parse_layer_role(std::string_view s);

/// Ground truth for one rendered text element of a pair.
struct LayerRecord {
  LayerRole role = LayerRole::Unchanged;
  std::string source_text;  // empty when absent from the source
  std::string target_text;  // empty when absent from the target
  TextStyle source_style;
  TextStyle target_style;
  Rect source_rect;  // empty when absent from the source
  Rect target_rect;  // empty when absent from the target
  Point origin;

  bool operator==(const LayerRecord&) const = default;
};

struct ComposerOptions {
  int margin_px = 8;
  int max_attempts = 64;
  std::vector<TextBox> existing_text;  // pre-existing text on the background
  StyleRanges styles;
  CorpusSource distraction_corpus;     // required when distraction_count > 0
};

struct CompositePair {
  Image source;
  Image target;
  std::vector<Rect> edited_regions;
  std::vector<Rect> distraction_regions;
  EditTask task;
  std::vector<LayerRecord> layers;
  std::vector<TextBox> source_boxes;  // every text element of `source`
  std::vector<TextBox> target_boxes;  // every text element of `target`
};

CompositePair synthesize_pair(const Image& background, const EditTask& task, const FontRegistry& registry,
                              int distraction_count, Rng& rng, const ComposerOptions& options = {});

/// Pixel (x, y) differs between the two images and lies outside every rect.
/// Returns the number of such pixels; zero means background identity holds.
long long count_diff_outside(const Image& a, const Image& b, const std::vector<Rect>& allowed);

/// Stable sort by rect top, ties broken by rect left.
std::vector<TextBox> reading_order(std::vector<TextBox> boxes);

}  // namespace textsculpt
