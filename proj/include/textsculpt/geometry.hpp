#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <vector>

namespace textsculpt {

struct Size {
  int width = 0;
  int height = 0;

  bool operator==(const Size&) const = default;
  long long area() const { return static_cast<long long>(width) * height; }
};

struct Point {
  int x = 0;
  int y = 0;

  bool operator==(const Point&) const = default;
};

/// Integer pixel rectangle, half-open: covers [x, x+w) × [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Rect&) const = default;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool empty() const { return w <= 0 || h <= 0; }
  long long area() const { return empty() ? 0 : static_cast<long long>(w) * h; }

  bool contains(int px, int py) const { return px >= x && px < right() && py >= y && py < bottom(); }
  bool contains(const Rect& o) const {
    return o.empty() || (o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom());
  }
  bool intersects(const Rect& o) const {
    return !empty() && !o.empty() && o.x < right() && x < o.right() && o.y < bottom() && y < o.bottom();
  }

  Rect intersected(const Rect& o) const {
    const int nx = std::max(x, o.x), ny = std::max(y, o.y);
    const int nr = std::min(right(), o.right()), nb = std::min(bottom(), o.bottom());
    if (nr <= nx || nb <= ny) return {};
    return {nx, ny, nr - nx, nb - ny};
  }

  Rect united(const Rect& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    const int nx = std::min(x, o.x), ny = std::min(y, o.y);
    return {nx, ny, std::max(right(), o.right()) - nx, std::max(bottom(), o.bottom()) - ny};
  }

  Rect expanded(int margin) const { return {x - margin, y - margin, w + 2 * margin, h + 2 * margin}; }
  Rect translated(int dx, int dy) const { return {x + dx, y + dy, w, h}; }
  Rect clamped(Size bounds) const { return intersected({0, 0, bounds.width, bounds.height}); }
};

/// Real-valued rectangle used for layout geometry before pixel snapping.
struct RectF {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool operator==(const RectF&) const = default;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }

  RectF united(const RectF& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
  }
  bool overlaps(const RectF& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }

  /// Smallest integer rect covering this one.
  Rect snapped_out() const {
    if (empty()) return {};
    const int ix = static_cast<int>(std::floor(x0)), iy = static_cast<int>(std::floor(y0));
    return {ix, iy, static_cast<int>(std::ceil(x1)) - ix, static_cast<int>(std::ceil(y1)) - iy};
  }
};

inline Rect union_of(const std::vector<Rect>& rects) {
  Rect out;
  for (const auto& r : rects) out = out.united(r);
  return out;
}

}  // namespace textsculpt
