#pragma once

#include <vector>

#include "textsculpt/truetype.hpp"

namespace textsculpt {

/// Affine map (a c e; b d f) applied as x' = a x + c y + e, y' = b x + d y + f.
struct Affine {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  PointF operator()(PointF p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }
  /// this ∘ other
  Affine then_after(const Affine& o) const {
    return {a * o.a + c * o.b, b * o.a + d * o.b, a * o.c + c * o.d,
            b * o.c + d * o.d, a * o.e + c * o.f + e, b * o.e + d * o.f + f};
  }
  static Affine translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static Affine scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  /// Counter-clockwise on screen (y down) by `deg` about (cx, cy).
  static Affine rotate_about(double deg, double cx, double cy);
};

using Polyline = std::vector<PointF>;

/// Flattens quadratic segments so the chord error stays under `tolerance`
/// (device units). Each returned polyline is closed (last point == first).
std::vector<Polyline> flatten(const std::vector<PathCommand>& path, const Affine& xf, double tolerance = 0.05);

/// Exact-area coverage accumulation (signed-area scan conversion): every line
/// segment deposits the signed area it sweeps into the cells it crosses, and a
/// per-row prefix sum recovers the winding-weighted coverage, clamped to
/// [0, 1]. Closed, non-self-overlapping contours give exact pixel coverage.
/// Geometry left of the canvas folds into column 0; geometry right of it is dropped.
class CoverageAccumulator {
 public:
  CoverageAccumulator(int width, int height);

  void add_line(PointF p0, PointF p1);
  void add_polyline(const Polyline& poly);

  /// Row-major coverage in [0, 1].
  std::vector<double> coverage() const;

  int width() const { return w_; }
  int height() const { return h_; }

 private:
  int w_, h_;
  std::vector<double> cells_;
};

}  // namespace textsculpt
