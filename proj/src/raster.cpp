#include "textsculpt/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace textsculpt {

Affine Affine::rotate_about(double deg, double cx, double cy) {
  const double t = deg * std::numbers::pi / 180.0;
  const double cs = std::cos(t), sn = std::sin(t);
  // y points down, so a visually counter-clockwise turn uses +sin on x from y.
  const Affine rot{cs, -sn, sn, cs, 0, 0};
  return translate(cx, cy).then_after(rot).then_after(translate(-cx, -cy));
}

std::vector<Polyline> flatten(const std::vector<PathCommand>& path, const Affine& xf, double tolerance) {
  std::vector<Polyline> out;
  Polyline cur;
  PointF pen;
  auto close = [&] {
    if (cur.size() >= 2) {
      if (!(cur.back() == cur.front())) cur.push_back(cur.front());
      out.push_back(std::move(cur));
    }
    cur.clear();
  };
  for (const auto& cmd : path) {
    switch (cmd.kind) {
      case PathCommand::Kind::MoveTo:
        close();
        pen = xf(cmd.to);
        cur.push_back(pen);
        break;
      case PathCommand::Kind::LineTo:
        pen = xf(cmd.to);
        cur.push_back(pen);
        break;
      case PathCommand::Kind::QuadTo: {
        const PointF p0 = pen, p1 = xf(cmd.control), p2 = xf(cmd.to);
        const double ddx = p0.x - 2 * p1.x + p2.x, ddy = p0.y - 2 * p1.y + p2.y;
        const double dd = std::hypot(ddx, ddy);
        const int n = std::clamp(static_cast<int>(std::ceil(std::sqrt(dd / (8.0 * tolerance)))), 1, 128);
        for (int i = 1; i <= n; ++i) {
          const double t = static_cast<double>(i) / n, u = 1 - t;
          cur.push_back({u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x, u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y});
        }
        pen = p2;
        break;
      }
      case PathCommand::Kind::Close:
        close();
        break;
    }
  }
  close();
  return out;
}

CoverageAccumulator::CoverageAccumulator(int width, int height)
    : w_(width), h_(height), cells_(static_cast<std::size_t>(width + 2) * height, 0.0) {}

void CoverageAccumulator::add_line(PointF p0, PointF p1) {
  if (p0.y == p1.y) return;
  double dir = 1.0;
  if (p0.y > p1.y) {
    std::swap(p0, p1);
    dir = -1.0;
  }
  const double dxdy = (p1.x - p0.x) / (p1.y - p0.y);
  double x = p0.x;
  if (p0.y < 0.0) x -= p0.y * dxdy;
  const int y_begin = std::max(0, static_cast<int>(std::floor(p0.y)));
  const int y_end = std::min(h_, static_cast<int>(std::ceil(p1.y)));
  for (int y = y_begin; y < y_end; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * (w_ + 2);
    const double dy = std::min(static_cast<double>(y + 1), p1.y) - std::max(static_cast<double>(y), p0.y);
    const double xnext = x + dxdy * dy;
    const double d = dy * dir;
    const double x0 = std::min(x, xnext), x1 = std::max(x, xnext);
    const double x0floor = std::floor(x0);
    const int x0i = static_cast<int>(x0floor);
    const double x1ceil = std::ceil(x1);
    const int x1i = static_cast<int>(x1ceil);
    auto cell = [&](int xi) -> double& { return cells_[row + static_cast<std::size_t>(std::clamp(xi, 0, w_ + 1))]; };
    if (x1i <= x0i + 1) {
      const double xmf = 0.5 * (x + xnext) - x0floor;
      cell(x0i) += d - d * xmf;
      cell(x0i + 1) += d * xmf;
    } else {
      const double s = 1.0 / (x1 - x0);
      const double x0f = x0 - x0floor;
      const double a0 = 0.5 * s * (1.0 - x0f) * (1.0 - x0f);
      const double x1f = x1 - x1ceil + 1.0;
      const double am = 0.5 * s * x1f * x1f;
      cell(x0i) += d * a0;
      if (x1i == x0i + 2) {
        cell(x0i + 1) += d * (1.0 - a0 - am);
      } else {
        const double a1 = s * (1.5 - x0f);
        cell(x0i + 1) += d * (a1 - a0);
        for (int xi = x0i + 2; xi < x1i - 1; ++xi) cell(xi) += d * s;
        const double a2 = a1 + (x1i - x0i - 3) * s;
        cell(x1i - 1) += d * (1.0 - a2 - am);
      }
      cell(x1i) += d * am;
    }
    x = xnext;
  }
}

void CoverageAccumulator::add_polyline(const Polyline& poly) {
  for (std::size_t i = 1; i < poly.size(); ++i) add_line(poly[i - 1], poly[i]);
}

std::vector<double> CoverageAccumulator::coverage() const {
  std::vector<double> out(static_cast<std::size_t>(w_) * h_);
  for (int y = 0; y < h_; ++y) {
    double acc = 0.0;
    const std::size_t row = static_cast<std::size_t>(y) * (w_ + 2);
    for (int x = 0; x < w_; ++x) {
      acc += cells_[row + x];
      out[static_cast<std::size_t>(y) * w_ + x] = std::min(1.0, std::abs(acc));
    }
  }
  return out;
}

}  // namespace textsculpt
