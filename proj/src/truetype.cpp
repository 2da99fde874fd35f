#include "textsculpt/truetype.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "textsculpt/error.hpp"

namespace textsculpt {

namespace {

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& d) : d_(d) {}

  void need(std::size_t off, std::size_t n) const {
    if (off > d_.size() || n > d_.size() - off) throw Error(ErrorCode::Io, "truncated font data");
  }
  std::uint8_t u8(std::size_t off) const {
    need(off, 1);
    return d_[off];
  }
  std::uint16_t u16(std::size_t off) const {
    need(off, 2);
    return static_cast<std::uint16_t>((d_[off] << 8) | d_[off + 1]);
  }
  std::int16_t i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    return (static_cast<std::uint32_t>(d_[off]) << 24) | (static_cast<std::uint32_t>(d_[off + 1]) << 16) |
           (static_cast<std::uint32_t>(d_[off + 2]) << 8) | d_[off + 3];
  }
  // F2Dot14
  double f2dot14(std::size_t off) const { return i16(off) / 16384.0; }

 private:
  const std::vector<std::uint8_t>& d_;
};

std::uint32_t tag(const char* t) {
  return (static_cast<std::uint32_t>(t[0]) << 24) | (static_cast<std::uint32_t>(t[1]) << 16) |
         (static_cast<std::uint32_t>(t[2]) << 8) | static_cast<std::uint32_t>(t[3]);
}

// Extents of a quadratic Bezier along one axis.
void quad_extent(double p0, double p1, double p2, double& lo, double& hi) {
  lo = std::min({lo, p0, p2});
  hi = std::max({hi, p0, p2});
  const double denom = p0 - 2 * p1 + p2;
  if (denom != 0.0) {
    const double t = (p0 - p1) / denom;
    if (t > 0.0 && t < 1.0) {
      const double v = (1 - t) * (1 - t) * p0 + 2 * (1 - t) * t * p1 + t * t * p2;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
}

PointF apply(const double m[6], PointF p) { return {m[0] * p.x + m[2] * p.y + m[4], m[1] * p.x + m[3] * p.y + m[5]}; }

void parse_cmap_format4(const Reader& r, std::size_t off, std::unordered_map<char32_t, std::uint16_t>& out) {
  const int seg_count = r.u16(off + 6) / 2;
  const std::size_t ends = off + 14;
  const std::size_t starts = ends + 2 * seg_count + 2;
  const std::size_t deltas = starts + 2 * seg_count;
  const std::size_t ranges = deltas + 2 * seg_count;
  for (int s = 0; s < seg_count; ++s) {
    const std::uint16_t end = r.u16(ends + 2 * s);
    const std::uint16_t start = r.u16(starts + 2 * s);
    const std::uint16_t delta = r.u16(deltas + 2 * s);
    const std::uint16_t range_off = r.u16(ranges + 2 * s);
    if (start > end) continue;
    for (std::uint32_t c = start; c <= end && c != 0xFFFF; ++c) {
      std::uint16_t g;
      if (range_off == 0) {
        g = static_cast<std::uint16_t>(c + delta);
      } else {
        const std::size_t addr = ranges + 2 * s + range_off + 2 * (c - start);
        g = r.u16(addr);
        if (g != 0) g = static_cast<std::uint16_t>(g + delta);
      }
      if (g != 0) out.emplace(static_cast<char32_t>(c), g);
    }
  }
}

void parse_cmap_format12(const Reader& r, std::size_t off, std::unordered_map<char32_t, std::uint16_t>& out) {
  const std::uint32_t groups = r.u32(off + 12);
  for (std::uint32_t i = 0; i < groups; ++i) {
    const std::size_t g = off + 16 + 12 * static_cast<std::size_t>(i);
    const std::uint32_t start = r.u32(g), end = r.u32(g + 4), glyph = r.u32(g + 8);
    if (end < start || end - start > 0x10FFFF) throw Error(ErrorCode::Io, "bad cmap group");
    for (std::uint32_t c = start; c <= end; ++c) {
      const std::uint32_t gid = glyph + (c - start);
      if (gid != 0 && gid <= 0xFFFF) out.emplace(static_cast<char32_t>(c), static_cast<std::uint16_t>(gid));
    }
  }
}

}  // namespace

Font Font::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open font " + path.string());
  return parse({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

Font Font::parse(std::vector<std::uint8_t> bytes) {
  Font f;
  f.data_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
  const Reader r(*f.data_);

  const std::uint32_t version = r.u32(0);
  if (version != 0x00010000 && version != tag("true"))
    throw Error(ErrorCode::Io, "not a TrueType outline font");

  std::uint32_t head = 0, maxp = 0, hhea = 0, cmap = 0;
  const int num_tables = r.u16(4);
  for (int i = 0; i < num_tables; ++i) {
    const std::size_t rec = 12 + 16 * static_cast<std::size_t>(i);
    const std::uint32_t t = r.u32(rec), off = r.u32(rec + 8), len = r.u32(rec + 12);
    r.need(off, len);
    if (t == tag("head")) head = off;
    else if (t == tag("maxp")) maxp = off;
    else if (t == tag("hhea")) hhea = off;
    else if (t == tag("hmtx")) f.hmtx_ = off;
    else if (t == tag("cmap")) cmap = off;
    else if (t == tag("loca")) f.loca_ = off;
    else if (t == tag("glyf")) f.glyf_ = off;
  }
  if (!head || !maxp || !hhea || !f.hmtx_ || !cmap || !f.loca_ || !f.glyf_)
    throw Error(ErrorCode::Io, "missing required TrueType table");

  if (r.u32(head + 12) != 0x5F0F3CF5) throw Error(ErrorCode::Io, "bad head magic");
  f.units_per_em_ = r.u16(head + 18);
  if (f.units_per_em_ == 0) throw Error(ErrorCode::Io, "unitsPerEm is zero");
  f.long_loca_ = r.i16(head + 50) != 0;
  f.num_glyphs_ = r.u16(maxp + 4);
  f.ascender_ = r.i16(hhea + 4);
  f.descender_ = r.i16(hhea + 6);
  f.line_gap_ = r.i16(hhea + 8);
  f.num_hmetrics_ = r.u16(hhea + 34);
  if (f.num_glyphs_ == 0 || f.num_hmetrics_ == 0) throw Error(ErrorCode::Io, "font has no glyphs");

  // Prefer a full-repertoire Unicode subtable, then BMP.
  std::size_t best = 0;
  int best_rank = 0;
  const int n_sub = r.u16(cmap + 2);
  for (int i = 0; i < n_sub; ++i) {
    const std::size_t rec = cmap + 4 + 8 * static_cast<std::size_t>(i);
    const int platform = r.u16(rec), encoding = r.u16(rec + 2);
    const std::size_t off = cmap + r.u32(rec + 4);
    const int format = r.u16(off);
    int rank = 0;
    if (format == 12 && (platform == 0 || (platform == 3 && encoding == 10))) rank = 3;
    else if (format == 4 && (platform == 0 || (platform == 3 && encoding == 1))) rank = 2;
    if (rank > best_rank) {
      best_rank = rank;
      best = off;
    }
  }
  if (best_rank == 0) throw Error(ErrorCode::Io, "no Unicode cmap subtable");
  if (r.u16(best) == 12)
    parse_cmap_format12(r, best, f.cmap_);
  else
    parse_cmap_format4(r, best, f.cmap_);
  return f;
}

std::uint16_t Font::glyph_index(char32_t codepoint) const {
  const auto it = cmap_.find(codepoint);
  return it == cmap_.end() ? 0 : it->second;
}

int Font::advance_width(std::uint16_t glyph) const {
  const Reader r(*data_);
  const int idx = std::min<int>(glyph, num_hmetrics_ - 1);
  return r.u16(hmtx_ + 4 * static_cast<std::size_t>(idx));
}

GlyphOutline Font::outline(std::uint16_t glyph) const {
  GlyphOutline out;
  const double identity[6] = {1, 0, 0, 1, 0, 0};
  outline_into(glyph, identity, 0, out);

  // Exact extents from the emitted path.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool any = false;
  PointF cur;
  for (const auto& c : out.commands) {
    if (c.kind == PathCommand::Kind::Close) continue;
    if (!any) {
      x0 = x1 = c.to.x;
      y0 = y1 = c.to.y;
      any = true;
    }
    if (c.kind == PathCommand::Kind::QuadTo) {
      quad_extent(cur.x, c.control.x, c.to.x, x0, x1);
      quad_extent(cur.y, c.control.y, c.to.y, y0, y1);
    } else {
      x0 = std::min(x0, c.to.x);
      x1 = std::max(x1, c.to.x);
      y0 = std::min(y0, c.to.y);
      y1 = std::max(y1, c.to.y);
    }
    cur = c.to;
  }
  if (any) out.bounds = {x0, y0, x1, y1};
  return out;
}

void Font::outline_into(std::uint16_t glyph, const double m[6], int depth, GlyphOutline& out) const {
  if (glyph >= num_glyphs_) throw Error(ErrorCode::Io, "glyph index out of range");
  if (depth > 8) throw Error(ErrorCode::Io, "composite glyph nesting too deep");
  const Reader r(*data_);
  std::uint32_t start, end;
  if (long_loca_) {
    start = r.u32(loca_ + 4 * static_cast<std::size_t>(glyph));
    end = r.u32(loca_ + 4 * static_cast<std::size_t>(glyph) + 4);
  } else {
    start = 2u * r.u16(loca_ + 2 * static_cast<std::size_t>(glyph));
    end = 2u * r.u16(loca_ + 2 * static_cast<std::size_t>(glyph) + 2);
  }
  if (end <= start) return;  // blank glyph
  const std::size_t g = glyf_ + start;
  r.need(g, end - start);
  const int n_contours = r.i16(g);

  if (n_contours >= 0) {
    std::vector<int> end_pts(static_cast<std::size_t>(n_contours));
    for (int i = 0; i < n_contours; ++i) end_pts[i] = r.u16(g + 10 + 2 * static_cast<std::size_t>(i));
    const int n_points = n_contours ? end_pts.back() + 1 : 0;
    std::size_t p = g + 10 + 2 * static_cast<std::size_t>(n_contours);
    p += 2 + r.u16(p);  // skip instructions

    std::vector<std::uint8_t> flags;
    flags.reserve(static_cast<std::size_t>(n_points));
    while (static_cast<int>(flags.size()) < n_points) {
      const std::uint8_t fl = r.u8(p++);
      flags.push_back(fl);
      if (fl & 8) {
        int rep = r.u8(p++);
        while (rep-- > 0 && static_cast<int>(flags.size()) < n_points) flags.push_back(fl);
      }
    }
    std::vector<PointF> pts(static_cast<std::size_t>(n_points));
    int v = 0;
    for (int i = 0; i < n_points; ++i) {
      const auto fl = flags[i];
      if (fl & 2) {
        const int d = r.u8(p++);
        v += (fl & 16) ? d : -d;
      } else if (!(fl & 16)) {
        v += r.i16(p);
        p += 2;
      }
      pts[i].x = v;
    }
    v = 0;
    for (int i = 0; i < n_points; ++i) {
      const auto fl = flags[i];
      if (fl & 4) {
        const int d = r.u8(p++);
        v += (fl & 32) ? d : -d;
      } else if (!(fl & 32)) {
        v += r.i16(p);
        p += 2;
      }
      pts[i].y = v;
    }

    int first = 0;
    for (int c = 0; c < n_contours; ++c) {
      const int last = end_pts[c];
      if (last < first || last >= n_points) throw Error(ErrorCode::Io, "bad contour end point");
      const int n = last - first + 1;
      auto on = [&](int i) { return (flags[first + (i % n)] & 1) != 0; };
      auto pt = [&](int i) { return apply(m, pts[first + (i % n)]); };
      auto mid = [](PointF a, PointF b) { return PointF{(a.x + b.x) / 2, (a.y + b.y) / 2}; };

      // Start from an on-curve point, or the implied midpoint of two off-curve points.
      int s = 0;
      while (s < n && !on(s)) ++s;
      PointF start_pt;
      int begin;
      if (s == n) {
        start_pt = mid(pt(0), pt(1));
        begin = 1;
      } else {
        start_pt = pt(s);
        begin = s + 1;
      }
      out.commands.push_back({PathCommand::Kind::MoveTo, {}, start_pt});
      bool have_ctrl = false;
      PointF ctrl;
      for (int k = 0; k < n; ++k) {
        const int i = begin + k;
        const PointF q = pt(i);
        if (on(i)) {
          if (have_ctrl)
            out.commands.push_back({PathCommand::Kind::QuadTo, ctrl, q});
          else
            out.commands.push_back({PathCommand::Kind::LineTo, {}, q});
          have_ctrl = false;
        } else {
          if (have_ctrl) out.commands.push_back({PathCommand::Kind::QuadTo, ctrl, mid(ctrl, q)});
          ctrl = q;
          have_ctrl = true;
        }
      }
      // All-off-curve contours end on a pending control point.
      if (have_ctrl) out.commands.push_back({PathCommand::Kind::QuadTo, ctrl, start_pt});
      out.commands.push_back({PathCommand::Kind::Close, {}, start_pt});
      first = last + 1;
    }
    return;
  }

  // Composite glyph.
  std::size_t p = g + 10;
  for (;;) {
    const std::uint16_t flags = r.u16(p);
    const std::uint16_t component = r.u16(p + 2);
    p += 4;
    double dx, dy;
    if (flags & 1) {
      dx = r.i16(p);
      dy = r.i16(p + 2);
      p += 4;
    } else {
      dx = static_cast<std::int8_t>(r.u8(p));
      dy = static_cast<std::int8_t>(r.u8(p + 1));
      p += 2;
    }
    // Point-matching anchors (ARGS_ARE_XY_VALUES clear) are treated as zero offset.
    if (!(flags & 2)) dx = dy = 0;
    double a = 1, b = 0, c = 0, d = 1;
    if (flags & 0x0008) {
      a = d = r.f2dot14(p);
      p += 2;
    } else if (flags & 0x0040) {
      a = r.f2dot14(p);
      d = r.f2dot14(p + 2);
      p += 4;
    } else if (flags & 0x0080) {
      a = r.f2dot14(p);
      b = r.f2dot14(p + 2);
      c = r.f2dot14(p + 4);
      d = r.f2dot14(p + 6);
      p += 8;
    }
    // child transform = m ∘ [a c dx; b d dy]
    const double child[6] = {
        m[0] * a + m[2] * b, m[1] * a + m[3] * b, m[0] * c + m[2] * d,
        m[1] * c + m[3] * d, m[0] * dx + m[2] * dy + m[4], m[1] * dx + m[3] * dy + m[5],
    };
    outline_into(component, child, depth + 1, out);
    if (!(flags & 0x0020)) break;
  }
}

std::u32string decode_utf8(const std::string& s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : (c >> 3) == 30 ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0x7F >> len);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(ok ? cp : 0xFFFD);
    i += ok ? len : 1;
  }
  return out;
}

}  // namespace textsculpt
