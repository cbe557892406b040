#include "dfm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dfm/error.hpp"

namespace dfm {

namespace {

Coord checked_add(Coord a, Coord b) {
  Coord out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorKind::Overflow, "coordinate overflow in transform");
  }
  return out;
}

Coord checked_neg(Coord a) {
  if (a == std::numeric_limits<Coord>::min()) {
    throw Error(ErrorKind::Overflow, "coordinate overflow in transform");
  }
  return -a;
}

// Linear part of a transform: entries are 0 or +-1.
struct Matrix {
  int m00, m01, m10, m11;
};

Matrix matrix_of(const Transform& t) {
  int c = 0;
  int s = 0;
  switch (t.rotation) {
    case 0: c = 1; s = 0; break;
    case 90: c = 0; s = 1; break;
    case 180: c = -1; s = 0; break;
    case 270: c = 0; s = -1; break;
    default:
      throw Error(ErrorKind::InvalidValue,
                  "rotation must be 0, 90, 180 or 270, got " + std::to_string(t.rotation));
  }
  if (t.mirror_x) return {c, s, s, -c};
  return {c, -s, s, c};
}

Coord scale(int k, Coord v) {
  if (k == 0) return 0;
  return k > 0 ? v : checked_neg(v);
}

Point mul(const Matrix& m, const Point& p) {
  return {checked_add(scale(m.m00, p.x), scale(m.m01, p.y)),
          checked_add(scale(m.m10, p.x), scale(m.m11, p.y))};
}

Matrix mul(const Matrix& a, const Matrix& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

Transform from_matrix(const Matrix& m, const Point& translation) {
  Transform t;
  t.translation = translation;
  int det = m.m00 * m.m11 - m.m01 * m.m10;
  t.mirror_x = det < 0;
  // Column 0 of the rotation part: M itself, or M*F when mirrored (F = F^-1).
  int c = m.m00;
  int s = m.m10;
  if (c == 1) t.rotation = 0;
  else if (s == 1) t.rotation = 90;
  else if (c == -1) t.rotation = 180;
  else t.rotation = 270;
  return t;
}

struct DisjointSet {
  std::vector<std::size_t> parent;

  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

Rect transpose(const Rect& r) { return {{r.lo.y, r.lo.x}, {r.hi.y, r.hi.x}}; }

// Clearances towards -x and +x from the via, minimized over horizontal rows.
std::optional<std::pair<Coord, Coord>> horizontal_clearance(const Rect& via,
                                                            std::span<const Rect> metal) {
  std::vector<const Rect*> rel;
  std::vector<Coord> ys{via.lo.y, via.hi.y};
  for (const Rect& r : metal) {
    if (r.lo.y < via.hi.y && r.hi.y > via.lo.y && r.has_area()) {
      rel.push_back(&r);
      if (r.lo.y > via.lo.y && r.lo.y < via.hi.y) ys.push_back(r.lo.y);
      if (r.hi.y > via.lo.y && r.hi.y < via.hi.y) ys.push_back(r.hi.y);
    }
  }
  if (rel.empty()) return std::nullopt;
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  Coord left = std::numeric_limits<Coord>::max();
  Coord right = std::numeric_limits<Coord>::max();
  std::vector<std::pair<Coord, Coord>> spans;
  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    Coord y0 = ys[k];
    Coord y1 = ys[k + 1];
    spans.clear();
    for (const Rect* r : rel) {
      if (r->lo.y <= y0 && r->hi.y >= y1) spans.emplace_back(r->lo.x, r->hi.x);
    }
    std::sort(spans.begin(), spans.end());
    bool covered = false;
    std::size_t i = 0;
    while (i < spans.size()) {
      Coord a = spans[i].first;
      Coord b = spans[i].second;
      std::size_t j = i + 1;
      while (j < spans.size() && spans[j].first <= b) {
        b = std::max(b, spans[j].second);
        ++j;
      }
      if (a <= via.lo.x && b >= via.hi.x) {
        left = std::min(left, via.lo.x - a);
        right = std::min(right, b - via.hi.x);
        covered = true;
        break;
      }
      i = j;
    }
    if (!covered) return std::nullopt;
  }
  return std::make_pair(left, right);
}

enum Dir { kRight = 0, kUp = 1, kLeft = 2, kDown = 3 };

// Boundary tracing on the compressed grid of one connected group.
RectilinearPolygon trace_group(std::span<const Rect> rects) {
  std::vector<Coord> xs;
  std::vector<Coord> ys;
  for (const Rect& r : rects) {
    xs.push_back(r.lo.x);
    xs.push_back(r.hi.x);
    ys.push_back(r.lo.y);
    ys.push_back(r.hi.y);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  const std::size_t cx = nx - 1;
  const std::size_t cy = ny - 1;
  std::vector<char> cov(cx * cy, 0);
  auto xi = [&](Coord v) { return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), v) - xs.begin()); };
  auto yi = [&](Coord v) { return static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), v) - ys.begin()); };
  for (const Rect& r : rects) {
    for (std::size_t i = xi(r.lo.x); i < xi(r.hi.x); ++i) {
      for (std::size_t j = yi(r.lo.y); j < yi(r.hi.y); ++j) cov[i * cy + j] = 1;
    }
  }
  auto covered = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
    if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(cx) || j >= static_cast<std::ptrdiff_t>(cy)) return false;
    return cov[static_cast<std::size_t>(i) * cy + static_cast<std::size_t>(j)] != 0;
  };

  struct Edge {
    std::size_t from;
    std::size_t to;
    int dir;
    bool used = false;
  };
  std::vector<Edge> edges;
  std::vector<std::array<int, 2>> out(nx * ny, {-1, -1});
  auto vid = [&](std::size_t i, std::size_t j) { return i * ny + j; };
  auto add = [&](std::size_t from, std::size_t to, int dir) {
    auto& slot = out[from];
    slot[slot[0] < 0 ? 0 : 1] = static_cast<int>(edges.size());
    edges.push_back({from, to, dir});
  };
  for (std::size_t i = 0; i < cx; ++i) {
    for (std::size_t j = 0; j < cy; ++j) {
      if (!cov[i * cy + j]) continue;
      auto si = static_cast<std::ptrdiff_t>(i);
      auto sj = static_cast<std::ptrdiff_t>(j);
      if (!covered(si, sj - 1)) add(vid(i, j), vid(i + 1, j), kRight);
      if (!covered(si, sj + 1)) add(vid(i + 1, j + 1), vid(i, j + 1), kLeft);
      if (!covered(si - 1, sj)) add(vid(i, j + 1), vid(i, j), kDown);
      if (!covered(si + 1, sj)) add(vid(i + 1, j), vid(i + 1, j + 1), kUp);
    }
  }

  RectilinearPolygon poly;
  bool have_outer = false;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (edges[start].used) continue;
    std::vector<Point> loop;
    std::size_t e = start;
    while (!edges[e].used) {
      edges[e].used = true;
      const Edge& cur = edges[e];
      std::size_t v = cur.to;
      // Prefer the left turn so that loops never cross at pinch vertices.
      int best = -1;
      for (int turn : {1, 0, 3}) {
        int want = (cur.dir + turn) % 4;
        for (int cand : out[v]) {
          if (cand >= 0 && edges[static_cast<std::size_t>(cand)].dir == want) {
            best = cand;
            break;
          }
        }
        if (best >= 0) break;
      }
      const Edge& next = edges[static_cast<std::size_t>(best)];
      if (next.dir != cur.dir) loop.push_back({xs[v / ny], ys[v % ny]});
      e = static_cast<std::size_t>(best);
    }
    std::rotate(loop.begin(), std::min_element(loop.begin(), loop.end()), loop.end());
    if (signed_area(loop) > 0) {
      if (have_outer) throw std::logic_error("connected group produced two outer boundaries");
      have_outer = true;
      poly.boundary = std::move(loop);
    } else {
      poly.holes.push_back(std::move(loop));
    }
  }
  std::sort(poly.holes.begin(), poly.holes.end());
  return poly;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::DanglingReference: return "dangling-reference";
    case ErrorKind::CyclicHierarchy: return "cyclic-hierarchy";
    case ErrorKind::NonIntegralCoordinate: return "non-integral-coordinate";
    case ErrorKind::InvalidValue: return "invalid-value";
    case ErrorKind::UnknownCell: return "unknown-cell";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Short: return "short";
    case ErrorKind::DuplicateName: return "duplicate-name";
    case ErrorKind::UnknownKind: return "unknown-kind";
    case ErrorKind::RuleOrdering: return "rule-ordering";
    case ErrorKind::NonRectangularVia: return "non-rectangular-via";
    case ErrorKind::MissingSpacingRule: return "missing-spacing-rule";
    case ErrorKind::DigestMismatch: return "digest-mismatch";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Rect make_rect(Coord x1, Coord y1, Coord x2, Coord y2) {
  return {{std::min(x1, x2), std::min(y1, y2)}, {std::max(x1, x2), std::max(y1, y2)}};
}

Rect bounding_union(const Rect& a, const Rect& b) {
  return {{std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y)},
          {std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y)}};
}

bool intersects_closed(const Rect& a, const Rect& b) {
  return a.lo.x <= b.hi.x && b.lo.x <= a.hi.x && a.lo.y <= b.hi.y && b.lo.y <= a.hi.y;
}

bool connects(const Rect& a, const Rect& b) {
  Coord ix = std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x);
  Coord iy = std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y);
  return ix >= 0 && iy >= 0 && (ix > 0 || iy > 0);
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Up: return "up";
    case Side::Down: return "down";
    case Side::None: return "none";
  }
  return "none";
}

Side side_from_string(std::string_view s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "up") return Side::Up;
  if (s == "down") return Side::Down;
  if (s == "none") return Side::None;
  throw Error(ErrorKind::InvalidValue, "unknown side '" + std::string(s) + "'");
}

Point apply_transform(const Point& p, const Transform& t) {
  Point q = mul(matrix_of(t), p);
  return {checked_add(q.x, t.translation.x), checked_add(q.y, t.translation.y)};
}

Rect apply_transform(const Rect& r, const Transform& t) {
  Point a = apply_transform(r.lo, t);
  Point b = apply_transform(r.hi, t);
  return make_rect(a.x, a.y, b.x, b.y);
}

Transform compose(const Transform& outer, const Transform& inner) {
  Matrix mo = matrix_of(outer);
  Matrix m = mul(mo, matrix_of(inner));
  Point t = mul(mo, inner.translation);
  t = {checked_add(t.x, outer.translation.x), checked_add(t.y, outer.translation.y)};
  return from_matrix(m, t);
}

Coord signed_area(std::span<const Point> loop) {
  Coord twice = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % loop.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2;
}

Coord RectilinearPolygon::area() const {
  Coord a = signed_area(boundary);
  for (const auto& h : holes) a += signed_area(h);
  return a;
}

Rect RectilinearPolygon::bbox() const {
  if (boundary.empty()) return {};
  Rect box{boundary.front(), boundary.front()};
  for (const Point& p : boundary) box = bounding_union(box, {p, p});
  return box;
}

std::vector<std::vector<std::size_t>> group_connected(std::span<const Rect> rects) {
  DisjointSet sets(rects.size());
  RectIndex index(rects);
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j : index.query(rects[i])) {
      if (j > i && connects(rects[i], rects[j])) sets.unite(i, j);
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::ptrdiff_t> slot(rects.size(), -1);
  for (std::size_t i = 0; i < rects.size(); ++i) {
    std::size_t root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return groups;
}

std::vector<RectilinearPolygon> merge(std::span<const Rect> rects) {
  std::vector<Rect> valid;
  for (const Rect& r : rects) {
    if (r.has_area()) valid.push_back(r);
  }
  std::vector<RectilinearPolygon> polys;
  for (const auto& group : group_connected(valid)) {
    std::vector<Rect> members;
    for (std::size_t i : group) members.push_back(valid[i]);
    polys.push_back(trace_group(members));
  }
  std::sort(polys.begin(), polys.end(), [](const auto& a, const auto& b) {
    return std::tie(a.boundary, a.holes) < std::tie(b.boundary, b.holes);
  });
  return polys;
}

Coord union_area(std::span<const Rect> rects) {
  std::vector<Coord> ys;
  for (const Rect& r : rects) {
    if (!r.has_area()) continue;
    ys.push_back(r.lo.y);
    ys.push_back(r.hi.y);
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  Coord total = 0;
  std::vector<std::pair<Coord, Coord>> spans;
  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    spans.clear();
    for (const Rect& r : rects) {
      if (r.has_area() && r.lo.y <= ys[k] && r.hi.y >= ys[k + 1]) spans.emplace_back(r.lo.x, r.hi.x);
    }
    std::sort(spans.begin(), spans.end());
    Coord len = 0;
    Coord cur_lo = 0;
    Coord cur_hi = 0;
    bool open = false;
    for (auto [a, b] : spans) {
      if (open && a <= cur_hi) {
        cur_hi = std::max(cur_hi, b);
        continue;
      }
      if (open) len += cur_hi - cur_lo;
      cur_lo = a;
      cur_hi = b;
      open = true;
    }
    if (open) len += cur_hi - cur_lo;
    total += len * (ys[k + 1] - ys[k]);
  }
  return total;
}

RectilinearPolygon Component::outline() const {
  auto polys = merge(rects);
  if (polys.size() != 1) throw std::logic_error("component is not connected");
  return std::move(polys.front());
}

std::vector<Component> connected_components(std::span<const LayerRect> shapes) {
  std::vector<Rect> rects;
  std::set<std::string> labels;
  rects.reserve(shapes.size());
  for (const auto& s : shapes) {
    rects.push_back(s.rect);
    if (s.net) labels.insert(*s.net);
  }

  std::vector<Component> comps;
  for (const auto& group : group_connected(rects)) {
    Component c;
    std::set<std::string> nets;
    for (std::size_t i : group) {
      c.rects.push_back(rects[i]);
      if (shapes[i].net) nets.insert(*shapes[i].net);
    }
    if (nets.size() > 1) {
      std::string names;
      for (const auto& n : nets) names += (names.empty() ? "" : ", ") + n;
      throw Error(ErrorKind::Short, "short between nets " + names);
    }
    std::sort(c.rects.begin(), c.rects.end());
    c.bbox = c.rects.front();
    for (const Rect& r : c.rects) c.bbox = bounding_union(c.bbox, r);
    if (!nets.empty()) c.net = *nets.begin();
    comps.push_back(std::move(c));
  }
  std::sort(comps.begin(), comps.end(),
            [](const Component& a, const Component& b) { return a.rects.front() < b.rects.front(); });
  for (std::size_t i = 0; i < comps.size(); ++i) {
    Component& c = comps[i];
    c.id = static_cast<int>(i);
    if (c.net.empty()) {
      c.synthesized_net = true;
      c.net = "anon_" + std::to_string(i);
      while (labels.count(c.net)) c.net += "_x";
    }
  }
  return comps;
}

std::optional<std::array<Coord, 4>> enclosure_all_sides(const Rect& via, std::span<const Rect> metal) {
  auto h = horizontal_clearance(via, metal);
  if (!h) return std::nullopt;
  std::vector<Rect> flipped;
  flipped.reserve(metal.size());
  for (const Rect& r : metal) flipped.push_back(transpose(r));
  auto v = horizontal_clearance(transpose(via), flipped);
  if (!v) return std::nullopt;
  return std::array<Coord, 4>{h->first, h->second, v->second, v->first};
}

std::optional<Coord> directed_enclosure(const Rect& via, std::span<const Rect> metal, Side side) {
  if (side == Side::None) throw Error(ErrorKind::InvalidValue, "enclosure side must be a direction");
  auto all = enclosure_all_sides(via, metal);
  if (!all) return std::nullopt;
  for (std::size_t i = 0; i < kAllSides.size(); ++i) {
    if (kAllSides[i] == side) return (*all)[i];
  }
  return std::nullopt;
}

std::optional<Coord> directed_enclosure(const Rect& via, const Component& metal, Side side) {
  return directed_enclosure(via, metal.rects, side);
}

Clearance rect_clearance(const Rect& a, const Rect& b) {
  Clearance c;
  Coord x0;
  Coord x1;
  Coord y0;
  Coord y1;
  if (b.lo.x > a.hi.x) { x0 = a.hi.x; x1 = b.lo.x; }
  else if (a.lo.x > b.hi.x) { x0 = b.hi.x; x1 = a.lo.x; }
  else { x0 = std::max(a.lo.x, b.lo.x); x1 = std::min(a.hi.x, b.hi.x); }
  if (b.lo.y > a.hi.y) { y0 = a.hi.y; y1 = b.lo.y; }
  else if (a.lo.y > b.hi.y) { y0 = b.hi.y; y1 = a.lo.y; }
  else { y0 = std::max(a.lo.y, b.lo.y); y1 = std::min(a.hi.y, b.hi.y); }
  Coord dx = (b.lo.x > a.hi.x || a.lo.x > b.hi.x) ? x1 - x0 : 0;
  Coord dy = (b.lo.y > a.hi.y || a.lo.y > b.hi.y) ? y1 - y0 : 0;
  c.squared = dx * dx + dy * dy;
  c.witness = {{x0, y0}, {x1, y1}};
  return c;
}

Clearance min_clearance(std::span<const Rect> a, std::span<const Rect> b) {
  Clearance best;
  best.squared = std::numeric_limits<std::int64_t>::max();
  for (const Rect& ra : a) {
    for (const Rect& rb : b) {
      Clearance c = rect_clearance(ra, rb);
      if (c.squared < best.squared) best = c;
      else if (c.squared == best.squared) best.witness = bounding_union(best.witness, c.witness);
    }
  }
  return best;
}

double component_distance(const Component& a, const Component& b) {
  return std::sqrt(static_cast<double>(min_clearance(a.rects, b.rects).squared));
}

std::int64_t isqrt(std::int64_t v) {
  if (v <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

Rect grow_edge_outward(const EdgeSegment& e, Coord delta) {
  if (delta <= 0) throw Error(ErrorKind::InvalidValue, "edge growth must be positive, got " + std::to_string(delta));
  bool horizontal = e.a.y == e.b.y && e.a.x != e.b.x;
  bool vertical = e.a.x == e.b.x && e.a.y != e.b.y;
  if (horizontal && (e.outward == Side::Up || e.outward == Side::Down)) {
    Coord lo = std::min(e.a.x, e.b.x);
    Coord hi = std::max(e.a.x, e.b.x);
    if (e.outward == Side::Up) return {{lo, e.a.y}, {hi, e.a.y + delta}};
    return {{lo, e.a.y - delta}, {hi, e.a.y}};
  }
  if (vertical && (e.outward == Side::Left || e.outward == Side::Right)) {
    Coord lo = std::min(e.a.y, e.b.y);
    Coord hi = std::max(e.a.y, e.b.y);
    if (e.outward == Side::Right) return {{e.a.x, lo}, {e.a.x + delta, hi}};
    return {{e.a.x - delta, lo}, {e.a.x, hi}};
  }
  throw Error(ErrorKind::InvalidValue, "edge must be axis-parallel with a perpendicular outward side");
}

std::vector<Rect> subtract(const Rect& r, std::span<const Rect> cut) {
  std::vector<Rect> pieces{r};
  std::vector<Rect> next;
  for (const Rect& c : cut) {
    next.clear();
    for (const Rect& p : pieces) {
      Coord ix0 = std::max(p.lo.x, c.lo.x);
      Coord ix1 = std::min(p.hi.x, c.hi.x);
      Coord iy0 = std::max(p.lo.y, c.lo.y);
      Coord iy1 = std::min(p.hi.y, c.hi.y);
      if (ix0 >= ix1 || iy0 >= iy1) {
        next.push_back(p);
        continue;
      }
      if (p.lo.y < iy0) next.push_back({p.lo, {p.hi.x, iy0}});
      if (iy1 < p.hi.y) next.push_back({{p.lo.x, iy1}, p.hi});
      if (p.lo.x < ix0) next.push_back({{p.lo.x, iy0}, {ix0, iy1}});
      if (ix1 < p.hi.x) next.push_back({{ix1, iy0}, {p.hi.x, iy1}});
    }
    pieces.swap(next);
  }
  return pieces;
}

// ---------------------------------------------------------------------------

RectIndex::RectIndex(std::span<const Rect> rects) : rects_(rects.begin(), rects.end()) {
  if (rects_.empty()) return;
  Rect extent = rects_.front();
  double dims = 0.0;
  for (const Rect& r : rects_) {
    extent = bounding_union(extent, r);
    dims += static_cast<double>(std::max(r.width(), r.height()));
  }
  const auto n = static_cast<double>(rects_.size());
  double span = static_cast<double>(std::max(extent.width(), extent.height()));
  double pitch = std::max({1.0, dims / n, span / std::ceil(std::sqrt(n))});
  pitch_ = static_cast<Coord>(std::ceil(pitch));
  origin_x_ = extent.lo.x;
  origin_y_ = extent.lo.y;
  cols_ = extent.width() / pitch_ + 1;
  rows_ = extent.height() / pitch_ + 1;
  buckets_.resize(static_cast<std::size_t>(cols_ * rows_));
  for (std::size_t i = 0; i < rects_.size(); ++i) {
    const Rect& r = rects_[i];
    for (std::int64_t cx = (r.lo.x - origin_x_) / pitch_; cx <= (r.hi.x - origin_x_) / pitch_; ++cx) {
      for (std::int64_t cy = (r.lo.y - origin_y_) / pitch_; cy <= (r.hi.y - origin_y_) / pitch_; ++cy) {
        buckets_[static_cast<std::size_t>(cx * rows_ + cy)].push_back(i);
      }
    }
  }
}

std::vector<std::size_t> RectIndex::query(const Rect& window) const {
  std::vector<std::size_t> hits;
  if (rects_.empty()) return hits;
  auto clamp_bucket = [&](Coord v, Coord origin, std::int64_t count) {
    if (v < origin) return std::int64_t{0};
    return std::min<std::int64_t>((v - origin) / pitch_, count - 1);
  };
  if (window.hi.x < origin_x_ || window.hi.y < origin_y_) return hits;
  std::int64_t x0 = clamp_bucket(window.lo.x, origin_x_, cols_);
  std::int64_t x1 = clamp_bucket(window.hi.x, origin_x_, cols_);
  std::int64_t y0 = clamp_bucket(window.lo.y, origin_y_, rows_);
  std::int64_t y1 = clamp_bucket(window.hi.y, origin_y_, rows_);
  for (std::int64_t cx = x0; cx <= x1; ++cx) {
    for (std::int64_t cy = y0; cy <= y1; ++cy) {
      for (std::size_t i : buckets_[static_cast<std::size_t>(cx * rows_ + cy)]) {
        if (intersects_closed(rects_[i], window)) hits.push_back(i);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

}  // namespace dfm
