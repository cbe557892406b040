#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfm {

/// Layout coordinate in integer nanometers.
using Coord = std::int64_t;

struct Point {
  Coord x = 0;
  Coord y = 0;

  auto operator<=>(const Point&) const = default;
};

/// Closed axis-aligned rectangle. Ordering is lexicographic on (lo, hi).
struct Rect {
  Point lo;
  Point hi;

  Coord width() const { return hi.x - lo.x; }
  Coord height() const { return hi.y - lo.y; }
  Coord area() const { return width() * height(); }
  bool has_area() const { return hi.x > lo.x && hi.y > lo.y; }
  bool valid() const { return lo.x <= hi.x && lo.y <= hi.y; }

  Rect expanded(Coord d) const { return {{lo.x - d, lo.y - d}, {hi.x + d, hi.y + d}}; }
  bool contains(const Rect& r) const {
    return lo.x <= r.lo.x && lo.y <= r.lo.y && r.hi.x <= hi.x && r.hi.y <= hi.y;
  }

  auto operator<=>(const Rect&) const = default;
};

/// Builds a rectangle from two arbitrary corners.
Rect make_rect(Coord x1, Coord y1, Coord x2, Coord y2);

/// Smallest rectangle covering both.
Rect bounding_union(const Rect& a, const Rect& b);

/// Closed-set intersection test (touching counts).
bool intersects_closed(const Rect& a, const Rect& b);

/// True when the rectangles overlap or share a boundary segment of positive
/// length. Corner-only contact does not connect.
bool connects(const Rect& a, const Rect& b);

enum class Side { Left, Right, Up, Down, None };

std::string_view to_string(Side side);
Side side_from_string(std::string_view s);

inline constexpr std::array<Side, 4> kAllSides{Side::Left, Side::Right, Side::Up, Side::Down};

/// Mirror about the x axis (y -> -y) is applied first, then a counterclockwise
/// rotation, then the translation.
struct Transform {
  int rotation = 0;  // one of 0, 90, 180, 270
  bool mirror_x = false;
  Point translation;

  bool operator==(const Transform&) const = default;
};

Point apply_transform(const Point& p, const Transform& t);
Rect apply_transform(const Rect& r, const Transform& t);

/// Returns the transform equivalent to applying `inner` and then `outer`.
Transform compose(const Transform& outer, const Transform& inner);

// ---------------------------------------------------------------------------
// Merged geometry

struct RectilinearPolygon {
  std::vector<Point> boundary;              // counterclockwise
  std::vector<std::vector<Point>> holes;    // clockwise

  Coord area() const;
  Rect bbox() const;

  bool operator==(const RectilinearPolygon&) const = default;
};

/// Signed shoelace area of a closed loop (positive for counterclockwise).
Coord signed_area(std::span<const Point> loop);

/// Union of rectangles as disjoint polygons. Rectangles sharing an edge
/// segment merge; corner-touching rectangles stay separate.
std::vector<RectilinearPolygon> merge(std::span<const Rect> rects);

/// Area of the union of `rects`.
Coord union_area(std::span<const Rect> rects);

/// Input shape for connectivity extraction.
struct LayerRect {
  Rect rect;
  std::optional<std::string> net;
};

/// A connected piece of same-layer geometry. Its point set is the union of
/// `rects`; `outline()` materializes the polygon.
struct Component {
  int id = 0;
  std::vector<Rect> rects;  // sorted
  Rect bbox;
  std::string net;
  bool synthesized_net = false;

  RectilinearPolygon outline() const;
};

/// Groups rectangles into components. Ids follow the order of each
/// component's smallest rectangle, so the result does not depend on input
/// order. Unlabeled components are named "anon_<id>"; two different labels
/// on one component throw ErrorKind::Short.
std::vector<Component> connected_components(std::span<const LayerRect> shapes);

/// Indexes of the rectangles in each component, parallel to
/// connected_components() but without net handling.
std::vector<std::vector<std::size_t>> group_connected(std::span<const Rect> rects);

/// Clearance from the via's `side` edge to the boundary of the region formed by
/// `metal`, measured along the side's outward normal and minimized over the
/// edge. Returns nullopt when the via is not fully covered.
std::optional<Coord> directed_enclosure(const Rect& via, std::span<const Rect> metal, Side side);
std::optional<Coord> directed_enclosure(const Rect& via, const Component& metal, Side side);

/// All four clearances in kAllSides order, or nullopt when not covered.
std::optional<std::array<Coord, 4>> enclosure_all_sides(const Rect& via, std::span<const Rect> metal);

/// Shortest connection between two rectangle sets.
struct Clearance {
  std::int64_t squared = 0;  // squared Euclidean distance in nm^2
  Rect witness;              // bbox of all shortest connecting segments
};

Clearance rect_clearance(const Rect& a, const Rect& b);
Clearance min_clearance(std::span<const Rect> a, std::span<const Rect> b);
double component_distance(const Component& a, const Component& b);

/// floor(sqrt(v)) for v >= 0, exact.
std::int64_t isqrt(std::int64_t v);

struct EdgeSegment {
  Point a;
  Point b;
  Side outward = Side::None;
};

/// Extrudes `e` by `delta` nm towards its outward normal.
Rect grow_edge_outward(const EdgeSegment& e, Coord delta);

/// Rectangles covering `r` minus the union of `cut`.
std::vector<Rect> subtract(const Rect& r, std::span<const Rect> cut);

// ---------------------------------------------------------------------------

/// Bucket-grid index answering closed-intersection window queries.
class RectIndex {
 public:
  RectIndex() = default;
  explicit RectIndex(std::span<const Rect> rects);

  /// Indexes of rectangles whose closure meets `window`, ascending.
  std::vector<std::size_t> query(const Rect& window) const;

  std::size_t size() const { return rects_.size(); }

 private:
  std::int64_t bucket_of(Coord v) const;

  std::vector<Rect> rects_;
  Coord pitch_ = 1;
  Coord origin_x_ = 0;
  Coord origin_y_ = 0;
  std::int64_t cols_ = 0;
  std::int64_t rows_ = 0;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace dfm
