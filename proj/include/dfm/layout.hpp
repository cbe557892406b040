#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfm/geometry.hpp"

namespace dfm {

struct Shape {
  std::string layer;
  Rect rect;
  std::optional<std::string> net;

  bool operator==(const Shape&) const = default;
};

struct Instance {
  std::string cell;
  Transform transform;

  bool operator==(const Instance&) const = default;
};

struct Cell {
  std::string name;
  std::vector<Shape> shapes;
  std::vector<Instance> instances;

  bool operator==(const Cell&) const = default;
};

/// Hierarchical layout. Immutable after load; share freely across threads.
struct Design {
  std::string top;
  std::map<std::string, Cell> cells;

  const Cell& cell(const std::string& name) const;
  bool operator==(const Design&) const = default;
};

struct PlacedRect {
  Rect rect;
  std::optional<std::string> net;
  std::string path;  // "TOP/B#0/C#2": instance index within each parent
};

/// Flattened geometry, keyed by layer name.
struct PlacedGeometry {
  std::map<std::string, std::vector<PlacedRect>> layers;

  const std::vector<PlacedRect>& layer(const std::string& name) const;
  std::size_t size() const;
  /// Bounding box over all layers, or the empty rect at the origin.
  Rect bbox() const;
};

/// Converts a micrometer value to nanometers; throws NonIntegralCoordinate
/// unless value * 1000 is integral.
Coord um_to_nm(double um, std::string_view what);

Design parse_layout(std::string_view document);
std::string serialize_layout(const Design& design);

/// Throws UnknownCell, DanglingReference or CyclicHierarchy.
void validate(const Design& design);

PlacedGeometry flatten(const Design& design, const std::string& top);

/// The cell's own shapes, ignoring its instances.
PlacedGeometry local_geometry(const Cell& cell);

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string digest(std::string_view bytes);

}  // namespace dfm
