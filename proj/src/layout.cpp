#include "dfm/layout.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "dfm/error.hpp"
#include "json_util.hpp"

namespace dfm {

using detail::json;
using detail::ordered_json;

namespace {

Rect parse_um_rect(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) throw Error(ErrorKind::Syntax, where + ": rect must be [x1, y1, x2, y2]");
  Coord c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw Error(ErrorKind::Syntax, where + ": rect coordinates must be numbers");
    c[i] = um_to_nm(v[i].get<double>(), where);
  }
  return make_rect(c[0], c[1], c[2], c[3]);
}

Cell parse_cell(const json& jc) {
  Cell cell;
  cell.name = detail::require_string(jc, "name", "cell");
  const std::string where = "cell '" + cell.name + "'";
  if (jc.contains("shapes")) {
    const json& shapes = jc.at("shapes");
    if (!shapes.is_array()) throw Error(ErrorKind::Syntax, where + ": 'shapes' must be a list");
    for (const json& js : shapes) {
      Shape s;
      s.layer = detail::require_string(js, "layer", where);
      if (s.layer.empty()) throw Error(ErrorKind::InvalidValue, where + ": empty layer name");
      s.rect = parse_um_rect(detail::require(js, "rect", where), where);
      if (!s.rect.has_area()) {
        throw Error(ErrorKind::InvalidValue, where + ": shape on " + s.layer + " has zero area");
      }
      if (js.contains("net") && !js.at("net").is_null()) s.net = detail::require_string(js, "net", where);
      cell.shapes.push_back(std::move(s));
    }
  }
  if (jc.contains("instances")) {
    const json& insts = jc.at("instances");
    if (!insts.is_array()) throw Error(ErrorKind::Syntax, where + ": 'instances' must be a list");
    for (const json& ji : insts) {
      Instance inst;
      inst.cell = detail::require_string(ji, "cell", where);
      const json& at = detail::require(ji, "at", where);
      if (!at.is_array() || at.size() != 2 || !at[0].is_number() || !at[1].is_number()) {
        throw Error(ErrorKind::Syntax, where + ": 'at' must be [x, y]");
      }
      inst.transform.translation = {um_to_nm(at[0].get<double>(), where), um_to_nm(at[1].get<double>(), where)};
      if (ji.contains("rot")) {
        inst.transform.rotation = static_cast<int>(detail::require_int(ji, "rot", where));
        int r = inst.transform.rotation;
        if (r != 0 && r != 90 && r != 180 && r != 270) {
          throw Error(ErrorKind::InvalidValue, where + ": rotation must be 0, 90, 180 or 270");
        }
      }
      if (ji.contains("mirror_x")) {
        const json& m = ji.at("mirror_x");
        if (!m.is_boolean()) throw Error(ErrorKind::Syntax, where + ": 'mirror_x' must be a boolean");
        inst.transform.mirror_x = m.get<bool>();
      }
      cell.instances.push_back(std::move(inst));
    }
  }
  return cell;
}

void flatten_into(const Design& d, const Cell& cell, const Transform& t, const std::string& path,
                  PlacedGeometry& out) {
  for (const Shape& s : cell.shapes) {
    out.layers[s.layer].push_back({apply_transform(s.rect, t), s.net, path});
  }
  for (std::size_t i = 0; i < cell.instances.size(); ++i) {
    const Instance& inst = cell.instances[i];
    flatten_into(d, d.cell(inst.cell), compose(t, inst.transform),
                 fmt::format("{}/{}#{}", path, inst.cell, i), out);
  }
}

}  // namespace

const Cell& Design::cell(const std::string& name) const {
  auto it = cells.find(name);
  if (it == cells.end()) throw Error(ErrorKind::UnknownCell, "unknown cell '" + name + "'");
  return it->second;
}

const std::vector<PlacedRect>& PlacedGeometry::layer(const std::string& name) const {
  static const std::vector<PlacedRect> kEmpty;
  auto it = layers.find(name);
  return it == layers.end() ? kEmpty : it->second;
}

std::size_t PlacedGeometry::size() const {
  std::size_t n = 0;
  for (const auto& [_, rects] : layers) n += rects.size();
  return n;
}

Rect PlacedGeometry::bbox() const {
  std::optional<Rect> box;
  for (const auto& [_, rects] : layers) {
    for (const auto& pr : rects) box = box ? bounding_union(*box, pr.rect) : pr.rect;
  }
  return box.value_or(Rect{});
}

Coord um_to_nm(double um, std::string_view what) {
  if (!std::isfinite(um)) throw Error(ErrorKind::InvalidValue, std::string(what) + ": coordinate is not finite");
  double nm = um * 1000.0;
  double rounded = std::round(nm);
  if (std::fabs(nm - rounded) > 1e-6) {
    throw Error(ErrorKind::NonIntegralCoordinate,
                fmt::format("{}: {} um is not a whole number of nanometers", what, um));
  }
  if (std::fabs(rounded) > 9.0e15) throw Error(ErrorKind::Overflow, std::string(what) + ": coordinate out of range");
  return static_cast<Coord>(rounded);
}

void validate(const Design& d) {
  if (!d.cells.count(d.top)) throw Error(ErrorKind::UnknownCell, "top cell '" + d.top + "' is not defined");
  for (const auto& [name, cell] : d.cells) {
    for (const Instance& inst : cell.instances) {
      if (!d.cells.count(inst.cell)) {
        throw Error(ErrorKind::DanglingReference,
                    "cell '" + name + "' instantiates undefined cell '" + inst.cell + "'");
      }
    }
  }
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> state;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    int& s = state[name];
    if (s == 2) return;
    if (s == 1) {
      std::string chain;
      auto it = std::find(stack.begin(), stack.end(), name);
      for (; it != stack.end(); ++it) chain += *it + " -> ";
      throw Error(ErrorKind::CyclicHierarchy, "cyclic hierarchy: " + chain + name);
    }
    s = 1;
    stack.push_back(name);
    for (const Instance& inst : d.cells.at(name).instances) visit(inst.cell);
    stack.pop_back();
    state[name] = 2;
  };
  for (const auto& [name, _] : d.cells) visit(name);
}

Design parse_layout(std::string_view document) {
  json doc = detail::parse_json(document, "layout");
  if (!doc.is_object()) throw Error(ErrorKind::Syntax, "layout: top level must be an object");
  std::string units = detail::require_string(doc, "units", "layout");
  if (units != "um") throw Error(ErrorKind::InvalidValue, "layout: units must be \"um\", got \"" + units + "\"");

  Design d;
  d.top = detail::require_string(doc, "top", "layout");
  const json& cells = detail::require(doc, "cells", "layout");
  if (!cells.is_array()) throw Error(ErrorKind::Syntax, "layout: 'cells' must be a list");
  for (const json& jc : cells) {
    Cell c = parse_cell(jc);
    std::string name = c.name;
    if (!d.cells.emplace(name, std::move(c)).second) {
      throw Error(ErrorKind::DuplicateName, "layout: cell '" + name + "' defined twice");
    }
  }
  validate(d);
  return d;
}

std::string serialize_layout(const Design& d) {
  ordered_json doc;
  doc["units"] = "um";
  doc["top"] = d.top;
  ordered_json cells = ordered_json::array();
  for (const auto& [name, cell] : d.cells) {
    ordered_json jc;
    jc["name"] = name;
    ordered_json shapes = ordered_json::array();
    for (const Shape& s : cell.shapes) {
      ordered_json js;
      js["layer"] = s.layer;
      js["rect"] = {detail::um_value(s.rect.lo.x), detail::um_value(s.rect.lo.y), detail::um_value(s.rect.hi.x),
                    detail::um_value(s.rect.hi.y)};
      if (s.net) js["net"] = *s.net;
      shapes.push_back(std::move(js));
    }
    ordered_json insts = ordered_json::array();
    for (const Instance& i : cell.instances) {
      ordered_json ji;
      ji["cell"] = i.cell;
      ji["at"] = {detail::um_value(i.transform.translation.x), detail::um_value(i.transform.translation.y)};
      ji["rot"] = i.transform.rotation;
      ji["mirror_x"] = i.transform.mirror_x;
      insts.push_back(std::move(ji));
    }
    jc["shapes"] = std::move(shapes);
    jc["instances"] = std::move(insts);
    cells.push_back(std::move(jc));
  }
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

PlacedGeometry flatten(const Design& d, const std::string& top) {
  PlacedGeometry out;
  flatten_into(d, d.cell(top), Transform{}, top, out);
  return out;
}

PlacedGeometry local_geometry(const Cell& cell) {
  PlacedGeometry out;
  for (const Shape& s : cell.shapes) out.layers[s.layer].push_back({s.rect, s.net, cell.name});
  return out;
}

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace dfm
