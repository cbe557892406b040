#include "dfm/improvability.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dfm/error.hpp"
#include "json_util.hpp"

namespace dfm {

using detail::json;
using detail::ordered_json;

namespace {

// The via-side edge of an enclosure violation, recovered from its band.
EdgeSegment via_edge(const Violation& v) {
  const Rect& b = v.bbox;
  switch (v.side) {
    case Side::Left: return {{b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, Side::Left};
    case Side::Right: return {{b.lo.x, b.lo.y}, {b.lo.x, b.hi.y}, Side::Right};
    case Side::Up: return {{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, Side::Up};
    case Side::Down: return {{b.lo.x, b.hi.y}, {b.hi.x, b.hi.y}, Side::Down};
    case Side::None: break;
  }
  throw Error(ErrorKind::InvalidValue, "violation has no side");
}

struct Material {
  Rect rect;
  std::string net;
};

}  // namespace

std::vector<Marker> generate_markers(const ViolationDB& db, const RuleDeck& deck) {
  std::vector<Marker> out;
  for (const Violation& v : db.violations) {
    const Rule* rule = deck.find(v.rule);
    if (!rule || rule->kind != RuleKind::Enclosure || v.side == Side::None) continue;
    Marker m;
    m.source_violation = v.id;
    m.rule = rule->name;
    m.layer = rule->layer;
    m.side = v.side;
    m.rect = grow_edge_outward(via_edge(v), rule->dfm_value);
    m.required_delta = rule->dfm_value - v.drawn_value;
    m.net = v.net;
    out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Marker& a, const Marker& b) { return a.source_violation < b.source_violation; });
  return out;
}

std::vector<Marker> filter_markers(std::vector<Marker> candidates, const PlacedGeometry& geom,
                                   const Rule& spacing_rule) {
  if (spacing_rule.kind != RuleKind::Spacing) {
    throw Error(ErrorKind::InvalidValue, spacing_rule.name + " is not a spacing rule");
  }
  const std::string& layer = spacing_rule.layer;
  const Coord space = spacing_rule.drc_value;
  const std::int64_t limit = space * space;

  std::vector<Material> existing;
  std::vector<Rect> existing_rects;
  {
    std::vector<LayerRect> shapes;
    for (const PlacedRect& p : geom.layer(layer)) shapes.push_back({p.rect, p.net});
    for (const Component& c : connected_components(shapes)) {
      for (const Rect& r : c.rects) {
        existing.push_back({r, c.net});
        existing_rects.push_back(r);
      }
    }
  }
  RectIndex index(existing_rects);
  std::vector<Material> accepted;

  for (Marker& m : candidates) {
    if (m.layer != layer) continue;
    m.status = {};

    std::vector<Rect> own;
    for (std::size_t k : index.query(m.rect)) {
      if (existing[k].net == m.net) own.push_back(existing[k].rect);
    }
    std::vector<Rect> added = subtract(m.rect, own);

    auto reject = [&](const std::string& net) {
      m.status.valid = false;
      m.status.spacing_rule = spacing_rule.name;
      m.status.offending_net = net;
    };
    for (const Rect& piece : added) {
      if (!m.status.valid) break;
      for (std::size_t k : index.query(piece.expanded(space))) {
        if (existing[k].net != m.net && rect_clearance(piece, existing[k].rect).squared < limit) {
          reject(existing[k].net);
          break;
        }
      }
      if (!m.status.valid) break;
      for (const Material& prior : accepted) {
        if (prior.net != m.net && rect_clearance(piece, prior.rect).squared < limit) {
          reject(prior.net);
          break;
        }
      }
    }
    if (m.status.valid) {
      for (const Rect& piece : added) accepted.push_back({piece, m.net});
    }
  }
  return candidates;
}

std::vector<Marker> filter_markers(std::vector<Marker> candidates, const PlacedGeometry& geom, const RuleDeck& deck) {
  std::set<std::string> layers;
  for (const Marker& m : candidates) layers.insert(m.layer);
  for (const std::string& layer : layers) {
    const Rule* strictest = nullptr;
    for (const Rule& r : deck.rules) {
      if (r.kind == RuleKind::Spacing && r.layer == layer && (!strictest || r.drc_value > strictest->drc_value)) {
        strictest = &r;
      }
    }
    if (!strictest) throw Error(ErrorKind::MissingSpacingRule, "no spacing rule for marker layer " + layer);
    candidates = filter_markers(std::move(candidates), geom, *strictest);
  }
  return candidates;
}

PlacedGeometry merged_geometry(const Design& design, std::span<const Marker> markers) {
  PlacedGeometry geom = flatten(design, design.top);
  for (const Marker& m : markers) {
    if (!m.status.valid) continue;
    geom.layers[m.layer].push_back({m.rect, m.net, design.top});
  }
  return geom;
}

ScoreReport improvability_score(std::span<const Marker> markers, const Design& design, const RuleDeck& deck,
                                ViolationDB* out_db, RunOptions options) {
  ViolationDB db = run_rules(merged_geometry(design, markers), deck, design.top, options);
  ScoreReport report = score_db(db, deck);
  if (out_db) *out_db = std::move(db);
  return report;
}

FixDocument emit_fix_file(std::span<const Marker> markers) {
  FixDocument doc;
  for (const Marker& m : markers) {
    if (!m.status.valid) continue;
    doc.push_back({m.net, m.layer, m.rect, m.rule, m.source_violation});
  }
  std::stable_sort(doc.begin(), doc.end(),
                   [](const FixRecord& a, const FixRecord& b) { return a.violation_id < b.violation_id; });
  return doc;
}

std::string serialize_fixes(const FixDocument& fixes) {
  ordered_json list = ordered_json::array();
  for (const FixRecord& f : fixes) {
    ordered_json jf;
    jf["net"] = f.net;
    jf["layer"] = f.layer;
    jf["bbox_um"] = {detail::um_value(f.bbox.lo.x), detail::um_value(f.bbox.lo.y), detail::um_value(f.bbox.hi.x),
                     detail::um_value(f.bbox.hi.y)};
    jf["rule"] = f.rule;
    jf["violation_id"] = f.violation_id;
    list.push_back(std::move(jf));
  }
  return list.dump(2) + "\n";
}

FixDocument parse_fixes(std::string_view document) {
  json doc = detail::parse_json(document, "fix document");
  if (!doc.is_array()) throw Error(ErrorKind::Syntax, "fix document: top level must be a list");
  FixDocument out;
  for (const json& jf : doc) {
    const char* where = "fix record";
    FixRecord f;
    f.net = detail::require_string(jf, "net", where);
    f.layer = detail::require_string(jf, "layer", where);
    const json& box = detail::require(jf, "bbox_um", where);
    if (!box.is_array() || box.size() != 4) throw Error(ErrorKind::Syntax, "fix record: bbox_um needs 4 numbers");
    Coord c[4];
    for (std::size_t i = 0; i < 4; ++i) {
      if (!box[i].is_number()) throw Error(ErrorKind::Syntax, "fix record: bbox_um needs 4 numbers");
      c[i] = um_to_nm(box[i].get<double>(), where);
    }
    f.bbox = {{c[0], c[1]}, {c[2], c[3]}};
    if (!f.bbox.has_area()) throw Error(ErrorKind::InvalidValue, "fix record: bbox must have positive area");
    f.rule = detail::require_string(jf, "rule", where);
    f.violation_id = static_cast<std::size_t>(detail::require_int(jf, "violation_id", where));
    out.push_back(std::move(f));
  }
  return out;
}

Design apply_fixes(const Design& design, const FixDocument& fixes) {
  std::set<std::string> layers;
  for (const auto& [_, cell] : design.cells) {
    for (const Shape& s : cell.shapes) layers.insert(s.layer);
  }
  Design out = design;
  Cell& top = out.cells.at(out.top);
  for (const FixRecord& f : fixes) {
    if (!f.bbox.has_area()) throw Error(ErrorKind::InvalidValue, "fix record: bbox must have positive area");
    if (!layers.count(f.layer)) throw Error(ErrorKind::InvalidValue, "fix record: unknown layer " + f.layer);
    top.shapes.push_back({f.layer, f.bbox, f.net});
  }
  return out;
}

std::string serialize_markers(std::span<const Marker> markers) {
  ordered_json list = ordered_json::array();
  for (const Marker& m : markers) {
    ordered_json jm;
    jm["source_violation"] = m.source_violation;
    jm["rule"] = m.rule;
    jm["layer"] = m.layer;
    jm["side"] = to_string(m.side);
    jm["rect_nm"] = detail::rect_nm(m.rect);
    jm["required_delta_nm"] = m.required_delta;
    jm["net"] = m.net;
    jm["status"] = m.status.valid ? "VALID" : "INVALID";
    if (!m.status.valid) {
      jm["spacing_rule"] = m.status.spacing_rule;
      jm["offending_net"] = m.status.offending_net;
    }
    list.push_back(std::move(jm));
  }
  return list.dump(2) + "\n";
}

}  // namespace dfm
