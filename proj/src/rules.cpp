#include "dfm/rules.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "dfm/error.hpp"
#include "json_util.hpp"

namespace dfm {

using detail::json;
using detail::ordered_json;

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

Rule parse_rule(const json& jr) {
  Rule r;
  r.name = detail::require_string(jr, "name", "rule");
  const std::string where = "rule '" + r.name + "'";
  if (r.name.empty()) throw Error(ErrorKind::InvalidValue, "rule: empty name");
  std::string kind = upper(detail::require_string(jr, "kind", where));
  if (kind == "ENCLOSURE") {
    r.kind = RuleKind::Enclosure;
    r.inner_layer = detail::require_string(jr, "inner_layer", where);
  } else if (kind == "SPACING") {
    r.kind = RuleKind::Spacing;
  } else {
    throw Error(ErrorKind::UnknownKind, where + ": unknown kind '" + kind + "'");
  }
  r.layer = detail::require_string(jr, "layer", where);
  r.drc_value = um_to_nm(detail::require_number(jr, "drc_um", where), where);
  r.dfm_value = um_to_nm(detail::require_number(jr, "dfm_um", where), where);
  r.failure_rate = detail::require_number(jr, "failure_rate", where);
  if (jr.contains("gamma")) r.gamma = detail::require_number(jr, "gamma", where);

  if (r.drc_value <= 0) throw Error(ErrorKind::InvalidValue, where + ": drc value must be positive");
  if (r.dfm_value <= r.drc_value) {
    throw Error(ErrorKind::RuleOrdering, where + ": dfm value must exceed drc value");
  }
  if (!(r.failure_rate >= 0.0)) throw Error(ErrorKind::InvalidValue, where + ": failure rate must be >= 0");
  if (!(r.gamma > 0.0)) throw Error(ErrorKind::InvalidValue, where + ": gamma must be > 0");
  if (r.layer.empty() || (r.kind == RuleKind::Enclosure && r.inner_layer.empty())) {
    throw Error(ErrorKind::InvalidValue, where + ": empty layer name");
  }
  return r;
}

RuleDeck deck_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Syntax, "rule deck: top level must be an object");
  RuleDeck deck;
  if (doc.contains("signoff_threshold")) {
    deck.signoff_threshold = detail::require_number(doc, "signoff_threshold", "rule deck");
  }
  if (!(deck.signoff_threshold > 0.0 && deck.signoff_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidValue, "rule deck: signoff_threshold must be in (0, 1]");
  }
  if (doc.contains("aggregation_mode")) {
    std::string mode = detail::require_string(doc, "aggregation_mode", "rule deck");
    if (mode == "count") deck.aggregation_mode = AggregationMode::Count;
    else if (mode == "density") deck.aggregation_mode = AggregationMode::Density;
    else throw Error(ErrorKind::InvalidValue, "rule deck: unknown aggregation_mode '" + mode + "'");
  }
  const json& rules = detail::require(doc, "rules", "rule deck");
  if (!rules.is_array()) throw Error(ErrorKind::Syntax, "rule deck: 'rules' must be a list");
  std::set<std::string> names;
  for (const json& jr : rules) {
    Rule r = parse_rule(jr);
    if (!names.insert(r.name).second) {
      throw Error(ErrorKind::DuplicateName, "rule deck: duplicate rule name '" + r.name + "'");
    }
    deck.rules.push_back(std::move(r));
  }
  return deck;
}

ordered_json deck_to_json(const RuleDeck& deck) {
  ordered_json doc;
  doc["signoff_threshold"] = deck.signoff_threshold;
  doc["aggregation_mode"] = to_string(deck.aggregation_mode);
  ordered_json rules = ordered_json::array();
  for (const Rule& r : deck.rules) {
    ordered_json jr;
    jr["name"] = r.name;
    jr["kind"] = to_string(r.kind);
    if (r.kind == RuleKind::Enclosure) jr["inner_layer"] = r.inner_layer;
    jr["layer"] = r.layer;
    jr["drc_um"] = detail::um_value(r.drc_value);
    jr["dfm_um"] = detail::um_value(r.dfm_value);
    jr["failure_rate"] = r.failure_rate;
    jr["gamma"] = r.gamma;
    rules.push_back(std::move(jr));
  }
  doc["rules"] = std::move(rules);
  return doc;
}

auto sort_key(const Violation& v) {
  return std::tie(v.rule, v.cell, v.bbox, v.side, v.drawn_value, v.net, v.other_net);
}

Rect side_band(const Rect& via, Side side, Coord depth) {
  switch (side) {
    case Side::Left: return {{via.lo.x - depth, via.lo.y}, {via.lo.x, via.hi.y}};
    case Side::Right: return {{via.hi.x, via.lo.y}, {via.hi.x + depth, via.hi.y}};
    case Side::Up: return {{via.lo.x, via.hi.y}, {via.hi.x, via.hi.y + depth}};
    case Side::Down: return {{via.lo.x, via.lo.y - depth}, {via.hi.x, via.lo.y}};
    case Side::None: break;
  }
  return via;
}

// Runs `count` tasks on up to `workers` threads. The first failure in task
// order is rethrown.
void run_parallel(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct LayerData {
  std::vector<Component> comps;
  std::vector<Rect> rects;
  std::vector<std::size_t> owner;
  RectIndex index;
};

LayerData build_layer(const std::vector<PlacedRect>& placed) {
  std::vector<LayerRect> shapes;
  shapes.reserve(placed.size());
  for (const PlacedRect& p : placed) shapes.push_back({p.rect, p.net});
  LayerData data;
  data.comps = connected_components(shapes);
  for (const Component& c : data.comps) {
    for (const Rect& r : c.rects) {
      data.rects.push_back(r);
      data.owner.push_back(static_cast<std::size_t>(c.id));
    }
  }
  data.index = RectIndex(data.rects);
  return data;
}

// Cache of per-layer connectivity with a stable address per layer.
class LayerTable {
 public:
  explicit LayerTable(const PlacedGeometry& geom) : geom_(geom) {}

  const LayerData& get(const std::string& layer) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = data_.find(layer);
    if (it == data_.end()) it = data_.emplace(layer, build_layer(geom_.layer(layer))).first;
    return it->second;
  }

 private:
  const PlacedGeometry& geom_;
  std::mutex mu_;
  std::map<std::string, LayerData> data_;
};

std::vector<Violation> enclosure_violations(const LayerData& metal, const PlacedGeometry& geom, const Rule& rule) {
  std::vector<Rect> vias;
  for (const PlacedRect& p : geom.layer(rule.inner_layer)) vias.push_back(p.rect);
  std::vector<Violation> out;
  for (const auto& group : group_connected(vias)) {
    std::vector<Rect> parts;
    for (std::size_t i : group) parts.push_back(vias[i]);
    Rect via = parts.front();
    for (const Rect& r : parts) via = bounding_union(via, r);
    if (union_area(parts) != via.area()) {
      throw Error(ErrorKind::NonRectangularVia,
                  fmt::format("{}: non-rectangular geometry on {} at ({}, {})", rule.name, rule.inner_layer,
                              via.lo.x, via.lo.y));
    }

    // Geometry farther than dfm_value from the via cannot change a verdict.
    std::map<std::size_t, std::vector<Rect>> nearby;
    std::vector<std::size_t> overlapping;
    for (std::size_t k : metal.index.query(via.expanded(rule.dfm_value))) {
      std::size_t c = metal.owner[k];
      nearby[c].push_back(metal.rects[k]);
      const Rect& r = metal.rects[k];
      if (r.lo.x < via.hi.x && via.lo.x < r.hi.x && r.lo.y < via.hi.y && via.lo.y < r.hi.y) {
        overlapping.push_back(c);
      }
    }
    std::sort(overlapping.begin(), overlapping.end());
    overlapping.erase(std::unique(overlapping.begin(), overlapping.end()), overlapping.end());

    std::optional<std::array<Coord, 4>> clearances;
    std::string net;
    for (std::size_t c : overlapping) {
      clearances = enclosure_all_sides(via, nearby[c]);
      if (clearances) {
        net = metal.comps[c].net;
        break;
      }
    }
    if (!clearances) {
      Violation v;
      v.rule = rule.name;
      v.bbox = via;
      v.side = Side::None;
      v.drawn_value = 0;
      if (!overlapping.empty()) v.net = metal.comps[overlapping.front()].net;
      out.push_back(std::move(v));
      continue;
    }
    for (std::size_t s = 0; s < kAllSides.size(); ++s) {
      Coord drawn = (*clearances)[s];
      if (drawn >= rule.dfm_value) continue;
      Violation v;
      v.rule = rule.name;
      v.side = kAllSides[s];
      v.drawn_value = drawn;
      v.bbox = side_band(via, v.side, drawn);
      v.net = net;
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<Violation> spacing_violations(const LayerData& layer, const Rule& rule) {
  const std::int64_t limit = rule.dfm_value * rule.dfm_value;
  std::map<std::pair<std::size_t, std::size_t>, Clearance> pairs;
  for (std::size_t i = 0; i < layer.rects.size(); ++i) {
    std::size_t a = layer.owner[i];
    for (std::size_t j : layer.index.query(layer.rects[i].expanded(rule.dfm_value))) {
      std::size_t b = layer.owner[j];
      if (b <= a) continue;
      Clearance c = rect_clearance(layer.rects[i], layer.rects[j]);
      if (c.squared >= limit) continue;
      auto [it, fresh] = pairs.try_emplace({a, b}, c);
      if (fresh) continue;
      if (c.squared < it->second.squared) it->second = c;
      else if (c.squared == it->second.squared) it->second.witness = bounding_union(it->second.witness, c.witness);
    }
  }
  std::vector<Violation> out;
  for (const auto& [key, c] : pairs) {
    Violation v;
    v.rule = rule.name;
    v.bbox = c.witness;
    v.side = Side::None;
    v.drawn_value = isqrt(c.squared);
    v.net = layer.comps[key.first].net;
    v.other_net = layer.comps[key.second].net;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Violation> check_rule(LayerTable& table, const PlacedGeometry& geom, const Rule& rule) {
  if (rule.kind == RuleKind::Enclosure) return enclosure_violations(table.get(rule.layer), geom, rule);
  return spacing_violations(table.get(rule.layer), rule);
}

}  // namespace

std::string_view to_string(RuleKind kind) { return kind == RuleKind::Enclosure ? "ENCLOSURE" : "SPACING"; }

std::string_view to_string(AggregationMode mode) { return mode == AggregationMode::Count ? "count" : "density"; }

std::string_view to_string(Context context) { return context == Context::Top ? "TOP" : "BY_CELL"; }

Context context_from_string(std::string_view s) {
  if (s == "TOP") return Context::Top;
  if (s == "BY_CELL") return Context::ByCell;
  throw Error(ErrorKind::InvalidValue, "unknown context '" + std::string(s) + "'");
}

const Rule* RuleDeck::find(std::string_view name) const {
  for (const Rule& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const Rule& RuleDeck::rule(std::string_view name) const {
  const Rule* r = find(name);
  if (!r) throw Error(ErrorKind::InvalidValue, "no rule named '" + std::string(name) + "'");
  return *r;
}

RuleDeck parse_rule_deck(std::string_view document) { return deck_from_json(detail::parse_json(document, "rule deck")); }

std::string serialize_rule_deck(const RuleDeck& deck) { return deck_to_json(deck).dump(2) + "\n"; }

std::string deck_digest(const RuleDeck& deck) { return digest(deck_to_json(deck).dump()); }

std::vector<const Violation*> ViolationDB::for_rule(std::string_view rule) const {
  std::vector<const Violation*> out;
  for (const Violation& v : violations) {
    if (v.rule == rule) out.push_back(&v);
  }
  return out;
}

void canonicalize(std::vector<Violation>& violations) {
  std::sort(violations.begin(), violations.end(),
            [](const Violation& a, const Violation& b) { return sort_key(a) < sort_key(b); });
  for (std::size_t i = 0; i < violations.size(); ++i) violations[i].id = i;
}

std::vector<Violation> check_enclosure(const PlacedGeometry& geom, const Rule& rule) {
  if (rule.kind != RuleKind::Enclosure) throw Error(ErrorKind::InvalidValue, rule.name + " is not an enclosure rule");
  LayerTable table(geom);
  return enclosure_violations(table.get(rule.layer), geom, rule);
}

std::vector<Violation> check_spacing(const PlacedGeometry& geom, const Rule& rule) {
  if (rule.kind != RuleKind::Spacing) throw Error(ErrorKind::InvalidValue, rule.name + " is not a spacing rule");
  LayerTable table(geom);
  return spacing_violations(table.get(rule.layer), rule);
}

ViolationDB run_rules(const PlacedGeometry& geom, const RuleDeck& deck, const std::string& top_cell,
                      RunOptions options) {
  ViolationDB db;
  db.context = Context::Top;
  db.top_cell = top_cell;
  db.design_bbox = geom.bbox();
  db.deck = deck;
  db.deck_digest = deck_digest(deck);

  LayerTable table(geom);
  std::vector<std::vector<Violation>> results(deck.rules.size());
  run_parallel(deck.rules.size(), options.workers,
               [&](std::size_t i) { results[i] = check_rule(table, geom, deck.rules[i]); });
  for (auto& r : results) {
    for (auto& v : r) {
      v.cell = top_cell;
      db.violations.push_back(std::move(v));
    }
  }
  canonicalize(db.violations);
  return db;
}

ViolationDB run_rules(const Design& design, const RuleDeck& deck, Context context, RunOptions options) {
  PlacedGeometry top = flatten(design, design.top);
  if (context == Context::Top) {
    ViolationDB db = run_rules(top, deck, design.top, options);
    db.layout_digest = digest(serialize_layout(design));
    return db;
  }

  ViolationDB db;
  db.context = Context::ByCell;
  db.top_cell = design.top;
  db.design_bbox = top.bbox();
  db.deck = deck;
  db.deck_digest = deck_digest(deck);
  db.layout_digest = digest(serialize_layout(design));

  std::vector<const Cell*> cells;
  for (const auto& [_, cell] : design.cells) cells.push_back(&cell);
  std::vector<PlacedGeometry> local;
  for (const Cell* c : cells) local.push_back(local_geometry(*c));
  std::vector<std::unique_ptr<LayerTable>> tables;
  for (const auto& g : local) tables.push_back(std::make_unique<LayerTable>(g));

  const std::size_t nrules = deck.rules.size();
  std::vector<std::vector<Violation>> results(cells.size() * nrules);
  run_parallel(results.size(), options.workers, [&](std::size_t t) {
    std::size_t c = t / nrules;
    results[t] = check_rule(*tables[c], local[c], deck.rules[t % nrules]);
    for (auto& v : results[t]) v.cell = cells[c]->name;
  });
  for (auto& r : results) {
    for (auto& v : r) db.violations.push_back(std::move(v));
  }
  canonicalize(db.violations);
  for (const Violation& v : db.violations) {
    if (!db.cell_bboxes.count(v.cell)) db.cell_bboxes[v.cell] = flatten(design, v.cell).bbox();
  }
  return db;
}

std::string serialize_db(const ViolationDB& db) {
  ordered_json doc;
  doc["context"] = to_string(db.context);
  doc["top_cell"] = db.top_cell;
  doc["design_bbox_nm"] = detail::rect_nm(db.design_bbox);
  doc["deck_digest"] = db.deck_digest;
  doc["layout_digest"] = db.layout_digest;
  doc["deck"] = deck_to_json(db.deck);
  ordered_json cells = ordered_json::object();
  for (const auto& [name, box] : db.cell_bboxes) cells[name] = detail::rect_nm(box);
  doc["cell_bboxes_nm"] = std::move(cells);
  ordered_json list = ordered_json::array();
  for (const Violation& v : db.violations) {
    ordered_json jv;
    jv["id"] = v.id;
    jv["rule"] = v.rule;
    jv["cell"] = v.cell;
    jv["side"] = to_string(v.side);
    jv["bbox_nm"] = detail::rect_nm(v.bbox);
    jv["drawn_nm"] = v.drawn_value;
    jv["net"] = v.net;
    if (!v.other_net.empty()) jv["other_net"] = v.other_net;
    jv["cost_factor"] = v.cost_factor ? ordered_json(*v.cost_factor) : ordered_json(nullptr);
    jv["score"] = v.score ? ordered_json(*v.score) : ordered_json(nullptr);
    list.push_back(std::move(jv));
  }
  doc["violations"] = std::move(list);
  return doc.dump(2) + "\n";
}

ViolationDB parse_db(std::string_view document) {
  json doc = detail::parse_json(document, "violation database");
  const char* where = "violation database";
  ViolationDB db;
  db.context = context_from_string(detail::require_string(doc, "context", where));
  db.top_cell = detail::require_string(doc, "top_cell", where);
  db.design_bbox = detail::parse_rect_nm(detail::require(doc, "design_bbox_nm", where), where);
  db.deck_digest = detail::require_string(doc, "deck_digest", where);
  db.layout_digest = detail::require_string(doc, "layout_digest", where);
  db.deck = deck_from_json(detail::require(doc, "deck", where));
  if (doc.contains("cell_bboxes_nm")) {
    for (const auto& [name, box] : doc.at("cell_bboxes_nm").items()) {
      db.cell_bboxes[name] = detail::parse_rect_nm(box, where);
    }
  }
  const json& list = detail::require(doc, "violations", where);
  if (!list.is_array()) throw Error(ErrorKind::Syntax, "violation database: 'violations' must be a list");
  for (const json& jv : list) {
    Violation v;
    v.id = static_cast<std::size_t>(detail::require_int(jv, "id", where));
    v.rule = detail::require_string(jv, "rule", where);
    v.cell = detail::require_string(jv, "cell", where);
    v.side = side_from_string(detail::require_string(jv, "side", where));
    v.bbox = detail::parse_rect_nm(detail::require(jv, "bbox_nm", where), where);
    v.drawn_value = detail::require_int(jv, "drawn_nm", where);
    v.net = detail::require_string(jv, "net", where);
    if (jv.contains("other_net")) v.other_net = detail::require_string(jv, "other_net", where);
    if (jv.contains("cost_factor") && !jv.at("cost_factor").is_null()) v.cost_factor = jv.at("cost_factor").get<double>();
    if (jv.contains("score") && !jv.at("score").is_null()) v.score = jv.at("score").get<double>();
    db.violations.push_back(std::move(v));
  }
  return db;
}

}  // namespace dfm
