#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dfm/geometry.hpp"
#include "dfm/layout.hpp"
#include "dfm/rules.hpp"

namespace fixtures {

using dfm::Coord;
using dfm::Rect;

inline Rect R(Coord x1, Coord y1, Coord x2, Coord y2) { return dfm::make_rect(x1, y1, x2, y2); }

inline dfm::Shape shape(std::string layer, Rect r, std::optional<std::string> net = std::nullopt) {
  return {std::move(layer), r, std::move(net)};
}

/// Single-cell design named `top`.
inline dfm::Design flat_design(std::vector<dfm::Shape> shapes, std::string top = "TOP") {
  dfm::Design d;
  d.top = top;
  d.cells[top] = {top, std::move(shapes), {}};
  return d;
}

inline dfm::Rule enclosure_rule(Coord drc = 10, Coord dfm = 30, double fr = 0.01, double gamma = 1.0,
                                std::string name = "RuleA") {
  dfm::Rule r;
  r.name = std::move(name);
  r.kind = dfm::RuleKind::Enclosure;
  r.inner_layer = "V1";
  r.layer = "M1";
  r.drc_value = drc;
  r.dfm_value = dfm;
  r.failure_rate = fr;
  r.gamma = gamma;
  return r;
}

inline dfm::Rule spacing_rule(Coord drc = 10, Coord dfm = 20, double fr = 0.01, std::string name = "M1_S") {
  dfm::Rule r;
  r.name = std::move(name);
  r.kind = dfm::RuleKind::Spacing;
  r.layer = "M1";
  r.drc_value = drc;
  r.dfm_value = dfm;
  r.failure_rate = fr;
  return r;
}

inline dfm::RuleDeck deck_of(std::vector<dfm::Rule> rules, double threshold = 0.99) {
  dfm::RuleDeck deck;
  deck.rules = std::move(rules);
  deck.signoff_threshold = threshold;
  return deck;
}

inline dfm::PlacedGeometry geometry(const std::vector<Rect>& metal, const std::vector<Rect>& vias = {}) {
  dfm::PlacedGeometry g;
  for (const Rect& r : metal) g.layers["M1"].push_back({r, std::nullopt, "TOP"});
  for (const Rect& r : vias) g.layers["V1"].push_back({r, std::nullopt, "TOP"});
  return g;
}

/// Random metal rectangles plus non-touching vias, mostly dropped inside
/// metal, within [0, extent).
struct RandomLayout {
  std::vector<Rect> metal;
  std::vector<Rect> vias;
};

inline RandomLayout random_layout(std::mt19937_64& rng, Coord extent, int max_metal, int max_vias) {
  auto uni = [&](Coord lo, Coord hi) { return std::uniform_int_distribution<Coord>(lo, hi)(rng); };
  RandomLayout out;
  int nm = static_cast<int>(uni(1, max_metal));
  for (int i = 0; i < nm; ++i) {
    Coord w = uni(4, extent / 3);
    Coord h = uni(4, extent / 3);
    Coord x = uni(0, extent - w - 1);
    Coord y = uni(0, extent - h - 1);
    out.metal.push_back(R(x, y, x + w, y + h));
  }
  int nv = static_cast<int>(uni(0, max_vias));
  for (int i = 0; i < nv * 4 && static_cast<int>(out.vias.size()) < nv; ++i) {
    const Rect& host = out.metal[static_cast<std::size_t>(uni(0, nm - 1))];
    Coord w = uni(2, 30);
    Coord h = uni(2, 30);
    Coord x = uni(std::max<Coord>(1, host.lo.x - 5), std::min(host.hi.x + 2, extent - w - 2));
    Coord y = uni(std::max<Coord>(1, host.lo.y - 5), std::min(host.hi.y + 2, extent - h - 2));
    if (x < 1 || y < 1 || x + w >= extent || y + h >= extent) continue;
    Rect v = R(x, y, x + w, y + h);
    bool clash = false;
    for (const Rect& o : out.vias) clash = clash || dfm::intersects_closed(v.expanded(1), o);
    if (!clash) out.vias.push_back(v);
  }
  return out;
}

}  // namespace fixtures
