#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfm/geometry.hpp"
#include "dfm/layout.hpp"

namespace dfm {

enum class RuleKind { Enclosure, Spacing };
enum class AggregationMode { Count, Density };
enum class Context { Top, ByCell };

std::string_view to_string(RuleKind kind);
std::string_view to_string(AggregationMode mode);
std::string_view to_string(Context context);
Context context_from_string(std::string_view s);

/// One DFM rule. Distances are in nm; `layer` is the enclosing metal for
/// enclosure rules and the checked layer for spacing rules.
struct Rule {
  std::string name;
  RuleKind kind = RuleKind::Enclosure;
  std::string inner_layer;
  std::string layer;
  Coord drc_value = 0;
  Coord dfm_value = 0;
  double failure_rate = 0.0;
  double gamma = 1.0;

  bool operator==(const Rule&) const = default;
};

struct RuleDeck {
  std::vector<Rule> rules;
  double signoff_threshold = 0.99;
  AggregationMode aggregation_mode = AggregationMode::Count;

  const Rule& rule(std::string_view name) const;
  const Rule* find(std::string_view name) const;
  bool operator==(const RuleDeck&) const = default;
};

/// Throws on ordering, negative failure rate, duplicate names and unknown kinds.
RuleDeck parse_rule_deck(std::string_view document);
std::string serialize_rule_deck(const RuleDeck& deck);
std::string deck_digest(const RuleDeck& deck);

struct Violation {
  std::size_t id = 0;
  std::string rule;
  std::string cell;
  Rect bbox;
  Side side = Side::None;
  Coord drawn_value = 0;
  std::string net;
  std::string other_net;  // second component of a spacing pair
  std::optional<double> cost_factor;
  std::optional<double> score;

  bool operator==(const Violation&) const = default;
};

struct ViolationDB {
  Context context = Context::Top;
  std::string top_cell;
  Rect design_bbox;
  RuleDeck deck;
  std::string deck_digest;
  std::string layout_digest;
  /// Extent of every cell that owns a violation (by-cell runs only).
  std::map<std::string, Rect> cell_bboxes;
  /// Sorted by (rule, cell, bbox, side, drawn, nets); ids are positions.
  std::vector<Violation> violations;

  std::vector<const Violation*> for_rule(std::string_view rule) const;
  bool operator==(const ViolationDB&) const = default;
};

std::string serialize_db(const ViolationDB& db);
ViolationDB parse_db(std::string_view document);

/// Enclosure markers, one per deficient (via, side); uncovered vias yield a
/// single side-none marker.
std::vector<Violation> check_enclosure(const PlacedGeometry& geom, const Rule& rule);

/// One marker per component pair closer than the rule's dfm value.
std::vector<Violation> check_spacing(const PlacedGeometry& geom, const Rule& rule);

struct RunOptions {
  unsigned workers = 0;  // 0 picks std::thread::hardware_concurrency()
};

/// Runs every rule of the deck in the requested context.
ViolationDB run_rules(const Design& design, const RuleDeck& deck, Context context, RunOptions options = {});

/// Top-context run over already-flattened geometry.
ViolationDB run_rules(const PlacedGeometry& geom, const RuleDeck& deck, const std::string& top_cell,
                      RunOptions options = {});

/// Sorts violations into canonical order and renumbers ids.
void canonicalize(std::vector<Violation>& violations);

}  // namespace dfm
