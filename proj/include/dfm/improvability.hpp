#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfm/layout.hpp"
#include "dfm/rules.hpp"
#include "dfm/scoring.hpp"

namespace dfm {

struct MarkerStatus {
  bool valid = true;
  std::string spacing_rule;   // set when invalid
  std::string offending_net;  // set when invalid

  bool operator==(const MarkerStatus&) const = default;
};

/// Candidate metal growth that fixes one enclosure violation. `rect` is the
/// via-side edge extruded by the rule's full dfm value; `required_delta` is
/// the extra enclosure the side needs.
struct Marker {
  std::size_t source_violation = 0;
  std::string rule;
  std::string layer;
  Side side = Side::None;
  Rect rect;
  Coord required_delta = 0;
  std::string net;
  MarkerStatus status;

  bool operator==(const Marker&) const = default;
};

/// One candidate per side-specific enclosure violation of a top-context
/// database, in violation-id order. Uncovered vias are skipped.
std::vector<Marker> generate_markers(const ViolationDB& db, const RuleDeck& deck);

/// Marks a marker INVALID when the material it adds (its rect minus existing
/// same-net metal) comes closer than the spacing rule's DRC value to metal of
/// another net, counting markers already accepted earlier in the list.
/// Markers on other layers pass through untouched. Order is preserved.
std::vector<Marker> filter_markers(std::vector<Marker> candidates, const PlacedGeometry& geom,
                                   const Rule& spacing_rule);

/// Filters every layer against its spacing rule (the largest DRC value when a
/// layer has several). Throws MissingSpacingRule for a marker layer without one.
std::vector<Marker> filter_markers(std::vector<Marker> candidates, const PlacedGeometry& geom, const RuleDeck& deck);

/// Flattened `design` plus every VALID marker, labeled with the marker's net.
PlacedGeometry merged_geometry(const Design& design, std::span<const Marker> markers);

/// Re-checks and re-scores the merged geometry. `out_db`, when given,
/// receives the scored violation database of the merged geometry.
ScoreReport improvability_score(std::span<const Marker> markers, const Design& design, const RuleDeck& deck,
                                ViolationDB* out_db = nullptr, RunOptions options = {});

struct FixRecord {
  std::string net;
  std::string layer;
  Rect bbox;
  std::string rule;
  std::size_t violation_id = 0;

  bool operator==(const FixRecord&) const = default;
};

using FixDocument = std::vector<FixRecord>;

/// One record per VALID marker, ordered by violation id.
FixDocument emit_fix_file(std::span<const Marker> markers);
std::string serialize_fixes(const FixDocument& fixes);
FixDocument parse_fixes(std::string_view document);

/// Copy of `design` whose top cell gains one labeled shape per record.
Design apply_fixes(const Design& design, const FixDocument& fixes);

std::string serialize_markers(std::span<const Marker> markers);

}  // namespace dfm
