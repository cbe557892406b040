#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dfm/rules.hpp"

namespace dfm {

enum class Status { Pass, Fail };
std::string_view to_string(Status status);

/// Severity of a violation drawn at `drawn` nm: 1 at or below the DRC value,
/// ((dfm - drawn) / (dfm - drc))^gamma between the margins. Throws when
/// `drawn` is not below the DFM value.
double cost_factor(Coord drawn, const Rule& rule);

/// 1 - cf. Throws when cf is outside [0, 1].
double violation_score(double cf);

/// Poisson yield over a rule's violations: exp(-FR * sum CF), with the CF sum
/// divided by `area_mm2` in density mode. Violations must already be scored.
double aggregate_score(std::span<const Violation* const> violations, const Rule& rule, AggregationMode mode,
                       double area_mm2);
double aggregate_score(std::span<const Violation> violations, const Rule& rule, AggregationMode mode,
                       double area_mm2);

struct CellScore {
  double score = 1.0;
  std::size_t count = 0;
  Rect bbox;

  bool operator==(const CellScore&) const = default;
};

struct RuleScore {
  std::string name;
  RuleKind kind = RuleKind::Enclosure;
  double chip_score = 1.0;
  Status status = Status::Pass;
  std::size_t violation_count = 0;
  double cf_sum = 0.0;
  std::map<std::string, CellScore> cells;

  bool operator==(const RuleScore&) const = default;
};

struct ScoreReport {
  Context context = Context::Top;
  std::string top_cell;
  Rect design_bbox;
  double design_area_mm2 = 0.0;
  double threshold = 0.99;
  AggregationMode aggregation_mode = AggregationMode::Count;
  std::string deck_digest;
  /// Product of the per-rule chip scores; informational, never gated.
  double composite_score = 1.0;
  std::vector<RuleScore> rules;  // deck order

  const RuleScore& rule(std::string_view name) const;
  bool operator==(const ScoreReport&) const = default;
};

double bbox_area_mm2(const Rect& r);

/// Fills cost_factor and score on every violation and aggregates per rule.
/// Top-context databases yield chip scores; by-cell databases additionally
/// yield per-cell scores, with the chip score taken over all masters.
ScoreReport score_db(ViolationDB& db, const RuleDeck& deck);

/// Chip scores from `top` with the per-cell tables of `by_cell`.
ScoreReport combine_reports(const ScoreReport& top, const ScoreReport& by_cell);

struct CellFailure {
  std::string rule;
  std::string cell;
  double score = 0.0;
};

struct Verdict {
  bool pass = true;
  std::vector<std::string> failing_rules;
  std::vector<CellFailure> failing_cells;  // ascending score
};

Verdict signoff(const ScoreReport& report);

/// 0 when every rule passes, 2 otherwise.
int exit_code_for(const ScoreReport& report);

std::string serialize_report(const ScoreReport& report);
ScoreReport parse_report(std::string_view document);

}  // namespace dfm
