#include "dfm/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dfm/error.hpp"
#include "json_util.hpp"

namespace dfm {

using detail::json;
using detail::ordered_json;

namespace {

Status status_for(double score, double threshold) { return score < threshold ? Status::Fail : Status::Pass; }

Status status_from_string(std::string_view s) {
  if (s == "PASS") return Status::Pass;
  if (s == "FAIL") return Status::Fail;
  throw Error(ErrorKind::InvalidValue, "unknown status '" + std::string(s) + "'");
}

AggregationMode mode_from_string(std::string_view s) {
  if (s == "count") return AggregationMode::Count;
  if (s == "density") return AggregationMode::Density;
  throw Error(ErrorKind::InvalidValue, "unknown aggregation mode '" + std::string(s) + "'");
}

double poisson(double cf_sum, const Rule& rule, AggregationMode mode, double area_mm2) {
  if (mode == AggregationMode::Density) {
    if (!(area_mm2 > 0.0)) {
      throw Error(ErrorKind::InvalidValue, rule.name + ": density aggregation needs a positive area");
    }
    return std::exp(-rule.failure_rate * cf_sum / area_mm2);
  }
  return std::exp(-rule.failure_rate * cf_sum);
}

double scored_cf(const Violation& v) {
  if (!v.cost_factor) throw Error(ErrorKind::InvalidValue, "violation " + std::to_string(v.id) + " is not scored");
  return *v.cost_factor;
}

}  // namespace

std::string_view to_string(Status status) { return status == Status::Pass ? "PASS" : "FAIL"; }

double cost_factor(Coord drawn, const Rule& rule) {
  if (drawn >= rule.dfm_value) {
    throw Error(ErrorKind::InvalidValue,
                fmt::format("{}: drawn value {} nm meets the dfm value {} nm", rule.name, drawn, rule.dfm_value));
  }
  if (drawn <= rule.drc_value) return 1.0;
  double frac = static_cast<double>(rule.dfm_value - drawn) / static_cast<double>(rule.dfm_value - rule.drc_value);
  return std::clamp(std::pow(frac, rule.gamma), 0.0, 1.0);
}

double violation_score(double cf) {
  if (!(cf >= 0.0 && cf <= 1.0)) throw Error(ErrorKind::InvalidValue, fmt::format("cost factor {} outside [0, 1]", cf));
  return std::clamp(1.0 - cf, 0.0, 1.0);
}

double aggregate_score(std::span<const Violation* const> violations, const Rule& rule, AggregationMode mode,
                       double area_mm2) {
  if (violations.empty()) return 1.0;
  double sum = 0.0;
  for (const Violation* v : violations) sum += scored_cf(*v);
  return poisson(sum, rule, mode, area_mm2);
}

double aggregate_score(std::span<const Violation> violations, const Rule& rule, AggregationMode mode,
                       double area_mm2) {
  std::vector<const Violation*> ptrs;
  ptrs.reserve(violations.size());
  for (const Violation& v : violations) ptrs.push_back(&v);
  return aggregate_score(ptrs, rule, mode, area_mm2);
}

double bbox_area_mm2(const Rect& r) {
  return static_cast<double>(r.width()) * static_cast<double>(r.height()) * 1e-12;
}

const RuleScore& ScoreReport::rule(std::string_view name) const {
  for (const RuleScore& r : rules) {
    if (r.name == name) return r;
  }
  throw Error(ErrorKind::InvalidValue, "report has no rule '" + std::string(name) + "'");
}

ScoreReport score_db(ViolationDB& db, const RuleDeck& deck) {
  ScoreReport report;
  report.context = db.context;
  report.top_cell = db.top_cell;
  report.design_bbox = db.design_bbox;
  report.design_area_mm2 = bbox_area_mm2(db.design_bbox);
  report.threshold = deck.signoff_threshold;
  report.aggregation_mode = deck.aggregation_mode;
  report.deck_digest = deck_digest(deck);

  for (Violation& v : db.violations) {
    const Rule& rule = deck.rule(v.rule);
    v.cost_factor = cost_factor(v.drawn_value, rule);
    v.score = violation_score(*v.cost_factor);
  }

  for (const Rule& rule : deck.rules) {
    RuleScore rs;
    rs.name = rule.name;
    rs.kind = rule.kind;
    std::vector<const Violation*> mine = db.for_rule(rule.name);
    rs.violation_count = mine.size();
    for (const Violation* v : mine) rs.cf_sum += *v->cost_factor;
    rs.chip_score = aggregate_score(mine, rule, deck.aggregation_mode, report.design_area_mm2);
    rs.status = status_for(rs.chip_score, deck.signoff_threshold);

    if (db.context == Context::ByCell) {
      std::map<std::string, std::vector<const Violation*>> by_cell;
      for (const Violation* v : mine) by_cell[v->cell].push_back(v);
      for (const auto& [cell, list] : by_cell) {
        CellScore cs;
        auto box = db.cell_bboxes.find(cell);
        cs.bbox = box == db.cell_bboxes.end() ? Rect{} : box->second;
        cs.count = list.size();
        cs.score = aggregate_score(list, rule, deck.aggregation_mode, bbox_area_mm2(cs.bbox));
        rs.cells.emplace(cell, cs);
      }
    }
    report.composite_score *= rs.chip_score;
    report.rules.push_back(std::move(rs));
  }
  return report;
}

ScoreReport combine_reports(const ScoreReport& top, const ScoreReport& by_cell) {
  ScoreReport out = top;
  for (RuleScore& rs : out.rules) {
    for (const RuleScore& other : by_cell.rules) {
      if (other.name == rs.name) rs.cells = other.cells;
    }
  }
  return out;
}

Verdict signoff(const ScoreReport& report) {
  Verdict v;
  for (const RuleScore& rs : report.rules) {
    if (rs.chip_score < report.threshold) {
      v.pass = false;
      v.failing_rules.push_back(rs.name);
    }
    for (const auto& [cell, cs] : rs.cells) {
      if (cs.score < report.threshold) v.failing_cells.push_back({rs.name, cell, cs.score});
    }
  }
  std::stable_sort(v.failing_cells.begin(), v.failing_cells.end(), [](const CellFailure& a, const CellFailure& b) {
    return std::tie(a.score, a.rule, a.cell) < std::tie(b.score, b.rule, b.cell);
  });
  return v;
}

int exit_code_for(const ScoreReport& report) { return signoff(report).pass ? 0 : 2; }

std::string serialize_report(const ScoreReport& report) {
  ordered_json doc;
  doc["context"] = to_string(report.context);
  doc["top_cell"] = report.top_cell;
  doc["design_bbox_nm"] = detail::rect_nm(report.design_bbox);
  doc["design_area_mm2"] = report.design_area_mm2;
  doc["threshold"] = report.threshold;
  doc["aggregation_mode"] = to_string(report.aggregation_mode);
  doc["deck_digest"] = report.deck_digest;
  doc["composite_score"] = report.composite_score;
  ordered_json rules = ordered_json::array();
  for (const RuleScore& rs : report.rules) {
    ordered_json jr;
    jr["name"] = rs.name;
    jr["kind"] = to_string(rs.kind);
    jr["chip_score"] = rs.chip_score;
    jr["status"] = to_string(rs.status);
    jr["violation_count"] = rs.violation_count;
    jr["cf_sum"] = rs.cf_sum;
    ordered_json cells = ordered_json::array();
    for (const auto& [name, cs] : rs.cells) {
      cells.push_back({{"cell", name}, {"score", cs.score}, {"count", cs.count}, {"bbox_nm", detail::rect_nm(cs.bbox)}});
    }
    jr["cells"] = std::move(cells);
    rules.push_back(std::move(jr));
  }
  doc["rules"] = std::move(rules);
  return doc.dump(2) + "\n";
}

ScoreReport parse_report(std::string_view document) {
  json doc = detail::parse_json(document, "score report");
  const char* where = "score report";
  ScoreReport r;
  r.context = context_from_string(detail::require_string(doc, "context", where));
  r.top_cell = detail::require_string(doc, "top_cell", where);
  r.design_bbox = detail::parse_rect_nm(detail::require(doc, "design_bbox_nm", where), where);
  r.design_area_mm2 = detail::require_number(doc, "design_area_mm2", where);
  r.threshold = detail::require_number(doc, "threshold", where);
  r.aggregation_mode = mode_from_string(detail::require_string(doc, "aggregation_mode", where));
  r.deck_digest = detail::require_string(doc, "deck_digest", where);
  r.composite_score = detail::require_number(doc, "composite_score", where);
  for (const json& jr : detail::require(doc, "rules", where)) {
    RuleScore rs;
    rs.name = detail::require_string(jr, "name", where);
    rs.kind = detail::require_string(jr, "kind", where) == "SPACING" ? RuleKind::Spacing : RuleKind::Enclosure;
    rs.chip_score = detail::require_number(jr, "chip_score", where);
    rs.status = status_from_string(detail::require_string(jr, "status", where));
    rs.violation_count = static_cast<std::size_t>(detail::require_int(jr, "violation_count", where));
    rs.cf_sum = detail::require_number(jr, "cf_sum", where);
    for (const json& jc : detail::require(jr, "cells", where)) {
      CellScore cs;
      cs.score = detail::require_number(jc, "score", where);
      cs.count = static_cast<std::size_t>(detail::require_int(jc, "count", where));
      cs.bbox = detail::parse_rect_nm(detail::require(jc, "bbox_nm", where), where);
      rs.cells.emplace(detail::require_string(jc, "cell", where), cs);
    }
    r.rules.push_back(std::move(rs));
  }
  return r;
}

}  // namespace dfm
