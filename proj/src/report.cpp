#include "dfm/report.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

#include "dfm/error.hpp"
#include "json_util.hpp"

namespace dfm {

using detail::ordered_json;

namespace {

constexpr std::string_view kRule = "-----";
constexpr std::string_view kHeader = "Structure ( lower left x, y ) ( upper right x, y ) Report = Value";

struct Row {
  std::string name;
  std::string lower_left;
  std::string upper_right;
  std::string report;
};

std::string corner(Coord x, Coord y) { return "(" + format_um4(x) + ", " + format_um4(y) + ")"; }

// Rows padded per column to the widest entry of the block.
void emit_block(std::string& out, const std::string& title, const std::vector<Row>& rows) {
  std::size_t wn = 0;
  std::size_t wl = 0;
  std::size_t wu = 0;
  for (const Row& r : rows) {
    wn = std::max(wn, r.name.size());
    wl = std::max(wl, r.lower_left.size());
    wu = std::max(wu, r.upper_right.size());
  }
  out += fmt::format("{}\n{}\n{}\n{}\n{}\n", kRule, title, kRule, kHeader, kRule);
  for (const Row& r : rows) {
    out += fmt::format("{:<{}} {:<{}} {:<{}} {}\n", r.name, wn, r.lower_left, wl, r.upper_right, wu, r.report);
  }
}

std::string score4(double v) { return fmt::format("{:.4f}", v); }

}  // namespace

std::string format_um4(Coord nm) {
  const char* sign = nm < 0 ? "-" : "";
  std::uint64_t a = nm < 0 ? static_cast<std::uint64_t>(-(nm + 1)) + 1 : static_cast<std::uint64_t>(nm);
  return fmt::format("{}{}.{:03d}0", sign, a / 1000, a % 1000);
}

std::string write_text_summary(const ViolationDB& db, const ScoreReport& report, std::string_view suffix) {
  std::string out;
  for (const Rule& rule : db.deck.rules) {
    std::vector<Row> rows;
    for (const Violation* v : db.for_rule(rule.name)) {
      std::string ll = corner(v->bbox.lo.x, v->bbox.lo.y);
      std::string ur = corner(v->bbox.hi.x, v->bbox.hi.y);
      rows.push_back({v->cell, ll, ur, "Drawn_Value = " + format_um4(v->drawn_value)});
      rows.push_back({"", ll, ur, "Score       = " + (v->score ? score4(*v->score) : std::string("-"))});
    }
    emit_block(out, rule.name + "_err", rows);

    const RuleScore* rs = nullptr;
    for (const RuleScore& r : report.rules) {
      if (r.name == rule.name) rs = &r;
    }
    if (!rs) continue;
    const Rect& box = report.design_bbox;
    emit_block(out, fmt::format("{}_CHIP_Score{}", rule.name, suffix),
               {{report.top_cell, corner(box.lo.x, box.lo.y), corner(box.hi.x, box.hi.y),
                 "DFM_SCORE = " + score4(rs->chip_score)}});
    out += fmt::format("Status: {}\n", to_string(rs->status));

    if (!rs->cells.empty()) {
      std::vector<Row> cells;
      for (const auto& [name, cs] : rs->cells) {
        cells.push_back({name, corner(cs.bbox.lo.x, cs.bbox.lo.y), corner(cs.bbox.hi.x, cs.bbox.hi.y),
                         "DFM_SCORE = " + score4(cs.score)});
      }
      emit_block(out, fmt::format("{}_CELL_Score{}", rule.name, suffix), cells);
    }
  }
  return out;
}

Histogram margin_histogram(const ViolationDB& db, const Rule& rule, int bins) {
  if (bins < 1) throw Error(ErrorKind::InvalidValue, "histogram needs at least one bin");
  Histogram h;
  h.rule = rule.name;
  h.dfm_value = rule.dfm_value;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (int i = 0; i <= bins; ++i) {
    h.edges_nm.push_back(static_cast<double>(rule.dfm_value) * i / bins);
  }
  for (const Violation* v : db.for_rule(rule.name)) {
    Coord d = std::clamp<Coord>(v->drawn_value, 0, rule.dfm_value - 1);
    auto bin = static_cast<std::size_t>(d * bins / rule.dfm_value);
    ++h.counts[bin];
  }
  return h;
}

std::string serialize_histograms(const std::vector<Histogram>& histograms) {
  ordered_json list = ordered_json::array();
  for (const Histogram& h : histograms) {
    ordered_json jh;
    jh["rule"] = h.rule;
    jh["dfm_nm"] = h.dfm_value;
    jh["edges_nm"] = h.edges_nm;
    jh["counts"] = h.counts;
    list.push_back(std::move(jh));
  }
  return list.dump(2) + "\n";
}

Comparison compare_runs(const ViolationDB& before_db, const ScoreReport& before, const ViolationDB& after_db,
                        const ScoreReport& after) {
  if (before_db.deck_digest != after_db.deck_digest || before.deck_digest != after.deck_digest) {
    throw Error(ErrorKind::DigestMismatch, "runs were made with different rule decks (" + before_db.deck_digest +
                                               " vs " + after_db.deck_digest + ")");
  }
  Comparison cmp;
  cmp.threshold = after.threshold;
  for (const RuleScore& b : before.rules) {
    const RuleScore& a = after.rule(b.name);
    RuleComparison rc;
    rc.rule = b.name;
    rc.count_before = b.violation_count;
    rc.count_after = a.violation_count;
    rc.score_before = b.chip_score;
    rc.score_after = a.chip_score;
    rc.delta = a.chip_score - b.chip_score;
    bool passed = b.chip_score >= before.threshold;
    bool passes = a.chip_score >= after.threshold;
    if (!passed && passes) rc.flag = "now passing";
    else if (passed && !passes) rc.flag = "now failing";
    cmp.rules.push_back(std::move(rc));
  }
  return cmp;
}

std::string serialize_comparison(const Comparison& cmp) {
  ordered_json doc;
  doc["threshold"] = cmp.threshold;
  ordered_json rules = ordered_json::array();
  for (const RuleComparison& rc : cmp.rules) {
    ordered_json jr;
    jr["rule"] = rc.rule;
    jr["count_before"] = rc.count_before;
    jr["count_after"] = rc.count_after;
    jr["score_before"] = rc.score_before;
    jr["score_after"] = rc.score_after;
    jr["delta"] = rc.delta;
    jr["flag"] = rc.flag;
    rules.push_back(std::move(jr));
  }
  doc["rules"] = std::move(rules);
  return doc.dump(2) + "\n";
}

std::string ranked_listing(const ViolationDB& db, const ScoreReport& report) {
  std::vector<const Violation*> order;
  for (const Violation& v : db.violations) order.push_back(&v);
  std::stable_sort(order.begin(), order.end(), [](const Violation* a, const Violation* b) {
    return a->score.value_or(0.0) < b->score.value_or(0.0);
  });
  std::string out = fmt::format("{}\nViolations by score\n{}\n", kRule, kRule);
  for (const Violation* v : order) {
    out += fmt::format("{} {} {} {} {} {} Score = {}\n", v->id, v->rule, v->cell, to_string(v->side),
                       corner(v->bbox.lo.x, v->bbox.lo.y), corner(v->bbox.hi.x, v->bbox.hi.y),
                       v->score ? score4(*v->score) : std::string("-"));
  }
  Verdict verdict = signoff(report);
  out += fmt::format("{}\nFailing cells by score\n{}\n", kRule, kRule);
  for (const CellFailure& f : verdict.failing_cells) {
    out += fmt::format("{} {} DFM_SCORE = {}\n", f.rule, f.cell, score4(f.score));
  }
  out += fmt::format("{}\nSignoff: {}\n", kRule, verdict.pass ? "PASS" : "FAIL");
  for (const std::string& r : verdict.failing_rules) out += "  failing rule " + r + "\n";
  return out;
}

}  // namespace dfm
