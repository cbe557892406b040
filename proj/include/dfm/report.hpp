#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dfm/rules.hpp"
#include "dfm/scoring.hpp"

namespace dfm {

/// Nanometers printed as micrometers with four decimals, e.g. 345 -> "0.3450".
std::string format_um4(Coord nm);

/// Fixed-format result summary: per rule an `<Rule>_err` block of scored
/// violations, a `<Rule>_CHIP_Score<suffix>` block and, when the report carries
/// per-cell data, a `<Rule>_CELL_Score<suffix>` block.
std::string write_text_summary(const ViolationDB& db, const ScoreReport& report, std::string_view suffix = "");

struct Histogram {
  std::string rule;
  Coord dfm_value = 0;
  std::vector<double> edges_nm;      // bins + 1 edges over [0, dfm]
  std::vector<std::size_t> counts;   // left-closed bins

  bool operator==(const Histogram&) const = default;
};

/// Equal-width histogram of drawn values over [0, dfm). Throws when bins < 1.
Histogram margin_histogram(const ViolationDB& db, const Rule& rule, int bins);
std::string serialize_histograms(const std::vector<Histogram>& histograms);

struct RuleComparison {
  std::string rule;
  std::size_t count_before = 0;
  std::size_t count_after = 0;
  double score_before = 1.0;
  double score_after = 1.0;
  double delta = 0.0;
  std::string flag;  // "now passing", "now failing" or empty
};

struct Comparison {
  double threshold = 0.99;
  std::vector<RuleComparison> rules;
};

/// Per-rule before/after counts and scores. Throws DigestMismatch when the
/// two runs used different decks.
Comparison compare_runs(const ViolationDB& before_db, const ScoreReport& before, const ViolationDB& after_db,
                        const ScoreReport& after);
std::string serialize_comparison(const Comparison& cmp);

/// Violations ascending by score, then failing cells ascending by score.
std::string ranked_listing(const ViolationDB& db, const ScoreReport& report);

}  // namespace dfm
