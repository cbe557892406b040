#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dfm/error.hpp"
#include "dfm/layout.hpp"
#include "dfm/report.hpp"
#include "dfm/rules.hpp"
#include "dfm/scoring.hpp"
#include "fixtures.hpp"

using namespace dfm;
using fixtures::R;
using fixtures::shape;

namespace {

/// Database and report shaped like a finished run on "or1200_top".
std::pair<ViolationDB, ScoreReport> crafted(double chip) {
  ViolationDB db;
  db.top_cell = "or1200_top";
  db.design_bbox = R(5000, 345, 258465, 258295);
  db.deck = fixtures::deck_of({fixtures::enclosure_rule()});
  db.deck_digest = deck_digest(db.deck);
  ScoreReport rep;
  rep.top_cell = db.top_cell;
  rep.design_bbox = db.design_bbox;
  rep.deck_digest = db.deck_digest;
  RuleScore rs;
  rs.name = "RuleA";
  rs.chip_score = chip;
  rs.status = chip < 0.99 ? Status::Fail : Status::Pass;
  rep.rules.push_back(rs);
  rep.composite_score = chip;
  return {db, rep};
}

ViolationDB with_drawn(std::vector<Coord> drawn) {
  ViolationDB db;
  db.deck = fixtures::deck_of({fixtures::enclosure_rule(10, 30)});
  for (Coord d : drawn) {
    Violation v;
    v.rule = "RuleA";
    v.drawn_value = d;
    db.violations.push_back(v);
  }
  return db;
}

}  // namespace

TEST_CASE("micrometer formatting") {
  CHECK(format_um4(5000) == "5.0000");
  CHECK(format_um4(345) == "0.3450");
  CHECK(format_um4(258465) == "258.4650");
  CHECK(format_um4(0) == "0.0000");
  CHECK(format_um4(-35) == "-0.0350");
  CHECK(format_um4(-1500) == "-1.5000");
}

TEST_CASE("chip row matches the reference line") {
  auto [db, rep] = crafted(0.9692);
  std::string text = write_text_summary(db, rep);
  CHECK(text.find("or1200_top (5.0000, 0.3450) (258.4650, 258.2950) DFM_SCORE = 0.9692\n") != std::string::npos);
  CHECK(text.find("RuleA_CHIP_Score\n") != std::string::npos);
  CHECK(text.find("Status: FAIL") != std::string::npos);
  CHECK(text.find("Structure ( lower left x, y ) ( upper right x, y ) Report = Value") != std::string::npos);
  CHECK(text.find("RuleA_CELL_Score") == std::string::npos);
  CHECK(write_text_summary(db, rep, "_imp").find("RuleA_CHIP_Score_imp\n") != std::string::npos);
}

TEST_CASE("violation rows") {
  RuleDeck deck = fixtures::deck_of({fixtures::enclosure_rule(10, 30)});
  Design d = fixtures::flat_design({shape("M1", R(80, 70, 180, 180)), shape("V1", R(100, 100, 150, 150))});
  ViolationDB db = run_rules(d, deck, Context::Top);
  ScoreReport rep = score_db(db, deck);
  std::string text = write_text_summary(db, rep);
  CHECK(text.find("Score       = 0.5000") != std::string::npos);
  CHECK(text.find("Drawn_Value = 0.0200") != std::string::npos);
  CHECK(text.find("TOP (0.0800, 0.1000) (0.1000, 0.1500)") != std::string::npos);
  CHECK(write_text_summary(db, rep) == text);
}

TEST_CASE("empty database gives header blocks only") {
  RuleDeck deck = fixtures::deck_of({fixtures::enclosure_rule()});
  ViolationDB db = run_rules(fixtures::flat_design({}), deck, Context::Top);
  ScoreReport rep = score_db(db, deck);
  std::string text = write_text_summary(db, rep);
  CHECK(text.find("RuleA_err") != std::string::npos);
  CHECK(text.find("Drawn_Value") == std::string::npos);
  CHECK(text.find("DFM_SCORE = 1.0000") != std::string::npos);
}

TEST_CASE("cell block for by-cell runs") {
  RuleDeck deck = fixtures::deck_of({fixtures::enclosure_rule(10, 30, 0.1)});
  Design d;
  d.top = "TOP";
  d.cells["MASTER"] = {"MASTER", {shape("M1", R(90, 70, 180, 180)), shape("V1", R(100, 100, 150, 150))}, {}};
  d.cells["TOP"] = {"TOP", {}, {{"MASTER", {}}}};
  ViolationDB db = run_rules(d, deck, Context::ByCell);
  ScoreReport rep = score_db(db, deck);
  std::string text = write_text_summary(db, rep);
  CHECK(text.find("RuleA_CELL_Score\n") != std::string::npos);
  CHECK(text.find("MASTER (0.0900, 0.0700) (0.1800, 0.1800) DFM_SCORE = 0.9048") != std::string::npos);
}

TEST_CASE("margin histogram") {
  Rule rule = fixtures::enclosure_rule(10, 30);
  Histogram h = margin_histogram(with_drawn({10, 10, 20}), rule, 3);
  CHECK(h.counts == std::vector<std::size_t>{0, 2, 1});
  CHECK(h.edges_nm == std::vector<double>{0, 10, 20, 30});

  CHECK(margin_histogram(with_drawn({}), rule, 4).counts == std::vector<std::size_t>{0, 0, 0, 0});
  Histogram spike = margin_histogram(with_drawn({10, 10, 10, 10}), rule, 6);
  CHECK(spike.counts == std::vector<std::size_t>{0, 0, 4, 0, 0, 0});
  CHECK_THROWS_AS(margin_histogram(with_drawn({}), rule, 0), Error);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Coord> drawn(0, 29);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Coord> vals(static_cast<std::size_t>(trial));
    for (auto& v : vals) v = drawn(rng);
    for (int bins : {1, 2, 7, 30, 64}) {
      Histogram hh = margin_histogram(with_drawn(vals), rule, bins);
      CHECK(std::accumulate(hh.counts.begin(), hh.counts.end(), std::size_t{0}) == vals.size());
    }
  }
  CHECK(serialize_histograms({h}).find("\"counts\"") != std::string::npos);
}

TEST_CASE("run comparison") {
  auto [db_a, before] = crafted(0.9692);
  auto [db_b, after] = crafted(0.9947);
  Comparison cmp = compare_runs(db_a, before, db_b, after);
  REQUIRE(cmp.rules.size() == 1);
  CHECK(cmp.rules[0].delta == doctest::Approx(0.0255).epsilon(1e-9));
  CHECK(cmp.rules[0].flag == "now passing");
  CHECK(compare_runs(db_b, after, db_a, before).rules[0].flag == "now failing");

  Comparison same = compare_runs(db_a, before, db_a, before);
  CHECK(same.rules[0].delta == 0.0);
  CHECK(same.rules[0].flag.empty());
  CHECK(serialize_comparison(cmp).find("now passing") != std::string::npos);

  ViolationDB other = db_b;
  other.deck = fixtures::deck_of({fixtures::enclosure_rule(10, 40)});
  other.deck_digest = deck_digest(other.deck);
  try {
    (void)compare_runs(db_a, before, other, after);
    FAIL("expected mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DigestMismatch);
  }
}

TEST_CASE("ranked listing orders violations by score") {
  RuleDeck deck = fixtures::deck_of({fixtures::enclosure_rule(10, 30)});
  Design d = fixtures::flat_design({shape("M1", R(75, 90, 180, 180)), shape("V1", R(100, 100, 150, 150))});
  ViolationDB db = run_rules(d, deck, Context::Top);
  ScoreReport rep = score_db(db, deck);
  std::string text = ranked_listing(db, rep);
  auto low = text.find("0.0000");
  auto high = text.find("0.7500");
  REQUIRE(low != std::string::npos);
  REQUIRE(high != std::string::npos);
  CHECK(low < high);
}
