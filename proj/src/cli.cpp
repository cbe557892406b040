#include "dfm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dfm/error.hpp"
#include "dfm/improvability.hpp"
#include "dfm/layout.hpp"
#include "dfm/report.hpp"
#include "dfm/rules.hpp"
#include "dfm/scoring.hpp"

namespace dfm {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

struct CheckArgs {
  std::string layout;
  std::string rules;
  std::string context = "top";
  std::string out;
};

int do_check(const CheckArgs& a) {
  Design design = parse_layout(read_file(a.layout));
  RuleDeck deck = parse_rule_deck(read_file(a.rules));
  fs::path dir(a.out);
  fs::create_directories(dir);

  std::optional<ViolationDB> top;
  std::optional<ViolationDB> by_cell;
  std::optional<ScoreReport> top_report;
  std::optional<ScoreReport> cell_report;
  if (a.context == "top" || a.context == "both") {
    top = run_rules(design, deck, Context::Top);
    top_report = score_db(*top, deck);
    write_file(dir / "violations_top.json", serialize_db(*top));
  }
  if (a.context == "by-cell" || a.context == "both") {
    by_cell = run_rules(design, deck, Context::ByCell);
    cell_report = score_db(*by_cell, deck);
    write_file(dir / "violations_by_cell.json", serialize_db(*by_cell));
  }

  ScoreReport report = top_report ? (cell_report ? combine_reports(*top_report, *cell_report) : *top_report)
                                  : *cell_report;
  write_file(dir / "report.json", serialize_report(report));
  write_file(dir / "summary.txt", write_text_summary(top ? *top : *by_cell, report));
  return exit_code_for(report);
}

int do_fix(const CheckArgs& a) {
  Design design = parse_layout(read_file(a.layout));
  RuleDeck deck = parse_rule_deck(read_file(a.rules));
  fs::path dir(a.out);
  fs::create_directories(dir);

  ViolationDB db = run_rules(design, deck, Context::Top);
  ScoreReport report = score_db(db, deck);
  PlacedGeometry geom = flatten(design, design.top);
  std::vector<Marker> markers = filter_markers(generate_markers(db, deck), geom, deck);

  ViolationDB imp_db;
  ScoreReport imp = improvability_score(markers, design, deck, &imp_db);

  write_file(dir / "violations_top.json", serialize_db(db));
  write_file(dir / "report.json", serialize_report(report));
  write_file(dir / "summary.txt", write_text_summary(db, report));
  write_file(dir / "markers.json", serialize_markers(markers));
  write_file(dir / "fixes.json", serialize_fixes(emit_fix_file(markers)));
  write_file(dir / "violations_imp.json", serialize_db(imp_db));
  write_file(dir / "report_imp.json", serialize_report(imp));
  write_file(dir / "summary_imp.txt", write_text_summary(imp_db, imp, "_imp"));
  return exit_code_for(imp);
}

int do_apply(const std::string& layout, const std::string& fixes, const std::string& out) {
  Design design = parse_layout(read_file(layout));
  FixDocument doc = parse_fixes(read_file(fixes));
  write_file(out, serialize_layout(apply_fixes(design, doc)));
  return 0;
}

int do_report(const std::string& db_path, int bins, const std::string& compare, std::ostream& out) {
  ViolationDB db = parse_db(read_file(db_path));
  ScoreReport report = score_db(db, db.deck);
  out << write_text_summary(db, report) << ranked_listing(db, report);

  if (bins != 0) {
    std::vector<Histogram> hs;
    for (const Rule& r : db.deck.rules) hs.push_back(margin_histogram(db, r, bins));
    out << "-----\nHistogram\n-----\n" << serialize_histograms(hs);
  }
  if (compare.empty()) return exit_code_for(report);

  ViolationDB after = parse_db(read_file(compare));
  ScoreReport after_report = score_db(after, after.deck);
  out << "-----\nComparison\n-----\n" << serialize_comparison(compare_runs(db, report, after, after_report));
  return exit_code_for(after_report);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DFM rule scoring and fixing", "dfmscore"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Run the rule deck and score the layout");
  check_cmd->add_option("--layout", check.layout, "Layout file")->required();
  check_cmd->add_option("--rules", check.rules, "Rule deck file")->required();
  check_cmd->add_option("--context", check.context, "top, by-cell or both")
      ->check(CLI::IsMember({"top", "by-cell", "both"}));
  check_cmd->add_option("--out", check.out, "Output directory")->required();

  CheckArgs fix;
  auto* fix_cmd = app.add_subcommand("fix", "Generate improvability markers and fixes");
  fix_cmd->add_option("--layout", fix.layout, "Layout file")->required();
  fix_cmd->add_option("--rules", fix.rules, "Rule deck file")->required();
  fix_cmd->add_option("--out", fix.out, "Output directory")->required();

  std::string apply_layout;
  std::string apply_fixes_path;
  std::string apply_out;
  auto* apply_cmd = app.add_subcommand("apply", "Write the layout with fixes applied");
  apply_cmd->add_option("--layout", apply_layout, "Layout file")->required();
  apply_cmd->add_option("--fixes", apply_fixes_path, "Fix document")->required();
  apply_cmd->add_option("--out", apply_out, "Output layout file")->required();

  std::string db_path;
  int bins = 0;
  std::string compare;
  auto* report_cmd = app.add_subcommand("report", "Summarize a violation database");
  report_cmd->add_option("--db", db_path, "Violation database")->required();
  report_cmd->add_option("--histogram-bins", bins, "Drawn-margin histogram bins")->check(CLI::PositiveNumber);
  report_cmd->add_option("--compare", compare, "Second database to compare against");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*check_cmd) return do_check(check);
    if (*fix_cmd) return do_fix(fix);
    if (*apply_cmd) return do_apply(apply_layout, apply_fixes_path, apply_out);
    if (*report_cmd) return do_report(db_path, bins, compare, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace dfm
