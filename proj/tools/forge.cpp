// forge: command-line entry point.
//
// Exit status: 0 on success, 1 on a runtime error (or an unsolved puzzle for
// the solve commands), 2 on a usage error.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forge/core/command.hpp"
#include "forge/core/parallel.hpp"
#include "forge/core/version.hpp"
#include "forge/eval/report.hpp"
#include "forge/eval/wire.hpp"
#include "forge/pipeline/dataset.hpp"
#include "forge/pipeline/synth.hpp"
#include "forge/sudoku/oracle.hpp"
#include "forge/sudoku/solver.hpp"
#include "forge/zebra/generator.hpp"
#include "forge/zebra/io.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct Context {
  unsigned jobs = default_jobs();
  std::vector<std::string> argv;
  std::string config;

  CommandSpec spec(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt) const {
    return {name, argv, config, seed};
  }
};

pipeline::LogSink stderr_log(bool on) {
  if (!on) return {};
  return [](const std::string& m) { std::cerr << m << '\n'; };
}

// ---- sudoku --------------------------------------------------------------

struct SudokuSolveArgs {
  std::string board;
  std::string file;
};

int sudoku_solve(const SudokuSolveArgs& a) {
  std::vector<std::string> boards;
  if (!a.board.empty()) boards.push_back(a.board);
  if (!a.file.empty()) {
    std::ifstream in(a.file);
    if (!in) throw IoError("cannot open " + a.file);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) boards.push_back(line);
    }
  }
  if (boards.empty()) throw CLI::ValidationError("--board or --file", "give a puzzle");
  int status = 0;
  for (const auto& text : boards) {
    const auto board = sudoku::parse_board(text);
    auto outcome = sudoku::solve_with_trace(board);
    if (const auto* trace = std::get_if<sudoku::ReasoningTrace>(&outcome)) {
      std::cout << "puzzle " << board.to_string() << "\n" << sudoku::format_trace(*trace)
                << "solution " << trace->final_board().to_string() << "\n";
      continue;
    }
    const auto& stuck = std::get<sudoku::StuckState>(outcome);
    std::cout << "puzzle " << board.to_string() << "\nstuck after " << stuck.partial.size() << " fills\n"
              << sudoku::render_board(stuck.board);
    status = 1;
  }
  return status;
}

struct SudokuRateArgs {
  std::string board;
  int trials = 10;
  std::uint64_t seed = 0;
};

int sudoku_rate(const SudokuRateArgs& a) {
  const auto r = sudoku::rate_difficulty(sudoku::parse_board(a.board), a.trials, a.seed);
  nlohmann::ordered_json j;
  j["average_guesses"] = r.average_guesses;
  j["max_guess_depth"] = r.max_guess_depth;
  j["trials"] = r.trials;
  std::cout << j.dump() << '\n';
  return 0;
}

struct SudokuSynthArgs {
  std::string out;
  pipeline::SynthConfig cfg;
};

int sudoku_synth(const Context& ctx, SudokuSynthArgs a) {
  a.cfg.jobs = ctx.jobs;
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  pipeline::write_synthetic_csv(a.out, a.cfg);
  nlohmann::ordered_json side;
  side["tool"] = tool_json();
  side["command"] = ctx.spec("sudoku synth", a.cfg.seed).to_json();
  side["rows"] = a.cfg.count;
  pipeline::write_text_file(a.out + ".json", side.dump(2) + "\n");
  std::cout << "wrote " << a.cfg.count << " rows to " << a.out << '\n';
  return 0;
}

struct SplitArgs {
  std::string ordering = "solver";
  std::uint64_t seed = 0;
  double test_fraction = 0.1 / 1.9;
  std::size_t test_count = 0;  // 0: use the fraction
  bool stratify = false;
  std::size_t records_per_shard = 100000;

  pipeline::BuildCommon common(const Context& ctx, const std::string& name, bool verbose) const {
    pipeline::BuildCommon c;
    c.ordering = codec::parse_ordering(ordering);
    c.split.seed = seed;
    c.split.test_fraction = test_fraction;
    if (test_count > 0) c.split.test_count = test_count;
    c.split.stratify = stratify;
    c.records_per_shard = records_per_shard;
    c.jobs = ctx.jobs;
    c.command = ctx.spec(name, seed);
    c.log = stderr_log(verbose);
    return c;
  }
};

void add_split_options(CLI::App* app, SplitArgs& s) {
  app->add_option("--ordering", s.ordering, "Solution order: fixed, random or solver")
      ->check(CLI::IsMember({"fixed", "random", "solver"}));
  app->add_option("--seed", s.seed, "Seed for the split and random orderings");
  app->add_option("--test-fraction", s.test_fraction, "Share of puzzles held out")->check(CLI::Range(0.0, 1.0));
  app->add_option("--test-count", s.test_count, "Exact test-set size (overrides --test-fraction)");
  app->add_flag("--stratify", s.stratify, "Hold out the same share of every difficulty bucket");
  app->add_option("--records-per-shard", s.records_per_shard, "Records per shard file")->check(CLI::PositiveNumber);
}

struct SudokuBuildArgs {
  std::string csv;
  std::string out;
  std::size_t limit = 0;
  std::string puzzle_col = "puzzle";
  std::string solution_col = "solution";
  std::string difficulty_col = "difficulty";
  bool no_difficulty = false;
  bool verbose = false;
  SplitArgs split;
};

void print_manifest_summary(const nlohmann::ordered_json& m, const std::string& out) {
  std::cout << "wrote " << m["counts"]["train"] << " train and " << m["counts"]["test"] << " test records to " << out
            << '\n';
}

int sudoku_build(const Context& ctx, const SudokuBuildArgs& a) {
  pipeline::SudokuBuildConfig cfg;
  cfg.csv = a.csv;
  cfg.ingest.limit = a.limit;
  cfg.ingest.columns = {a.puzzle_col, a.solution_col, a.difficulty_col};
  cfg.ingest.has_difficulty = !a.no_difficulty;
  cfg.ingest.jobs = ctx.jobs;
  cfg.ingest.log = stderr_log(a.verbose);
  cfg.common = a.split.common(ctx, "sudoku build", a.verbose);
  const auto m = pipeline::build_sudoku_dataset(a.out, cfg);
  const auto& ing = m["ingest"];
  std::cerr << "ingest: " << ing["rows"] << " rows, kept " << ing["kept"] << ", unreadable " << ing["unreadable"]
            << ", inconsistent " << ing["inconsistent"] << ", not unique " << ing["not_unique"] << ", stuck "
            << ing["stuck"] << ", duplicate " << ing["duplicate"] << '\n';
  print_manifest_summary(m, a.out);
  return 0;
}

// ---- zebra ---------------------------------------------------------------

struct ZebraGenArgs {
  int m = 3;
  int n = 3;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::string out;
};

int zebra_gen(const Context& ctx, const ZebraGenArgs& a) {
  if (a.m < 2 || a.m > codec::kZebraMaxSize || a.n < 1 || a.n > codec::kZebraMaxSize) {
    throw CLI::ValidationError("--m/--n", "sizes must be within 2..6 and 1..6");
  }
  const auto puzzles = parallel_map(a.count, ctx.jobs, [&](std::size_t k) {
    return zebra::generate_puzzle(a.m, a.n, a.seed + k);
  });
  if (a.out.empty()) {
    for (const auto& p : puzzles) std::cout << zebra::render_puzzle(p);
    return 0;
  }
  nlohmann::ordered_json extra;
  extra["tool"] = tool_json();
  extra["command"] = ctx.spec("zebra gen", a.seed).to_json();
  zebra::write_puzzles(a.out, puzzles, extra);
  std::cout << "wrote " << puzzles.size() << " puzzles to " << a.out << '\n';
  return 0;
}

struct ZebraSolveArgs {
  std::string file;
  std::string puzzle;
  std::size_t index = 0;
};

int zebra_solve(const ZebraSolveArgs& a) {
  zebra::ZebraPuzzle p;
  if (!a.puzzle.empty()) {
    p = zebra::puzzle_from_line(a.puzzle);
  } else if (!a.file.empty()) {
    const auto all = zebra::read_puzzles(a.file);
    if (a.index >= all.size()) throw std::out_of_range("--index past the end of " + a.file);
    p = all[a.index];
  } else {
    throw CLI::ValidationError("--file or --puzzle", "give a puzzle");
  }
  auto outcome = zebra::solve_zebra(p);
  const auto& trace = std::holds_alternative<zebra::ZebraSolved>(outcome) ? std::get<zebra::ZebraSolved>(outcome).trace
                                                                         : std::get<zebra::ZebraStuck>(outcome).trace;
  for (const auto& s : trace.steps) {
    std::cout << "pos" << s.position << " attr" << s.attribute << " = " << s.value << "  clues";
    for (int c : trace.progress[static_cast<std::size_t>(s.event)]) std::cout << ' ' << (c + 1);
    std::cout << '\n';
  }
  if (const auto* solved = std::get_if<zebra::ZebraSolved>(&outcome)) {
    std::cout << "solved" << (solved->assignment == p.solution ? "" : " (differs from the stored solution)") << '\n';
    for (int pos = 1; pos <= p.m; ++pos) {
      std::cout << "  " << pos << ":";
      for (int attr = 1; attr <= p.n; ++attr) std::cout << ' ' << solved->assignment.value(pos, attr);
      std::cout << '\n';
    }
    return 0;
  }
  std::cout << "stuck after " << trace.steps.size() << " of " << p.m * p.n << " cells\n";
  return 1;
}

struct ZebraBuildArgs {
  std::string out;
  int min_size = 3;
  int max_size = 6;
  std::size_t per_size = 20000;
  bool verbose = false;
  SplitArgs split;
};

int zebra_build(const Context& ctx, const ZebraBuildArgs& a) {
  pipeline::ZebraBuildConfig cfg;
  cfg.min_size = a.min_size;
  cfg.max_size = a.max_size;
  cfg.per_size = a.per_size;
  cfg.common = a.split.common(ctx, "zebra build", a.verbose);
  const auto m = pipeline::build_zebra_dataset(a.out, cfg);
  print_manifest_summary(m, a.out);
  return 0;
}

// ---- datasets, models, reports -------------------------------------------

int verify(const Context& ctx, const std::string& dir) {
  const auto r = pipeline::verify_dataset(dir, ctx.jobs);
  std::cout << r.records << " records, " << r.bad_records << " bad, " << r.overlap << " shared between splits, histogram "
            << (r.histogram_matches ? "matches" : "differs") << '\n';
  for (const auto& p : r.problems) std::cout << "  " << p << '\n';
  return r.ok() ? 0 : 1;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split = "test";
  int beam = 1;
  bool no_mask = false;
  bool hinted = false;
  bool probe = false;
  std::vector<int> counts = eval::kProbeFilledCounts;
  std::string report;
  std::string plots;
  std::size_t limit = 0;
  std::size_t failures = 20;
  std::size_t in_flight = 64;
};

void write_plots(const eval::EvalReport& rep, const std::string& dir) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  for (const auto& p : eval::render_plots(rep)) pipeline::write_text_file(fs::path(dir) / p.file, p.svg);
}

int run_eval(const Context& ctx, const EvalArgs& a, const std::string& name) {
  auto data = eval::load_eval_data(a.data, a.split);
  if (a.limit > 0 && data.items.size() > a.limit) data.items.resize(a.limit);
  auto client = eval::connect_model(a.model);
  eval::EvalConfig cfg;
  cfg.beam = a.beam;
  cfg.masked = !a.no_mask;
  cfg.hinted = a.hinted;
  cfg.probe = a.probe;
  cfg.probe_counts = a.counts;
  cfg.failure_limit = a.failures;
  cfg.in_flight = a.in_flight;
  auto rep = eval::evaluate_model(*client, data, cfg);
  rep.command = ctx.spec(name);
  std::cout << eval::render_text(rep);
  if (!a.report.empty()) pipeline::write_text_file(a.report, rep.to_json().dump(2) + "\n");
  write_plots(rep, a.plots);
  return 0;
}

struct ReportArgs {
  std::string in;
  std::string plots;
  std::size_t failures = 5;
};

int report(const ReportArgs& a) {
  const auto j = nlohmann::json::parse(pipeline::read_text_file(a.in), nullptr, false);
  if (j.is_discarded()) throw FormatError(a.in + " is not json");
  const auto rep = eval::EvalReport::from_json(j);
  std::cout << eval::render_text(rep);
  if (a.failures > 0 && !rep.failures.empty()) std::cout << '\n' << eval::dump_failures(rep, a.failures);
  write_plots(rep, a.plots);
  return 0;
}

void add_model_options(CLI::App* app, EvalArgs& a) {
  app->add_option("--model", a.model, "Model: a shell command speaking the wire protocol, or host:port")->required();
  app->add_option("--data", a.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  app->add_option("--split", a.split, "Split to evaluate")->check(CLI::IsMember({"train", "test"}));
  app->add_option("--beam", a.beam, "Beam width (1 = greedy)")->check(CLI::PositiveNumber);
  app->add_flag("--no-mask", a.no_mask, "Let the decoder emit any token");
  app->add_option("--report", a.report, "Write the report as JSON here");
  app->add_option("--plots", a.plots, "Write SVG plots into this directory");
  app->add_option("--limit", a.limit, "Evaluate only the first N puzzles");
  app->add_option("--failures", a.failures, "Failure records kept in the report");
  app->add_option("--in-flight", a.in_flight, "Puzzles decoded concurrently")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.argv.assign(argv + 1, argv + argc);

  CLI::App app{"forge: Sudoku and Zebra puzzle datasets, solvers and model evaluation"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  auto* config = app.set_config("--config", "", "TOML or INI file; sections name subcommands, e.g. [sudoku.build]");
  app.add_option("--jobs", ctx.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  std::function<int()> action;
  const auto bind = [&](CLI::App* cmd, std::function<int()> fn) {
    cmd->callback([&action, fn = std::move(fn)] { action = fn; });
  };

  auto* sudoku = app.add_subcommand("sudoku", "Sudoku solving, rating and dataset building")->require_subcommand(1);

  SudokuSolveArgs solve_args;
  auto* solve = sudoku->add_subcommand("solve", "Solve with the strategy solver and print its trace");
  solve->add_option("--board", solve_args.board, "81 characters, row-major; 0 or . for empty");
  solve->add_option("--file", solve_args.file, "One puzzle per line")->check(CLI::ExistingFile);
  bind(solve, [&] { return sudoku_solve(solve_args); });

  SudokuRateArgs rate_args;
  auto* rate = sudoku->add_subcommand("rate", "Backtracking difficulty rating");
  rate->add_option("--board", rate_args.board, "81 characters, row-major")->required();
  rate->add_option("--trials", rate_args.trials, "Randomised solver runs")->check(CLI::PositiveNumber);
  rate->add_option("--seed", rate_args.seed, "Seed");
  bind(rate, [&] { return sudoku_rate(rate_args); });

  SudokuSynthArgs synth_args;
  auto* synth = sudoku->add_subcommand("synth", "Write a synthetic puzzle CSV");
  synth->add_option("--out", synth_args.out, "CSV path")->required();
  synth->add_option("--count", synth_args.cfg.count, "Rows");
  synth->add_option("--seed", synth_args.cfg.seed, "Seed");
  synth->add_option("--min-givens", synth_args.cfg.min_givens, "Fewest givens")->check(CLI::Range(17, 80));
  synth->add_option("--max-givens", synth_args.cfg.max_givens, "Most givens")->check(CLI::Range(17, 80));
  synth->add_option("--trials", synth_args.cfg.rating_trials, "Rating runs per puzzle")->check(CLI::PositiveNumber);
  bind(synth, [&] { return sudoku_synth(ctx, synth_args); });

  SudokuBuildArgs sbuild;
  auto* sb = sudoku->add_subcommand("build", "Filter a puzzle CSV and write token shards");
  // Not checked at parse time: CLI11 validates config values of every
  // subcommand, and a preset names the CSV before synth has written it.
  sb->add_option("--csv", sbuild.csv, "Input CSV")->required();
  sb->add_option("--out", sbuild.out, "Dataset directory")->required();
  sb->add_option("--limit", sbuild.limit, "Keep at most N puzzles (0: all)");
  sb->add_option("--puzzle-column", sbuild.puzzle_col, "CSV column with the puzzle");
  sb->add_option("--solution-column", sbuild.solution_col, "CSV column with the solution");
  sb->add_option("--difficulty-column", sbuild.difficulty_col, "CSV column with the rating");
  sb->add_flag("--no-difficulty", sbuild.no_difficulty, "The CSV has no rating column");
  sb->add_flag("--verbose", sbuild.verbose, "Log every skipped row");
  add_split_options(sb, sbuild.split);
  bind(sb, [&] { return sudoku_build(ctx, sbuild); });

  auto* zebra = app.add_subcommand("zebra", "Zebra puzzle generation, solving and dataset building")->require_subcommand(1);

  ZebraGenArgs gen_args;
  auto* gen = zebra->add_subcommand("gen", "Generate puzzles with a unique solution");
  gen->add_option("--m", gen_args.m, "Entities (positions)");
  gen->add_option("--n", gen_args.n, "Attributes");
  gen->add_option("--seed", gen_args.seed, "Seed of the first puzzle; puzzle k uses seed + k");
  gen->add_option("--count", gen_args.count, "Number of puzzles")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_args.out, "Write a puzzle file instead of printing");
  bind(gen, [&] { return zebra_gen(ctx, gen_args); });

  ZebraSolveArgs zsolve_args;
  auto* zsolve = zebra->add_subcommand("solve", "Solve by clue-subset deduction and print the trace");
  zsolve->add_option("--file", zsolve_args.file, "Puzzle file")->check(CLI::ExistingFile);
  zsolve->add_option("--index", zsolve_args.index, "Puzzle within the file");
  zsolve->add_option("--puzzle", zsolve_args.puzzle, "One puzzle as a JSON line");
  bind(zsolve, [&] { return zebra_solve(zsolve_args); });

  ZebraBuildArgs zbuild;
  auto* zb = zebra->add_subcommand("build", "Generate puzzles of every size and write token shards");
  zb->add_option("--out", zbuild.out, "Dataset directory")->required();
  zb->add_option("--min-size", zbuild.min_size, "Smallest m and n")->check(CLI::Range(2, codec::kZebraMaxSize));
  zb->add_option("--max-size", zbuild.max_size, "Largest m and n")->check(CLI::Range(2, codec::kZebraMaxSize));
  zb->add_option("--per-size", zbuild.per_size, "Puzzles per (m, n)")->check(CLI::PositiveNumber);
  zb->add_flag("--verbose", zbuild.verbose, "Log progress");
  add_split_options(zb, zbuild.split);
  bind(zb, [&] { return zebra_build(ctx, zbuild); });

  std::string verify_dir;
  auto* ver = app.add_subcommand("verify", "Re-check every record of a dataset against the oracles");
  ver->add_option("--data", verify_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  bind(ver, [&] { return verify(ctx, verify_dir); });

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "Decode a test split with a model and grade it");
  add_model_options(ev, eval_args);
  ev->add_flag("--hinted", eval_args.hinted, "Also measure hinted cell accuracy (Sudoku)");
  ev->add_flag("--probe", eval_args.probe, "Also run the candidate-set probe on solved puzzles (Sudoku)");
  ev->add_option("--probe-counts", eval_args.counts, "Filled counts probed")->delimiter(',');
  bind(ev, [&] { return run_eval(ctx, eval_args, "eval"); });

  EvalArgs probe_args;
  probe_args.probe = true;
  auto* pr = app.add_subcommand("probe", "Candidate-set probe on the puzzles a model solves (Sudoku)");
  add_model_options(pr, probe_args);
  pr->add_option("--counts", probe_args.counts, "Filled counts probed")->delimiter(',');
  bind(pr, [&] { return run_eval(ctx, probe_args, "probe"); });

  ReportArgs report_args;
  auto* rp = app.add_subcommand("report", "Print an eval report and render its plots");
  rp->add_option("--in", report_args.in, "Report JSON")->required()->check(CLI::ExistingFile);
  rp->add_option("--plots", report_args.plots, "Write SVG plots into this directory");
  rp->add_option("--failures", report_args.failures, "Failure records to print");
  bind(rp, [&] { return report(report_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (config->count() > 0) ctx.config = config->as<std::string>();

  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "forge: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "forge: error: " << e.what() << '\n';
    return 1;
  }
}
