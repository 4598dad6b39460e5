// Acceptance run: one PASS/FAIL line per primary criterion, exit status 1 if
// any criterion fails. Sizes are the desk-scale ones; nothing is sampled down.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "eval_fixtures.hpp"
#include "forge/codec/sequence.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/eval/mocks.hpp"
#include "forge/pipeline/dataset.hpp"
#include "forge/pipeline/synth.hpp"
#include "forge/sudoku/generator.hpp"
#include "forge/zebra/generator.hpp"
#include "oracles.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  pipeline::SynthConfig sc;
  sc.count = 1300;
  sc.seed = 2024;
  sc.rating_trials = 1;
  sc.jobs = default_jobs();
  std::istringstream csv(pipeline::synthetic_csv(sc));
  pipeline::IngestOptions io;
  io.jobs = default_jobs();
  io.limit = 1000;
  // Ingest only supplies the strategy-solvable puzzles; both solvers run again below.
  const auto in = pipeline::ingest_and_filter(csv, io);
  if (in.records.size() < 1000) return {false, fmt("only %zu strategy-solvable puzzles", in.records.size())};

  const auto t0 = Clock::now();
  std::size_t agree = 0;
  for (const auto& r : in.records) {
    const auto outcome = sudoku::solve_with_trace(r.puzzle);
    const auto bf = sudoku::brute_force_solve(r.puzzle, 2);
    if (const auto* t = std::get_if<sudoku::ReasoningTrace>(&outcome); t && bf.count == 1 &&
                                                                       t->final_board().same_values(*bf.first)) {
      ++agree;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = agree == in.records.size() && secs < 60.0;
  return {ok, fmt("%zu/%zu puzzles agree, %.2f s (limit 60 s)", agree, in.records.size(), secs)};
}

// ---------------------------------------------------------------------------

Outcome candidate_soundness() {
  constexpr std::size_t kApplications = 10000;
  Rng rng(77);
  std::size_t applications = 0, draws = 0, unsound = 0, fills = 0, eliminations = 0;
  std::uint64_t puzzle_seed = 5000;
  while (applications < kApplications) {
    const auto g = sudoku::generate_sudoku(puzzle_seed++, rng.between(22, 36));
    const int empties = sudoku::kCells - g.puzzle.filled_count();
    for (int draw = 0; draw < 40 && applications < kApplications; ++draw) {
      ++draws;
      sudoku::Board board;
      sudoku::CandidateGrid grid;
      if (draw % 2 == 0) {
        // A state on the solver's own path, with its accumulated eliminations.
        const auto s = sudoku::solver_state_at(g.puzzle, static_cast<int>(rng.below(static_cast<std::uint64_t>(empties))));
        board = s.board();
        grid = s.grid();
      } else {
        // Givens plus a random subset of the true values, naive candidates.
        board = g.puzzle;
        for (int i = 0; i < sudoku::kCells; ++i) {
          if (board.empty_at(i) && rng.below(3) == 0) board.set(i, g.solution.at(i));
        }
        grid = sudoku::compute_candidates(board);
      }
      const auto strategy = sudoku::kStrategyOrder[rng.below(sudoku::kStrategyOrder.size())];
      const auto d = sudoku::apply_strategy(board, grid, strategy);
      if (!d) continue;
      ++applications;
      if (d->is_fill()) {
        ++fills;
        if (g.solution.at(d->fill().row, d->fill().col) != d->fill().value) ++unsound;
      } else {
        for (const auto& e : d->removed()) {
          ++eliminations;
          if (g.solution.at(e.row, e.col) == e.value) ++unsound;
        }
      }
    }
  }
  return {unsound == 0, fmt("%zu applications (%zu draws, %zu puzzles): %zu fills, %zu eliminations, %zu unsound",
                            applications, draws, static_cast<std::size_t>(puzzle_seed - 5000), fills, eliminations,
                            unsound)};
}

// ---------------------------------------------------------------------------

Outcome zebra_generation() {
  std::size_t total = 0, good = 0;
  const auto t0 = Clock::now();
  for (int m = 3; m <= 4; ++m) {
    for (int n = 3; n <= 4; ++n) {
      const auto results = parallel_map(125, default_jobs(), [&](std::size_t k) {
        const auto pz = zebra::generate_puzzle(m, n, 90000 + static_cast<std::uint64_t>(m * 1000 + n * 200) + k);
        const auto bf = zebra::brute_force_zebra(pz);
        const auto models = oracle::zebra_models(m, n, pz.clues);
        const auto outcome = zebra::solve_zebra(pz);
        const auto* solved = std::get_if<zebra::ZebraSolved>(&outcome);
        return bf.count == 1 && models.size() == 1 && models.front() == pz.solution && solved &&
               solved->assignment == pz.solution;
      });
      total += results.size();
      good += static_cast<std::size_t>(std::count(results.begin(), results.end(), true));
    }
  }
  return {good == total && total == 500,
          fmt("%zu/%zu puzzles over 3x3..4x4 unique (library and reference enumeration) and solved, %.1f s", good, total,
              seconds_since(t0))};
}

// ---------------------------------------------------------------------------

Outcome three_friends() {
  const auto clues = oracle::three_friends_clues();
  const auto models = oracle::zebra_models(3, 3, clues);
  const auto everything = oracle::zebra_models(3, 3, {});
  zebra::Assignment expected(3, 3);
  const int table[3][3] = {{2, 2, 2}, {1, 3, 1}, {3, 1, 3}};
  for (int p = 1; p <= 3; ++p) {
    for (int a = 1; a <= 3; ++a) expected.set(p, a, table[p - 1][a - 1]);
  }
  if (everything.size() != 216 || models.size() != 1 || models.front() != expected) {
    return {false, fmt("reference enumeration: %zu assignments, %zu models", everything.size(), models.size())};
  }
  const auto outcome = zebra::solve_zebra(3, 3, clues);
  const auto* solved = std::get_if<zebra::ZebraSolved>(&outcome);
  if (!solved) return {false, "solver is stuck"};
  static const char* names[] = {"", "Ali", "Rose", "Randy"};
  static const char* colors[] = {"", "gold", "silver", "indigo"};
  static const char* drinks[] = {"", "orange-juice", "beer", "coffee"};
  std::string shown;
  for (int p = 1; p <= 3; ++p) {
    shown += fmt("%spos%d %s/%s/%s", p > 1 ? ", " : "", p, names[solved->assignment.value(p, 1)],
                 colors[solved->assignment.value(p, 2)], drinks[solved->assignment.value(p, 3)]);
  }
  return {solved->assignment == expected, shown + " (1 of 216 assignments)"};
}

// ---------------------------------------------------------------------------

Outcome metric_harness() {
  std::vector<std::string> problems;
  eval::EvalConfig cfg;
  cfg.hinted = true;
  cfg.probe = true;

  const auto sudoku = fixtures::as_data(fixtures::sudoku_items(40, 4100, 32));
  eval::SolverMockClient smock(sudoku.items);
  std::size_t probed_counts = 0;
  for (int beam : {1, 5}) {
    cfg.beam = beam;
    const auto rep = eval::evaluate_model(smock, sudoku, cfg);
    if (rep.cell_accuracy() != 1.0 || rep.puzzle_accuracy() != 1.0) problems.push_back(fmt("beam %d accuracy", beam));
    if (!rep.hinted || rep.hinted->accuracy() != 1.0) problems.push_back(fmt("beam %d hinted", beam));
    probed_counts = 0;
    for (int n : eval::kProbeFilledCounts) {
      const bool perfect = rep.probe && rep.probe->count(n) && rep.probe->at(n).cells > 0 &&
                           rep.probe->at(n).accuracy() == 1.0;
      if (!perfect) {
        problems.push_back(fmt("probe at n=%d", n));
      } else {
        ++probed_counts;
      }
    }
  }

  const auto zebra = fixtures::as_data(fixtures::zebra_items(30, 800, 4, 4));
  eval::SolverMockClient zmock(zebra.items);
  cfg.probe = false;
  cfg.hinted = false;
  cfg.beam = 3;
  const auto zrep = eval::evaluate_model(zmock, zebra, cfg);
  if (zrep.cell_accuracy() != 1.0 || zrep.puzzle_accuracy() != 1.0) problems.push_back("zebra accuracy");

  // Ten puzzles with the same number of empties; one wrong value in one of them.
  const auto ten = fixtures::as_data(fixtures::sudoku_items(10, 4300, 30));
  const int e = ten.items.front().empties;
  eval::OneErrorMockClient one(ten.items, 6, 17);
  cfg.beam = 1;
  const auto orep = eval::evaluate_model(one, ten, cfg);
  const double want_cell = static_cast<double>(10 * e - 1) / static_cast<double>(10 * e);
  const double want_puzzle = 9.0 / 10.0;
  if (orep.cell_accuracy() != want_cell) problems.push_back(fmt("one-error cell %.17g", orep.cell_accuracy()));
  if (orep.puzzle_accuracy() != want_puzzle) problems.push_back(fmt("one-error puzzle %.17g", orep.puzzle_accuracy()));

  std::string detail = fmt("solver mock 100%% cell/puzzle/hinted at beam 1 and 5, probe 100%% at %zu/%zu counts; "
                           "one-error cell %.10f (want %.10f = 1-1/%d), puzzle %.2f (want 0.90)",
                           probed_counts, eval::kProbeFilledCounts.size(), orep.cell_accuracy(), want_cell, 10 * e,
                           orep.puzzle_accuracy());
  for (const auto& p : problems) detail += "; wrong: " + p;
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------------------

Outcome beam_correctness() {
  using eval::Token;
  const codec::Vocabulary vocab(codec::PuzzleKind::Sudoku);
  const int size = vocab.size();
  // Coarse hashed logits: plenty of exact ties.
  eval::FunctionClient stub(
      size, vocab.hash(),
      [size](std::span<const Token> p) {
        std::uint64_t h = fnv1a64(std::string_view(reinterpret_cast<const char*>(p.data()), p.size_bytes()));
        eval::Logits row(static_cast<std::size_t>(size));
        for (auto& x : row) {
          h = splitmix64(h);
          x = static_cast<double>(h % 4) * 0.5;
        }
        return row;
      },
      64);
  const auto items = fixtures::sudoku_items(100, 6100);
  std::size_t identical = 0;
  for (bool masked : {true, false}) {
    std::vector<eval::BeamSearch> searches;
    for (const auto& it : items) {
      const eval::SlotGrammar g{it.kind, it.m, it.n, it.empties, masked, size};
      searches.emplace_back(it.prompt, eval::BeamOptions{1, codec::kEos, g.max_new_tokens()}, g.fn());
    }
    eval::run_searches(stub, searches, 16);
    for (std::size_t k = 0; k < items.size(); ++k) {
      const eval::SlotGrammar g{items[k].kind, items[k].m, items[k].n, items[k].empties, masked, size};
      if (searches[k].generated() == eval::greedy_decode(stub, items[k].prompt, g.fn(), codec::kEos, g.max_new_tokens())) {
        ++identical;
      }
    }
  }

  // Toy model over END, BOS, A, B: greedy takes A (0.6) then ends at total
  // probability e^-3; B (0.3) ends at e^-2.
  constexpr Token kEnd = 0, kA = 2, kB = 3;
  const auto end_row = [](double log_p_end) {
    const double rest = std::log((1.0 - std::exp(log_p_end)) / 2.0);
    return eval::Logits{log_p_end, -1000.0, rest, rest};
  };
  std::map<eval::Prefix, eval::Logits> table;
  table[{1}] = {std::log(0.1), -1000.0, std::log(0.6), std::log(0.3)};
  table[{1, kA}] = end_row(-3.0 - std::log(0.6));
  table[{1, kB}] = end_row(-2.0 - std::log(0.3));
  eval::TableClient toy(4, table);
  const auto allowed = [](std::span<const Token> gen) {
    return gen.empty() ? std::vector<Token>{kEnd, kA, kB} : std::vector<Token>{kEnd};
  };
  std::vector<eval::BeamSearch> toys;
  toys.emplace_back(eval::Prefix{1}, eval::BeamOptions{1, kEnd, 4}, allowed);
  toys.emplace_back(eval::Prefix{1}, eval::BeamOptions{2, kEnd, 4}, allowed);
  eval::run_searches(toy, toys);
  const bool w1 = toys[0].generated() == std::vector<Token>{kA, kEnd};
  const bool w2 = toys[1].generated() == std::vector<Token>{kB, kEnd} && std::abs(toys[1].best().score + 2.0) < 1e-12;

  return {identical == 2 * items.size() && w1 && w2,
          fmt("width 1 == greedy on %zu/%zu decodes (100 puzzles, masked and unmasked); toy runner-up: width 1 %s, "
              "width 2 %s",
              identical, 2 * items.size(), w1 ? "keeps greedy A END" : "WRONG", w2 ? "recovers B END" : "WRONG")};
}

// ---------------------------------------------------------------------------

Outcome codec_round_trip() {
  constexpr std::size_t kPuzzles = 10000;
  constexpr std::array<codec::Ordering, 3> orderings = {codec::Ordering::Fixed, codec::Ordering::Random,
                                                        codec::Ordering::SolverDecomposed};
  const auto t0 = Clock::now();
  pipeline::SynthConfig sc;
  sc.count = 12500;
  sc.seed = 31337;
  sc.rating_trials = 1;
  sc.jobs = default_jobs();
  std::istringstream csv(pipeline::synthetic_csv(sc));
  pipeline::IngestOptions io;
  io.jobs = default_jobs();
  io.limit = kPuzzles;
  const auto in = pipeline::ingest_and_filter(csv, io);
  if (in.records.size() < kPuzzles) return {false, fmt("only %zu strategy-solvable puzzles", in.records.size())};

  const auto ok = parallel_map(in.records.size(), default_jobs(), [&](std::size_t i) {
    const auto& r = in.records[i];
    std::vector<codec::Triplet> reference;
    for (auto o : orderings) {
      const auto seq = codec::encode_sudoku(r.puzzle, r.trace, o, i);
      const auto d = codec::decode_sequence(seq, codec::PuzzleKind::Sudoku);
      if (!d.terminated || d.malformed || codec::givens_board(d) != r.puzzle) return false;
      if (!codec::completed_board(d).same_values(r.solution)) return false;
      auto sorted = d.predictions;
      std::sort(sorted.begin(), sorted.end());
      if (reference.empty()) reference = sorted;
      if (sorted != reference) return false;
    }
    return true;
  });
  const auto sudoku_ok = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true));

  // Zebra over every size the vocabulary covers.
  std::size_t zebra_total = 0, zebra_ok = 0;
  for (int m = 2; m <= 6; ++m) {
    for (int n = 2; n <= 6; ++n) {
      const auto res = parallel_map(20, default_jobs(), [&](std::size_t k) {
        const auto pz = zebra::generate_puzzle(m, n, 700000 + static_cast<std::uint64_t>(m * 100 + n) * 1000 + k);
        const auto trace = std::get<zebra::ZebraSolved>(zebra::solve_zebra(pz)).trace;
        for (auto o : orderings) {
          const auto d = codec::decode_sequence(codec::encode_zebra(pz, trace, o, k), codec::PuzzleKind::Zebra);
          if (!d.terminated || d.malformed || codec::zebra_from_decoded(d) != pz) return false;
        }
        return true;
      });
      zebra_total += res.size();
      zebra_ok += static_cast<std::size_t>(std::count(res.begin(), res.end(), true));
    }
  }
  return {sudoku_ok == kPuzzles && zebra_ok == zebra_total,
          fmt("%zu/%zu Sudoku and %zu/%zu Zebra (2x2..6x6) puzzles round-trip under fixed, random and solver order, "
              "%.1f s",
              sudoku_ok, kPuzzles, zebra_ok, zebra_total, seconds_since(t0))};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> files_of(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = pipeline::read_text_file(e.path());
  }
  return out;
}

Outcome pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / "forge_acceptance_pipeline";
  fs::remove_all(root);
  fs::create_directories(root);
  pipeline::SynthConfig sc;
  sc.count = 12500;
  sc.seed = 1;
  sc.jobs = default_jobs();
  const auto csv = (root / "puzzles.csv").string();
  const auto ts = Clock::now();
  pipeline::write_synthetic_csv(csv, sc);
  const double synth_secs = seconds_since(ts);

  const auto t0 = Clock::now();
  std::size_t sudoku_records = 0, zebra_records = 0;
  for (const char* run : {"a", "b"}) {
    pipeline::SudokuBuildConfig s;
    s.csv = csv;
    s.ingest.limit = 10000;
    s.common.ordering = codec::Ordering::SolverDecomposed;
    s.common.split.seed = 9;
    s.common.jobs = default_jobs();
    const auto ms = pipeline::build_sudoku_dataset(root / run / "sudoku", s);
    sudoku_records = ms["counts"]["train"].get<std::size_t>() + ms["counts"]["test"].get<std::size_t>();

    pipeline::ZebraBuildConfig z;
    z.min_size = 3;
    z.max_size = 4;
    z.per_size = 500;
    z.common.ordering = codec::Ordering::SolverDecomposed;
    z.common.split.seed = 9;
    z.common.jobs = default_jobs();
    const auto mz = pipeline::build_zebra_dataset(root / run / "zebra", z);
    zebra_records = mz["counts"]["train"].get<std::size_t>() + mz["counts"]["test"].get<std::size_t>();
  }
  const double secs = seconds_since(t0);
  const auto a = files_of(root / "a");
  const auto b = files_of(root / "b");
  std::size_t bytes = 0;
  for (const auto& [name, content] : a) bytes += content.size();
  const bool same = a == b;
  const auto va = pipeline::verify_dataset(root / "a" / "sudoku", default_jobs());
  const auto vz = pipeline::verify_dataset(root / "a" / "zebra", default_jobs());
  fs::remove_all(root);
  const bool ok = same && sudoku_records == 10000 && zebra_records == 2000 && va.ok() && vz.ok() && secs < 300.0;
  return {ok, fmt("two builds of %zu Sudoku + %zu Zebra records: %zu files, %zu bytes, %s; verify %s; %.1f s for both "
                  "builds (limit 300 s), CSV synthesis %.1f s",
                  sudoku_records, zebra_records, a.size(), bytes, same ? "byte-identical" : "DIFFERENT",
                  va.ok() && vz.ok() ? "ok" : "failed", secs, synth_secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle-equivalence", oracle_equivalence},   {"candidate-soundness", candidate_soundness},
      {"zebra-generation", zebra_generation},       {"three-friends-regression", three_friends},
      {"metric-harness", metric_harness},           {"beam-correctness", beam_correctness},
      {"codec-round-trip", codec_round_trip},       {"pipeline-determinism", pipeline_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt(" [%.1f s]", seconds_since(t0))
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria met"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
