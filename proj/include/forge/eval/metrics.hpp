#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/core/command.hpp"
#include "forge/eval/decode.hpp"
#include "forge/eval/items.hpp"
#include "forge/sudoku/solver.hpp"

namespace forge::eval {

inline const std::vector<int> kProbeFilledCounts = {35, 40, 45, 50, 55, 60, 65, 70, 75};

/// Orders bucket labels numerically when they start with a number ("2.5" < "10.0").
struct LabelLess {
  bool operator()(const std::string& a, const std::string& b) const {
    char* ea = nullptr;
    char* eb = nullptr;
    const double x = std::strtod(a.c_str(), &ea);
    const double y = std::strtod(b.c_str(), &eb);
    const bool na = ea != a.c_str();
    const bool nb = eb != b.c_str();
    if (na && nb && x != y) return x < y;
    if (na != nb) return na;
    return a < b;
  }
};

struct EvalConfig {
  int beam = 1;
  bool masked = true;
  bool hinted = false;
  bool probe = false;
  std::vector<int> probe_counts = kProbeFilledCounts;
  std::size_t failure_limit = 20;
  std::size_t in_flight = 64;
};

struct BucketStat {
  std::size_t puzzles = 0;
  std::size_t solved = 0;
  double accuracy() const { return puzzles ? static_cast<double>(solved) / static_cast<double>(puzzles) : 0.0; }
};

struct HintedStat {
  std::size_t steps = 0;
  std::size_t correct = 0;
  std::size_t skipped = 0;
  double accuracy() const { return steps ? static_cast<double>(correct) / static_cast<double>(steps) : 0.0; }
};

struct ProbeStat {
  std::size_t puzzles = 0;
  std::size_t cells = 0;
  double overlap = 0.0;  // sum of per-cell overlap ratios
  double accuracy() const { return cells ? overlap / static_cast<double>(cells) : 0.0; }
};

struct CellRef {
  int row = 0;
  int col = 0;
  int value = 0;
};

/// A puzzle's first mistake, as a board and two cells.
struct FailureRecord {
  std::size_t index = 0;
  int filled = 0;
  std::string board;                     // state before the mistake, '.' for empty
  std::optional<CellRef> chosen;         // the cell the model filled wrongly; none if it stopped early
  int chosen_truth = 0;
  std::optional<CellRef> easiest;        // the solver's next fill from the same state
  std::string easiest_strategy;
  bool easiest_by_block = false;         // that fill was forced within a block
  std::string rendering;
};

struct EvalReport {
  std::string kind;
  std::string dataset;
  std::string vocab_hash;
  EvalConfig config;
  std::size_t puzzles = 0;
  std::size_t solved = 0;
  std::size_t cells = 0;
  std::size_t correct_cells = 0;
  std::size_t decode_errors = 0;
  std::size_t malformed_outputs = 0;
  std::size_t duplicate_cells = 0;
  std::size_t extraneous_cells = 0;
  std::map<std::string, BucketStat, LabelLess> per_difficulty;
  std::map<int, std::size_t> first_mistake_histogram;
  std::map<int, std::size_t> all_mistake_histogram;
  std::optional<HintedStat> hinted;
  std::optional<std::map<int, ProbeStat>> probe;
  std::vector<FailureRecord> failures;
  std::vector<std::string> errors;  // "index: message" per decode error
  CommandSpec command;

  double cell_accuracy() const { return cells ? static_cast<double>(correct_cells) / static_cast<double>(cells) : 0.0; }
  double puzzle_accuracy() const { return puzzles ? static_cast<double>(solved) / static_cast<double>(puzzles) : 0.0; }

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

namespace detail {

inline std::string board_text(const EvalItem& item, const std::vector<codec::Triplet>& extra) {
  std::vector<int> cells(item.truth.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (item.given[c]) cells[c] = item.truth[c];
  }
  for (const auto& t : extra) cells[item.cell(t.first, t.second)] = t.third;
  std::string s;
  for (int v : cells) s.push_back(v ? static_cast<char>('0' + v) : '.');
  return s;
}

inline FailureRecord capture_failure(const EvalItem& item, const PuzzleResult& r) {
  FailureRecord f;
  f.index = item.index;
  f.filled = r.mistakes.front();
  f.board = board_text(item, r.accepted_before_first);
  int mark_a = -1;
  if (r.first_wrong) {
    f.chosen = CellRef{r.first_wrong->first, r.first_wrong->second, r.first_wrong->third};
    f.chosen_truth = item.truth[item.cell(r.first_wrong->first, r.first_wrong->second)];
    mark_a = static_cast<int>(item.cell(r.first_wrong->first, r.first_wrong->second));
  }
  if (item.kind != codec::PuzzleKind::Sudoku) {
    f.rendering = "state " + f.board + "\n";
    return f;
  }
  const auto board = sudoku::parse_board(f.board);
  int mark_b = -1;
  if (const auto step = sudoku::next_easiest_step(board)) {
    f.easiest = CellRef{step->row, step->col, step->value};
    f.easiest_strategy = std::string(sudoku::strategy_name(step->strategy));
    f.easiest_by_block = step->unit && step->unit->kind == sudoku::UnitKind::Block;
    mark_b = sudoku::cell_index(step->row, step->col);
  }
  f.rendering = sudoku::render_board(board, mark_a, '[', ']', mark_b, '<', '>');
  return f;
}

}  // namespace detail

/// Teacher-forced value prediction along the solver's path. At each state the
/// solver names its next cell; the model sees (r, c) and its most likely
/// digit is graded; then the true value is placed. Sudoku only.
inline HintedStat hinted_cell_accuracy(ModelClient& client, const std::vector<EvalItem>& items) {
  struct Walk {
    const EvalItem* item;
    sudoku::Board board;
    Prefix prefix;
    std::optional<sudoku::TraceStep> next;
  };
  HintedStat stat;
  std::vector<Walk> walks;
  for (const auto& item : items) {
    if (item.kind != codec::PuzzleKind::Sudoku) throw std::invalid_argument("hinted accuracy is defined for Sudoku");
    walks.push_back({&item, item.puzzle, item.prompt, std::nullopt});
  }
  const auto advance = [&](Walk& w) {
    w.next = sudoku::next_easiest_step(w.board);
    if (!w.next && !w.board.complete()) {
      stat.skipped += static_cast<std::size_t>(sudoku::kCells - w.board.filled_count());
    }
  };
  for (auto& w : walks) advance(w);
  for (;;) {
    std::vector<Walk*> active;
    std::vector<Prefix> batch;
    for (auto& w : walks) {
      if (!w.next) continue;
      active.push_back(&w);
      Prefix q = w.prefix;
      q.push_back(codec::digit_token(w.next->row));
      q.push_back(codec::digit_token(w.next->col));
      batch.push_back(std::move(q));
    }
    if (active.empty()) break;
    const auto rows = request_logits(client, batch);
    for (std::size_t k = 0; k < active.size(); ++k) {
      Walk& w = *active[k];
      int best = 1;
      for (int d = 2; d <= 9; ++d) {
        if (rows[k][codec::digit_token(d)] > rows[k][codec::digit_token(best)]) best = d;
      }
      const int i = sudoku::cell_index(w.next->row, w.next->col);
      const int truth = w.item->truth[static_cast<std::size_t>(i)];
      ++stat.steps;
      stat.correct += best == truth;
      codec::append_triplet(w.prefix, w.next->row, w.next->col, truth);
      w.board.set(i, truth);
      advance(w);
    }
  }
  return stat;
}

/// The k = |f*| digits with the largest logits, ties to the smaller digit.
inline sudoku::DigitSet top_values(const Logits& row, int k) {
  std::vector<int> order{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return row[codec::digit_token(a)] > row[codec::digit_token(b)]; });
  sudoku::DigitSet out;
  for (int i = 0; i < k && i < 9; ++i) out.insert(order[static_cast<std::size_t>(i)]);
  return out;
}

/// Candidate-set probe. For each puzzle and each filled count n, rebuilds the
/// solver state after n - givens trace fills and asks the model about every
/// empty cell: the share of the solver's candidates among the model's top
/// |f*| values, averaged over cells. Sudoku only.
inline std::map<int, ProbeStat> probe_candidate_sets(ModelClient& client, const std::vector<const EvalItem*>& items,
                                                     const std::vector<int>& counts = kProbeFilledCounts) {
  std::map<int, ProbeStat> out;
  for (int n : counts) out[n];
  for (const EvalItem* item : items) {
    if (item->kind != codec::PuzzleKind::Sudoku) throw std::invalid_argument("the probe is defined for Sudoku");
    auto outcome = sudoku::solve_with_trace(item->puzzle);
    if (!std::holds_alternative<sudoku::ReasoningTrace>(outcome)) continue;
    const auto& steps = std::get<sudoku::ReasoningTrace>(outcome).steps;
    for (int n : counts) {
      const int j = n - item->givens;
      if (j < 0 || j >= static_cast<int>(steps.size())) continue;
      const auto state = sudoku::solver_state_at(item->puzzle, j);
      Prefix base = item->prompt;
      for (int s = 0; s < j; ++s) codec::append_triplet(base, steps[s].row, steps[s].col, steps[s].value);
      std::vector<Prefix> batch;
      std::vector<sudoku::DigitSet> truth;
      for (int i = 0; i < sudoku::kCells; ++i) {
        if (!state.board().empty_at(i)) continue;
        Prefix q = base;
        q.push_back(codec::digit_token(sudoku::row_of(i)));
        q.push_back(codec::digit_token(sudoku::col_of(i)));
        batch.push_back(std::move(q));
        truth.push_back(state.grid().at(i));
      }
      const auto rows = request_logits(client, batch);
      auto& stat = out[n];
      ++stat.puzzles;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const int size = truth[k].size();
        if (size == 0) continue;
        stat.overlap += static_cast<double>((truth[k] & top_values(rows[k], size)).size()) / size;
        ++stat.cells;
      }
    }
  }
  return out;
}

/// Decodes every item, grades it and fills a report. Decode errors are
/// recorded against their puzzle; they never stop the run.
inline EvalReport evaluate_model(ModelClient& client, const EvalData& data, const EvalConfig& cfg) {
  if (client.vocab_hash() != data.vocab_hash || client.vocab_size() != data.vocab_size) {
    throw ConsistencyError("model vocabulary (" + client.vocab_hash() + ") does not match the dataset (" +
                           data.vocab_hash + ")");
  }
  EvalReport rep;
  rep.kind = std::string(codec::kind_name(data.kind));
  rep.dataset = data.source;
  rep.vocab_hash = data.vocab_hash;
  rep.config = cfg;

  std::vector<BeamSearch> searches;
  searches.reserve(data.items.size());
  for (const auto& item : data.items) {
    SlotGrammar g{item.kind, item.m, item.n, item.empties, cfg.masked, data.vocab_size};
    searches.emplace_back(item.prompt, BeamOptions{cfg.beam, codec::kEos, g.max_new_tokens()}, g.fn());
  }
  run_searches(client, searches, cfg.in_flight);

  std::vector<const EvalItem*> solved_items;
  for (std::size_t k = 0; k < data.items.size(); ++k) {
    const auto& item = data.items[k];
    const auto& search = searches[k];
    PuzzleResult r = search.failed() ? grade(item, {}) : grade(item, search.generated());
    if (search.failed()) {
      ++rep.decode_errors;
      rep.errors.push_back(std::to_string(item.index) + ": " + *search.error());
    }
    ++rep.puzzles;
    rep.cells += static_cast<std::size_t>(item.empties);
    rep.correct_cells += static_cast<std::size_t>(r.correct);
    rep.malformed_outputs += r.malformed || r.duplicates > 0 || r.extraneous > 0 || !r.terminated;
    rep.duplicate_cells += static_cast<std::size_t>(r.duplicates);
    rep.extraneous_cells += static_cast<std::size_t>(r.extraneous);
    auto& bucket = rep.per_difficulty[item.bucket];
    ++bucket.puzzles;
    if (r.solved) {
      ++rep.solved;
      ++bucket.solved;
      solved_items.push_back(&item);
      continue;
    }
    ++rep.first_mistake_histogram[r.mistakes.front()];
    for (int f : r.mistakes) ++rep.all_mistake_histogram[f];
    if (rep.failures.size() < cfg.failure_limit) rep.failures.push_back(detail::capture_failure(item, r));
  }
  if (data.kind == codec::PuzzleKind::Sudoku) {
    if (cfg.hinted) rep.hinted = hinted_cell_accuracy(client, data.items);
    if (cfg.probe) rep.probe = probe_candidate_sets(client, solved_items, cfg.probe_counts);
  }
  return rep;
}

/// The first `limit` failure records as text.
inline std::string dump_failures(const EvalReport& rep, std::size_t limit) {
  std::ostringstream out;
  for (std::size_t k = 0; k < rep.failures.size() && k < limit; ++k) {
    const auto& f = rep.failures[k];
    out << "puzzle " << f.index << ": first mistake with " << f.filled << " cells filled\n";
    if (f.chosen) {
      out << "  model filled r" << f.chosen->row << "c" << f.chosen->col << "=" << f.chosen->value << " [marked []], truth "
          << f.chosen_truth << "\n";
    } else {
      out << "  model stopped before filling every cell\n";
    }
    if (f.easiest) {
      out << "  solver would fill r" << f.easiest->row << "c" << f.easiest->col << "=" << f.easiest->value << " by "
          << f.easiest_strategy << " [marked <>]" << (f.easiest_by_block ? ", forced by its block" : "") << "\n";
    }
    out << f.rendering << "\n";
  }
  return out.str();
}

inline nlohmann::ordered_json EvalReport::to_json() const {
  using J = nlohmann::ordered_json;
  J j;
  j["format"] = "forge-eval-report";
  j["version"] = 1;
  j["tool"] = tool_json();
  j["command"] = command.to_json();
  j["kind"] = kind;
  j["dataset"] = dataset;
  j["vocab_hash"] = vocab_hash;
  j["decode"] = {{"beam", config.beam},
                 {"slot_masking", config.masked},
                 {"greedy_ties", "lowest token id"},
                 {"grading", "by cell coordinates, first occurrence wins"}};
  j["puzzles"] = puzzles;
  j["solved"] = solved;
  j["cells"] = cells;
  j["correct_cells"] = correct_cells;
  j["cell_accuracy"] = cell_accuracy();
  j["puzzle_accuracy"] = puzzle_accuracy();
  j["decode_errors"] = decode_errors;
  j["malformed_outputs"] = malformed_outputs;
  j["duplicate_cells"] = duplicate_cells;
  j["extraneous_cells"] = extraneous_cells;
  J buckets = J::object();
  for (const auto& [label, b] : per_difficulty) {
    buckets[label] = {{"puzzles", b.puzzles}, {"solved", b.solved}, {"puzzle_accuracy", b.accuracy()}};
  }
  j["per_difficulty"] = buckets;
  const auto hist = [](const std::map<int, std::size_t>& h) {
    J out = J::object();
    for (const auto& [k, v] : h) out[std::to_string(k)] = v;
    return out;
  };
  j["first_mistake_histogram"] = hist(first_mistake_histogram);
  j["all_mistake_histogram"] = hist(all_mistake_histogram);
  if (hinted) {
    j["hinted"] = {{"accuracy", hinted->accuracy()},
                   {"steps", hinted->steps},
                   {"correct", hinted->correct},
                   {"skipped", hinted->skipped},
                   {"prefixes", "ground truth along the solver's path"}};
  } else {
    j["hinted"] = nullptr;
  }
  if (probe) {
    J p = J::object();
    for (const auto& [n, s] : *probe) {
      p[std::to_string(n)] = {{"puzzles", s.puzzles}, {"cells", s.cells}, {"accuracy", s.accuracy()}, {"overlap", s.overlap}};
    }
    j["probe"] = {{"tie_break", "ascending value"}, {"by_filled", p}};
  } else {
    j["probe"] = nullptr;
  }
  J fails = J::array();
  for (const auto& f : failures) {
    J x;
    x["index"] = f.index;
    x["filled"] = f.filled;
    x["board"] = f.board;
    x["chosen"] = f.chosen ? J{{"row", f.chosen->row}, {"col", f.chosen->col}, {"value", f.chosen->value},
                               {"truth", f.chosen_truth}}
                           : J(nullptr);
    x["easiest"] = f.easiest ? J{{"row", f.easiest->row}, {"col", f.easiest->col}, {"value", f.easiest->value},
                                 {"strategy", f.easiest_strategy}}
                             : J(nullptr);
    x["easiest_by_block"] = f.easiest_by_block;
    x["rendering"] = f.rendering;
    fails.push_back(std::move(x));
  }
  j["failures"] = fails;
  j["errors"] = errors;
  return j;
}

inline EvalReport EvalReport::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "forge-eval-report") throw FormatError("not an eval report");
    EvalReport r;
    r.kind = j.at("kind").get<std::string>();
    r.dataset = j.value("dataset", "");
    r.vocab_hash = j.value("vocab_hash", "");
    r.config.beam = j.at("decode").at("beam").get<int>();
    r.config.masked = j.at("decode").at("slot_masking").get<bool>();
    r.puzzles = j.at("puzzles").get<std::size_t>();
    r.solved = j.at("solved").get<std::size_t>();
    r.cells = j.at("cells").get<std::size_t>();
    r.correct_cells = j.at("correct_cells").get<std::size_t>();
    r.decode_errors = j.value("decode_errors", std::size_t{0});
    r.malformed_outputs = j.value("malformed_outputs", std::size_t{0});
    r.duplicate_cells = j.value("duplicate_cells", std::size_t{0});
    r.extraneous_cells = j.value("extraneous_cells", std::size_t{0});
    for (const auto& [label, b] : j.at("per_difficulty").items()) {
      r.per_difficulty[label] = {b.at("puzzles").get<std::size_t>(), b.at("solved").get<std::size_t>()};
    }
    for (const auto& [k, v] : j.at("first_mistake_histogram").items()) r.first_mistake_histogram[std::stoi(k)] = v;
    for (const auto& [k, v] : j.at("all_mistake_histogram").items()) r.all_mistake_histogram[std::stoi(k)] = v;
    if (j.contains("hinted") && j["hinted"].is_object()) {
      const auto& h = j["hinted"];
      r.hinted = HintedStat{h.at("steps").get<std::size_t>(), h.at("correct").get<std::size_t>(),
                            h.at("skipped").get<std::size_t>()};
    }
    if (j.contains("probe") && j["probe"].is_object()) {
      std::map<int, ProbeStat> p;
      for (const auto& [k, v] : j["probe"].at("by_filled").items()) {
        p[std::stoi(k)] = {v.at("puzzles").get<std::size_t>(), v.at("cells").get<std::size_t>(),
                           v.at("overlap").get<double>()};
      }
      r.probe = std::move(p);
    }
    for (const auto& x : j.value("failures", nlohmann::json::array())) {
      FailureRecord f;
      f.index = x.at("index").get<std::size_t>();
      f.filled = x.at("filled").get<int>();
      f.board = x.at("board").get<std::string>();
      if (x.at("chosen").is_object()) {
        f.chosen = CellRef{x["chosen"]["row"], x["chosen"]["col"], x["chosen"]["value"]};
        f.chosen_truth = x["chosen"]["truth"];
      }
      if (x.at("easiest").is_object()) {
        f.easiest = CellRef{x["easiest"]["row"], x["easiest"]["col"], x["easiest"]["value"]};
        f.easiest_strategy = x["easiest"]["strategy"];
      }
      f.easiest_by_block = x.value("easiest_by_block", false);
      f.rendering = x.value("rendering", "");
      r.failures.push_back(std::move(f));
    }
    if (j.contains("errors")) r.errors = j["errors"].get<std::vector<std::string>>();
    if (j.contains("command")) r.command = CommandSpec::from_json(j["command"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad eval report: ") + e.what());
  }
}

}  // namespace forge::eval
