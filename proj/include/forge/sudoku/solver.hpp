#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/sudoku/strategies.hpp"

namespace forge::sudoku {

/// One fill event of a trace.
struct TraceStep {
  int row = 0;
  int col = 0;
  int value = 0;
  Strategy strategy = Strategy::LoneSingle;
  std::optional<Unit> unit;

  CellValue cell_value() const { return {row, col, value}; }
  bool operator==(const TraceStep&) const = default;
};

/// Fill events in the order the strategy solver produced them.
struct ReasoningTrace {
  Board initial;
  std::vector<TraceStep> steps;

  Board final_board() const {
    Board b = initial;
    for (const auto& s : steps) b.set(cell_index(s.row, s.col), s.value);
    return b;
  }
};

/// Where the strategy solver stopped making progress.
struct StuckState {
  Board board;
  CandidateGrid grid;
  std::vector<TraceStep> partial;
};

using SolveOutcome = std::variant<ReasoningTrace, StuckState>;

/// Incremental easy-first solver. Candidate eliminations persist across steps,
/// so the grid can be strictly smaller than compute_candidates(board).
class StrategySolver {
 public:
  explicit StrategySolver(const Board& start) : board_(start), grid_(compute_candidates(start)) {}

  const Board& board() const { return board_; }
  const CandidateGrid& grid() const { return grid_; }

  /// The next deduction: the easiest strategy that applies, or nullopt when stuck.
  std::optional<Deduction> next() const {
    if (has_dead_cell()) return std::nullopt;
    for (Strategy s : kStrategyOrder) {
      if (auto d = apply_strategy(board_, grid_, s)) return d;
    }
    return std::nullopt;
  }

  void apply(const Deduction& d) { apply_deduction(board_, grid_, d); }

  /// Advances through eliminations up to and including the next fill. Returns
  /// that fill, or nullopt when complete or stuck.
  std::optional<TraceStep> advance_to_fill() {
    while (!board_.complete()) {
      auto d = next();
      if (!d) return std::nullopt;
      apply(*d);
      if (d->is_fill()) {
        const auto& f = d->fill();
        return TraceStep{f.row, f.col, f.value, d->strategy, d->unit};
      }
    }
    return std::nullopt;
  }

  /// Applies eliminations until the next deduction would be a fill (or the
  /// solver is complete or stuck). Leaves the grid at its most refined state
  /// for the current filled count.
  void settle() {
    while (!board_.complete()) {
      auto d = next();
      if (!d || d->is_fill()) return;
      apply(*d);
    }
  }

 private:
  bool has_dead_cell() const {
    for (int i = 0; i < kCells; ++i) {
      if (board_.empty_at(i) && grid_.at(i).empty()) return true;
    }
    return false;
  }

  Board board_;
  CandidateGrid grid_;
};

/// Runs the easy-first loop to completion. After every deduction the search
/// restarts from the easiest strategy; fills are recorded in order.
inline SolveOutcome solve_with_trace(const Board& board) {
  if (!board.valid()) throw ValidityError("board has a duplicate value in a row, column or block");
  StrategySolver solver(board);
  ReasoningTrace trace{board, {}};
  while (!solver.board().complete()) {
    auto step = solver.advance_to_fill();
    if (!step) return StuckState{solver.board(), solver.grid(), std::move(trace.steps)};
    trace.steps.push_back(*step);
  }
  return trace;
}

/// The first fill the trace solver would make from `board`, or nullopt when
/// the board is complete or stuck.
inline std::optional<TraceStep> next_easiest_step(const Board& board) {
  if (!board.valid()) return std::nullopt;
  StrategySolver solver(board);
  return solver.advance_to_fill();
}

/// The solver state when exactly `fills` trace steps have been placed, after
/// all further eliminations that precede the next fill.
inline StrategySolver solver_state_at(const Board& start, int fills) {
  StrategySolver solver(start);
  for (int k = 0; k < fills; ++k) {
    if (!solver.advance_to_fill()) break;
  }
  solver.settle();
  return solver;
}

/// Debug text form: one "r c v strategy" line per step.
inline std::string format_trace(const ReasoningTrace& trace) {
  std::ostringstream out;
  for (const auto& s : trace.steps) {
    out << s.row << ' ' << s.col << ' ' << s.value << ' ' << strategy_name(s.strategy) << '\n';
  }
  return out.str();
}

inline ReasoningTrace parse_trace(const Board& initial, std::string_view text) {
  ReasoningTrace trace{initial, {}};
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    TraceStep step;
    std::string name;
    if (!(fields >> step.row >> step.col >> step.value >> name)) throw FormatError("bad trace line: " + line);
    const auto strategy = parse_strategy(name);
    if (!strategy) throw FormatError("unknown strategy in trace line: " + line);
    step.strategy = *strategy;
    trace.steps.push_back(step);
  }
  return trace;
}

/// Multi-line rendering with optional markers on two cells, used by failure dumps.
inline std::string render_board(const Board& board, int mark_a = -1, char open_a = '[', char close_a = ']',
                                int mark_b = -1, char open_b = '<', char close_b = '>') {
  std::ostringstream out;
  for (int r = 1; r <= 9; ++r) {
    if (r == 4 || r == 7) out << "---------+---------+---------\n";
    for (int c = 1; c <= 9; ++c) {
      if (c == 4 || c == 7) out << '|';
      const int i = cell_index(r, c);
      const char v = board.at(i) == 0 ? '.' : static_cast<char>('0' + board.at(i));
      if (i == mark_a) {
        out << open_a << v << close_a;
      } else if (i == mark_b) {
        out << open_b << v << close_b;
      } else {
        out << ' ' << v << ' ';
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace forge::sudoku
