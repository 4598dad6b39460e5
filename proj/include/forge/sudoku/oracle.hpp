#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "forge/core/rng.hpp"
#include "forge/sudoku/board.hpp"

namespace forge::sudoku {

struct BruteForceResult {
  int count = 0;  // solutions found, capped
  std::optional<Board> first;
};

namespace detail {

struct SearchState {
  std::array<std::uint16_t, 9> rows{}, cols{}, blocks{};
  Board board;

  bool place(int i, int v) {
    const std::uint16_t bit = static_cast<std::uint16_t>(1u << v);
    const int r = row_of(i) - 1, c = col_of(i) - 1, b = block_of(i) - 1;
    if ((rows[r] | cols[c] | blocks[b]) & bit) return false;
    rows[r] |= bit;
    cols[c] |= bit;
    blocks[b] |= bit;
    board.set(i, v);
    return true;
  }
  void remove(int i, int v) {
    const std::uint16_t bit = static_cast<std::uint16_t>(1u << v);
    rows[row_of(i) - 1] &= static_cast<std::uint16_t>(~bit);
    cols[col_of(i) - 1] &= static_cast<std::uint16_t>(~bit);
    blocks[block_of(i) - 1] &= static_cast<std::uint16_t>(~bit);
    board.set(i, 0);
  }
  DigitSet options(int i) const {
    return DigitSet::all().minus(
        DigitSet::from_bits(rows[row_of(i) - 1] | cols[col_of(i) - 1] | blocks[block_of(i) - 1]));
  }
};

inline void search(SearchState& s, int cap, BruteForceResult& out) {
  // Minimum-remaining-values cell, ties row-major.
  int best = -1;
  DigitSet best_options;
  for (int i = 0; i < kCells; ++i) {
    if (!s.board.empty_at(i)) continue;
    const DigitSet o = s.options(i);
    if (best < 0 || o.size() < best_options.size()) {
      best = i;
      best_options = o;
      if (o.size() <= 1) break;
    }
  }
  if (best < 0) {
    if (out.count++ == 0) out.first = s.board;
    return;
  }
  best_options.for_each([&](int v) {
    if (out.count >= cap) return;
    s.place(best, v);
    search(s, cap, out);
    s.remove(best, v);
  });
}

}  // namespace detail

/// Exhaustive backtracking (MRV, values ascending). Counts solutions up to `cap`
/// and keeps the first one found. The returned board keeps the givens mask.
inline BruteForceResult brute_force_solve(const Board& board, int cap = 2) {
  if (!board.valid()) throw ValidityError("board has a duplicate value in a row, column or block");
  detail::SearchState s;
  s.board = board;
  for (int i = 0; i < kCells; ++i) {
    if (!board.empty_at(i)) s.place(i, board.at(i));
  }
  BruteForceResult out;
  detail::search(s, std::max(cap, 1), out);
  return out;
}

inline bool has_unique_solution(const Board& board) { return brute_force_solve(board, 2).count == 1; }

/// Guess-based difficulty. average_guesses is the headline number; the stack
/// depth is kept because both definitions circulate.
struct Rating {
  double average_guesses = 0.0;
  int max_guess_depth = 0;
  int trials = 1;
  bool operator==(const Rating&) const = default;
};

namespace detail {

struct RatingState {
  Board board;
  CandidateGrid grid;

  void fill(int i, int v) {
    board.set(i, v);
    grid.assign(i, DigitSet{});
    for (int p : kUnits.peers[i]) grid.erase(p, v);
  }

  /// Lone and hidden singles to fixpoint. Returns false on contradiction.
  bool propagate() {
    for (bool progress = true; progress;) {
      progress = false;
      for (int i = 0; i < kCells; ++i) {
        if (!board.empty_at(i)) continue;
        const DigitSet s = grid.at(i);
        if (s.empty()) return false;
        if (s.size() == 1) {
          const int v = s.first();
          for (int p : kUnits.peers[i]) {
            if (board.at(p) == v) return false;
          }
          fill(i, v);
          progress = true;
        }
      }
      for (const auto& unit : kUnits.cells) {
        for (int v = 1; v <= 9; ++v) {
          int where = -1, count = 0;
          bool placed = false;
          for (int i : unit) {
            if (board.at(i) == v) placed = true;
            if (board.empty_at(i) && grid.at(i).contains(v)) {
              where = i;
              ++count;
            }
          }
          if (placed) continue;
          if (count == 0) return false;
          if (count == 1) {
            fill(where, v);
            progress = true;
          }
        }
      }
    }
    return true;
  }
};

struct TrialResult {
  int guesses = 0;
  int max_depth = 0;
};

inline TrialResult rate_trial(const Board& board, Rng& rng) {
  struct Frame {
    RatingState before;
    int cell;
    int value;
  };
  RatingState state{board, compute_candidates(board)};
  std::vector<Frame> stack;
  TrialResult result;
  for (;;) {
    if (state.propagate()) {
      if (state.board.complete()) return result;
      int cell = -1;
      for (int i = 0; i < kCells; ++i) {
        if (state.board.empty_at(i) && (cell < 0 || state.grid.at(i).size() < state.grid.at(cell).size())) cell = i;
      }
      std::vector<int> options;
      state.grid.at(cell).for_each([&](int v) { options.push_back(v); });
      const int value = options[rng.below(options.size())];
      stack.push_back({state, cell, value});
      ++result.guesses;
      result.max_depth = std::max(result.max_depth, static_cast<int>(stack.size()));
      state.fill(cell, value);
      continue;
    }
    // Contradiction: undo the latest guess and rule its value out.
    if (stack.empty()) throw ValidityError("board has no solution");
    Frame top = std::move(stack.back());
    stack.pop_back();
    state = std::move(top.before);
    state.grid.erase(top.cell, top.value);
  }
}

}  // namespace detail

/// Rates a puzzle by how many random guesses a singles-only solver needs.
/// Guess cell is the minimum-candidate cell (ties row-major); the guessed
/// value is uniform over that cell's candidates.
inline Rating rate_difficulty(const Board& board, int trials, std::uint64_t seed) {
  if (!board.valid()) throw ValidityError("board has a duplicate value in a row, column or block");
  if (trials < 1) throw ValidityError("trials must be positive");
  Rating rating;
  rating.trials = trials;
  long total = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const auto r = detail::rate_trial(board, rng);
    total += r.guesses;
    rating.max_guess_depth = std::max(rating.max_guess_depth, r.max_depth);
  }
  rating.average_guesses = static_cast<double>(total) / trials;
  return rating;
}

}  // namespace forge::sudoku
