#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <span>

#include "forge/core/rng.hpp"
#include "forge/sudoku/oracle.hpp"

namespace forge::sudoku {

/// A uniformly relabelled, row/column-shuffled complete grid.
inline Board random_solution(Rng& rng) {
  Board seed;
  // Diagonal blocks never interact, so any fill of them completes.
  for (int b = 0; b < 3; ++b) {
    std::array<int, 9> digits{};
    std::iota(digits.begin(), digits.end(), 1);
    rng.shuffle(std::span<int>(digits));
    for (int k = 0; k < 9; ++k) seed.set(cell_index(3 * b + k / 3 + 1, 3 * b + k % 3 + 1), digits[k]);
  }
  Board base = *brute_force_solve(seed, 1).first;

  auto shuffled_lines = [&] {
    std::array<int, 3> bands{0, 1, 2};
    rng.shuffle(std::span<int>(bands));
    std::array<int, 9> lines{};
    for (int b = 0; b < 3; ++b) {
      std::array<int, 3> inner{0, 1, 2};
      rng.shuffle(std::span<int>(inner));
      for (int k = 0; k < 3; ++k) lines[3 * b + k] = 3 * bands[b] + inner[k];
    }
    return lines;
  };
  const auto rows = shuffled_lines();
  const auto cols = shuffled_lines();
  Board out;
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 9; ++c) out.set(r * 9 + c, base.at(rows[r] * 9 + cols[c]));
  }
  return out;
}

struct GeneratedPuzzle {
  Board puzzle;
  Board solution;
};

/// Digs cells out of a random solution in random order, keeping each removal
/// only if the puzzle stays uniquely solvable, until `target_givens` remain or
/// no further cell can go. Deterministic per seed.
inline GeneratedPuzzle generate_sudoku(std::uint64_t seed, int target_givens) {
  Rng rng(seed);
  const Board solution = random_solution(rng);
  std::array<int, kCells> order{};
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  Board work = solution;
  int givens = kCells;
  for (int i : order) {
    if (givens <= target_givens) break;
    const int v = work.at(i);
    work.set(i, 0);
    if (has_unique_solution(work)) {
      --givens;
    } else {
      work.set(i, v);
    }
  }
  Board puzzle;
  for (int i = 0; i < kCells; ++i) puzzle.set_given(i, work.at(i));
  return {puzzle, solution};
}

}  // namespace forge::sudoku
