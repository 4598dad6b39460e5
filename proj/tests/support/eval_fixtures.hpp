#pragma once

#include <vector>

#include "forge/eval/items.hpp"
#include "forge/sudoku/generator.hpp"
#include "forge/zebra/generator.hpp"

namespace fixtures {

/// Generated puzzles with exactly `givens` givens that the strategy solver completes.
inline std::vector<forge::eval::EvalItem> sudoku_items(std::size_t count, std::uint64_t seed, int givens = 32) {
  std::vector<forge::eval::EvalItem> out;
  for (std::uint64_t s = seed; out.size() < count; ++s) {
    const auto g = forge::sudoku::generate_sudoku(s, givens);
    if (g.puzzle.filled_count() != givens) continue;
    if (!std::holds_alternative<forge::sudoku::ReasoningTrace>(forge::sudoku::solve_with_trace(g.puzzle))) continue;
    out.push_back(forge::eval::sudoku_item(out.size(), g.puzzle, g.solution, 0.5 * static_cast<double>(s % 5)));
  }
  return out;
}

inline std::vector<forge::eval::EvalItem> zebra_items(std::size_t count, std::uint64_t seed, int m = 3, int n = 3) {
  std::vector<forge::eval::EvalItem> out;
  for (std::uint64_t s = seed; out.size() < count; ++s) {
    out.push_back(forge::eval::zebra_item(out.size(), forge::zebra::generate_puzzle(m, n, s)));
  }
  return out;
}

inline forge::eval::EvalData as_data(std::vector<forge::eval::EvalItem> items) {
  forge::eval::EvalData d;
  d.kind = items.front().kind;
  const forge::codec::Vocabulary v(d.kind);
  d.vocab_hash = v.hash();
  d.vocab_size = v.size();
  d.source = "fixture";
  d.items = std::move(items);
  return d;
}

}  // namespace fixtures
