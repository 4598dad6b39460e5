#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "forge/core/parallel.hpp"
#include "forge/core/rng.hpp"
#include "forge/sudoku/generator.hpp"
#include "forge/sudoku/oracle.hpp"

namespace forge::pipeline {

struct SynthConfig {
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  int min_givens = 22;
  int max_givens = 34;
  int rating_trials = 10;
  unsigned jobs = 1;
};

/// Writes a puzzle CSV in the public dataset's layout
/// (id,puzzle,solution,clues,difficulty; '.' marks empty cells). Puzzles are
/// unique-solution but not filtered for strategy solvability.
inline std::string synthetic_csv(const SynthConfig& cfg) {
  const int span = std::max(1, cfg.max_givens - cfg.min_givens + 1);
  const auto rows = parallel_map(cfg.count, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t s = derive_seed(cfg.seed, i);
    const int target = cfg.min_givens + static_cast<int>(splitmix64(s) % static_cast<std::uint64_t>(span));
    const auto g = sudoku::generate_sudoku(s, target);
    const auto r = sudoku::rate_difficulty(g.puzzle, cfg.rating_trials, s);
    char diff[32];
    std::snprintf(diff, sizeof diff, "%.1f", r.average_guesses);
    return std::to_string(i) + "," + g.puzzle.to_string() + "," + g.solution.to_string() + "," +
           std::to_string(g.puzzle.given_count()) + "," + diff + "\n";
  });
  std::string out = "id,puzzle,solution,clues,difficulty\n";
  for (const auto& r : rows) out += r;
  return out;
}

inline void write_synthetic_csv(const std::string& path, const SynthConfig& cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create: " + path);
  out << synthetic_csv(cfg);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace forge::pipeline
