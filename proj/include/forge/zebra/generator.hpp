#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "forge/core/rng.hpp"
#include "forge/zebra/solver.hpp"

namespace forge::zebra {

/// Relative clue-type weights, in kClueTypes order. Uniform by default.
struct ClueWeights {
  std::array<double, 7> weight{1, 1, 1, 1, 1, 1, 1};
};

inline Assignment random_assignment(int m, int n, Rng& rng) {
  Assignment asg(m, n);
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int a = 1; a <= n; ++a) {
    std::iota(perm.begin(), perm.end(), 1);
    rng.shuffle(std::span<int>(perm));
    for (int p = 1; p <= m; ++p) asg.set(p, a, perm[static_cast<std::size_t>(p - 1)]);
  }
  return asg;
}

namespace detail {

inline ClueType sample_type(const ClueWeights& w, Rng& rng) {
  double total = 0;
  for (double x : w.weight) total += x;
  double r = rng.uniform01() * total;
  for (std::size_t i = 0; i < kClueTypes.size(); ++i) {
    if (r < w.weight[i]) return kClueTypes[i];
    r -= w.weight[i];
  }
  return kClueTypes.back();
}

/// Position literals are drawn as if they were one more attribute.
inline Descriptor sample_descriptor(int m, int n, Rng& rng) {
  const int a = rng.between(0, n);
  const int v = rng.between(1, m);
  return a == 0 ? Descriptor::position(v) : Descriptor::attr(a, v);
}

/// Rejects clues that cannot carry information: no attribute operand at all,
/// repeated operands, or Eq/Neq between two values of the same attribute.
inline bool informative(const Clue& clue) {
  bool has_attr = false;
  for (std::size_t i = 0; i < clue.operands.size(); ++i) {
    has_attr = has_attr || !clue.operands[i].is_position();
    for (std::size_t j = 0; j < i; ++j) {
      if (clue.operands[i] == clue.operands[j]) return false;
    }
  }
  if (!has_attr) return false;
  if (clue.type == ClueType::Eq || clue.type == ClueType::Neq) {
    const auto& x = clue.operands[0];
    const auto& y = clue.operands[1];
    if (!x.is_position() && !y.is_position() && x.attribute == y.attribute) return false;
  }
  return true;
}

}  // namespace detail

/// Draws a clue that holds on `hidden` and is not equivalent to any of `existing`.
inline Clue sample_true_clue(const Assignment& hidden, const std::vector<Clue>& existing, Rng& rng,
                             const ClueWeights& weights = {}) {
  const int m = hidden.entities();
  const int n = hidden.attributes();
  for (long attempt = 0; attempt < 10'000'000; ++attempt) {
    Clue clue;
    clue.type = detail::sample_type(weights, rng);
    for (int k = 0; k < arity(clue.type); ++k) clue.operands.push_back(detail::sample_descriptor(m, n, rng));
    if (!detail::informative(clue) || !evaluate_clue(clue, hidden)) continue;
    bool duplicate = false;
    for (const auto& c : existing) duplicate = duplicate || c.equivalent(clue);
    if (!duplicate) return clue;
  }
  throw std::runtime_error("clue sampling did not find a new true clue");
}

/// Generates a puzzle whose clues determine `solution` through k-subset deduction.
///
/// Random true clues are added until the deducer completes the grid; clues
/// that never took part in a progress event of the canonical solve are then
/// dropped and solvability is re-checked. Deterministic per (m, n, seed).
inline ZebraPuzzle generate_puzzle(int m, int n, std::uint64_t seed, const ClueWeights& weights = {}) {
  if (m < 2 || n < 1 || m > detail::kMaxEntities) throw FormatError("zebra size out of range");
  Rng rng(seed);
  ZebraPuzzle puzzle;
  puzzle.m = m;
  puzzle.n = n;
  puzzle.solution = random_assignment(m, n, rng);

  std::vector<Clue> clues;
  ZebraDeducer engine(m, n);
  while (!engine.grid().complete()) {
    Clue c = sample_true_clue(puzzle.solution, clues, rng, weights);
    clues.push_back(c);
    engine.add_clue(std::move(c));
    engine.run();
  }

  auto outcome = solve_zebra(m, n, clues);
  const auto& solved = std::get<ZebraSolved>(outcome);
  for (int idx : solved.trace.used_clues()) puzzle.clues.push_back(clues[static_cast<std::size_t>(idx)]);
  auto check = solve_zebra(m, n, puzzle.clues);
  if (!std::holds_alternative<ZebraSolved>(check) || std::get<ZebraSolved>(check).assignment != puzzle.solution) {
    throw std::logic_error("clue minimization broke solvability");
  }
  return puzzle;
}

struct BruteForceZebra {
  long count = 0;
  std::vector<Assignment> solutions;  // at most `keep` of them
};

/// Enumerates every assignment (one permutation per attribute column) and
/// keeps those satisfying all clues. Each clue is checked as soon as every
/// column it names is fixed, which prunes without changing the count.
/// Throws when (m!)^n exceeds `budget`.
inline BruteForceZebra brute_force_zebra(int m, int n, const std::vector<Clue>& clues, double budget = 1e9,
                                         std::size_t keep = 16) {
  double space = 1;
  for (int a = 0; a < n; ++a) {
    for (int k = 2; k <= m; ++k) space *= k;
  }
  if (space > budget) throw std::length_error("brute-force zebra space exceeds budget");
  for (const auto& c : clues) validate_clue(c, m, n);

  std::vector<std::vector<int>> perms;
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 1);
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  // Clues become checkable once their highest named attribute is assigned.
  std::vector<std::vector<const Clue*>> ready(static_cast<std::size_t>(n + 1));
  for (const auto& c : clues) {
    int hi = 0;
    for (const auto& d : c.operands) hi = std::max(hi, d.is_position() ? 0 : d.attribute);
    ready[static_cast<std::size_t>(hi)].push_back(&c);
  }
  BruteForceZebra out;
  Assignment asg(m, n);
  // Positions named by attribute values only: unassigned columns are never read.
  for (const Clue* c : ready[0]) {
    if (!evaluate_clue(*c, asg)) return out;
  }
  std::function<void(int)> fill = [&](int a) {
    if (a > n) {
      ++out.count;
      if (out.solutions.size() < keep) out.solutions.push_back(asg);
      return;
    }
    for (const auto& pm : perms) {
      for (int p = 1; p <= m; ++p) asg.set(p, a, pm[static_cast<std::size_t>(p - 1)]);
      bool ok = true;
      for (const Clue* c : ready[static_cast<std::size_t>(a)]) {
        if (!evaluate_clue(*c, asg)) {
          ok = false;
          break;
        }
      }
      if (ok) fill(a + 1);
    }
  };
  fill(1);
  return out;
}

inline BruteForceZebra brute_force_zebra(const ZebraPuzzle& puzzle, double budget = 1e9) {
  return brute_force_zebra(puzzle.m, puzzle.n, puzzle.clues, budget);
}

}  // namespace forge::zebra
