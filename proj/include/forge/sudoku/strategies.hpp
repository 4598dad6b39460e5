#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/sudoku/board.hpp"

namespace forge::sudoku {

/// The seven human strategies, easiest first. The enumerator order is the
/// priority order used by the trace solver.
enum class Strategy : std::uint8_t {
  LoneSingle,
  HiddenSingle,
  NakedPair,
  NakedTriplet,
  LockedCandidate,
  XYWing,
  UniqueRectangle,
};

inline constexpr std::array<Strategy, 7> kStrategyOrder = {
    Strategy::LoneSingle,      Strategy::HiddenSingle, Strategy::NakedPair,      Strategy::NakedTriplet,
    Strategy::LockedCandidate, Strategy::XYWing,       Strategy::UniqueRectangle,
};

constexpr std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::LoneSingle: return "LoneSingle";
    case Strategy::HiddenSingle: return "HiddenSingle";
    case Strategy::NakedPair: return "NakedPair";
    case Strategy::NakedTriplet: return "NakedTriplet";
    case Strategy::LockedCandidate: return "LockedCandidate";
    case Strategy::XYWing: return "XYWing";
    case Strategy::UniqueRectangle: return "UniqueRectangle";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : kStrategyOrder) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

/// One (row, col, value) triple; 1-based.
struct CellValue {
  int row = 0;
  int col = 0;
  int value = 0;
  bool operator==(const CellValue&) const = default;
};

struct Fill {
  CellValue cell;
};

struct Eliminate {
  std::vector<CellValue> removed;  // row-major, values ascending
};

/// Result of one strategy application. `unit` is the house the strategy
/// instance worked in, when it worked in a single house.
struct Deduction {
  std::variant<Fill, Eliminate> kind;
  Strategy strategy = Strategy::LoneSingle;
  std::optional<Unit> unit;

  bool is_fill() const { return std::holds_alternative<Fill>(kind); }
  const CellValue& fill() const { return std::get<Fill>(kind).cell; }
  const std::vector<CellValue>& removed() const { return std::get<Eliminate>(kind).removed; }
};

namespace detail {

inline Deduction make_fill(int index, int value, Strategy s, std::optional<Unit> unit = std::nullopt) {
  return Deduction{Fill{{row_of(index), col_of(index), value}}, s, unit};
}

/// Builds an Eliminate deduction from (cell, digits) pairs, dropping digits not
/// currently present. Returns nullopt when nothing would be removed.
inline std::optional<Deduction> make_elimination(const CandidateGrid& grid,
                                                 const std::vector<std::pair<int, DigitSet>>& targets, Strategy s,
                                                 std::optional<Unit> unit = std::nullopt) {
  std::array<DigitSet, kCells> per_cell{};
  for (const auto& [index, digits] : targets) per_cell[index] = per_cell[index] | (grid.at(index) & digits);
  Eliminate e;
  for (int i = 0; i < kCells; ++i) {
    per_cell[i].for_each([&](int v) { e.removed.push_back({row_of(i), col_of(i), v}); });
  }
  if (e.removed.empty()) return std::nullopt;
  return Deduction{std::move(e), s, unit};
}

inline std::optional<Deduction> lone_single(const Board& board, const CandidateGrid& grid) {
  for (int i = 0; i < kCells; ++i) {
    if (board.empty_at(i) && grid.at(i).size() == 1) return make_fill(i, grid.at(i).first(), Strategy::LoneSingle);
  }
  return std::nullopt;
}

inline std::optional<Deduction> hidden_single(const Board& board, const CandidateGrid& grid) {
  for (int u = 0; u < 27; ++u) {
    const auto& cells = kUnits.cells[u];
    for (int v = 1; v <= 9; ++v) {
      int where = -1;
      int count = 0;
      bool placed = false;
      for (int i : cells) {
        if (board.at(i) == v) placed = true;
        if (board.empty_at(i) && grid.at(i).contains(v)) {
          where = i;
          ++count;
        }
      }
      if (!placed && count == 1) return make_fill(where, v, Strategy::HiddenSingle, kUnits.units[u]);
    }
  }
  return std::nullopt;
}

/// Naked pair (size 2) or naked triplet (size 3): `size` empty cells of one
/// house whose candidate sets are identical and of exactly that size.
inline std::optional<Deduction> naked_subset(const Board& board, const CandidateGrid& grid, int size, Strategy s) {
  for (int u = 0; u < 27; ++u) {
    const auto& cells = kUnits.cells[u];
    for (int a = 0; a < 9; ++a) {
      const int ia = cells[a];
      const DigitSet set = grid.at(ia);
      if (!board.empty_at(ia) || set.size() != size) continue;
      std::vector<int> members{ia};
      for (int b = a + 1; b < 9; ++b) {
        const int ib = cells[b];
        if (board.empty_at(ib) && grid.at(ib) == set) members.push_back(ib);
      }
      if (static_cast<int>(members.size()) != size) continue;
      std::vector<std::pair<int, DigitSet>> targets;
      for (int i : cells) {
        if (!board.empty_at(i) || std::find(members.begin(), members.end(), i) != members.end()) continue;
        targets.emplace_back(i, set);
      }
      if (auto d = make_elimination(grid, targets, s, kUnits.units[u])) return d;
    }
  }
  return std::nullopt;
}

/// Pointing form: within a block, every candidate position of v lies on one
/// row (or column), so v leaves the rest of that row (column).
inline std::optional<Deduction> locked_candidate(const Board& board, const CandidateGrid& grid) {
  for (int b = 0; b < 9; ++b) {
    const auto& cells = kUnits.cells[18 + b];
    for (int v = 1; v <= 9; ++v) {
      std::vector<int> spots;
      for (int i : cells) {
        if (board.empty_at(i) && grid.at(i).contains(v)) spots.push_back(i);
      }
      if (spots.size() < 2) continue;
      const auto same = [&](auto key) {
        for (int i : spots) {
          if (key(i) != key(spots.front())) return false;
        }
        return true;
      };
      for (const bool by_row : {true, false}) {
        if (!(by_row ? same(row_of) : same(col_of))) continue;
        const int line = by_row ? row_of(spots.front()) : col_of(spots.front());
        const auto& line_cells = kUnits.cells[(by_row ? 0 : 9) + line - 1];
        std::vector<std::pair<int, DigitSet>> targets;
        for (int i : line_cells) {
          if (board.empty_at(i) && block_of(i) != b + 1) targets.emplace_back(i, DigitSet::single(v));
        }
        if (auto d = make_elimination(grid, targets, Strategy::LockedCandidate, kUnits.units[18 + b])) return d;
      }
    }
  }
  return std::nullopt;
}

inline std::optional<Deduction> xy_wing(const Board& board, const CandidateGrid& grid) {
  for (int pivot = 0; pivot < kCells; ++pivot) {
    const DigitSet xy = grid.at(pivot);
    if (!board.empty_at(pivot) || xy.size() != 2) continue;
    for (int w1 : kUnits.peers[pivot]) {
      const DigitSet s1 = grid.at(w1);
      if (!board.empty_at(w1) || s1.size() != 2 || (s1 & xy).size() != 1) continue;
      const DigitSet z = s1.minus(xy);
      const DigitSet want = xy.minus(s1) | z;  // {Y, Z}
      for (int w2 : kUnits.peers[pivot]) {
        if (w2 == w1 || !board.empty_at(w2) || grid.at(w2) != want) continue;
        std::vector<std::pair<int, DigitSet>> targets;
        for (int i = 0; i < kCells; ++i) {
          if (i == pivot || i == w1 || i == w2 || !board.empty_at(i)) continue;
          if (sees(i, w1) && sees(i, w2)) targets.emplace_back(i, z);
        }
        if (auto d = make_elimination(grid, targets, Strategy::XYWing)) return d;
      }
    }
  }
  return std::nullopt;
}

/// Three corners of a rectangle hold exactly {a, b}; the fourth holds a or b
/// plus at least one other digit, so both a and b leave the fourth corner.
/// The rectangle must not spread over four blocks, otherwise swapping a and b
/// is not a second solution and the uniqueness argument fails.
inline std::optional<Deduction> unique_rectangle(const Board& board, const CandidateGrid& grid) {
  for (int r1 = 1; r1 <= 9; ++r1) {
    for (int r2 = r1 + 1; r2 <= 9; ++r2) {
      for (int c1 = 1; c1 <= 9; ++c1) {
        for (int c2 = c1 + 1; c2 <= 9; ++c2) {
          const bool same_band = (r1 - 1) / 3 == (r2 - 1) / 3;
          const bool same_stack = (c1 - 1) / 3 == (c2 - 1) / 3;
          if (!same_band && !same_stack) continue;
          const std::array<int, 4> corners = {cell_index(r1, c1), cell_index(r1, c2), cell_index(r2, c1),
                                              cell_index(r2, c2)};
          bool all_empty = true;
          for (int i : corners) all_empty = all_empty && board.empty_at(i);
          if (!all_empty) continue;
          for (int odd = 0; odd < 4; ++odd) {
            const DigitSet pair = grid.at(corners[(odd + 1) % 4]);
            if (pair.size() != 2) continue;
            bool matches = true;
            for (int k = 0; k < 4; ++k) {
              if (k != odd && grid.at(corners[k]) != pair) matches = false;
            }
            const DigitSet fourth = grid.at(corners[odd]);
            if (!matches || (fourth & pair).empty() || fourth.minus(pair).empty()) continue;
            if (auto d = make_elimination(grid, {{corners[odd], pair}}, Strategy::UniqueRectangle)) return d;
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// First applicable deduction of `strategy` under the deterministic scan order
/// (cells row-major; houses as rows, columns, blocks; values ascending), or
/// nullopt. Eliminations always remove at least one candidate.
inline std::optional<Deduction> apply_strategy(const Board& board, const CandidateGrid& grid, Strategy strategy) {
  switch (strategy) {
    case Strategy::LoneSingle: return detail::lone_single(board, grid);
    case Strategy::HiddenSingle: return detail::hidden_single(board, grid);
    case Strategy::NakedPair: return detail::naked_subset(board, grid, 2, Strategy::NakedPair);
    case Strategy::NakedTriplet: return detail::naked_subset(board, grid, 3, Strategy::NakedTriplet);
    case Strategy::LockedCandidate: return detail::locked_candidate(board, grid);
    case Strategy::XYWing: return detail::xy_wing(board, grid);
    case Strategy::UniqueRectangle: return detail::unique_rectangle(board, grid);
  }
  return std::nullopt;
}

/// Places a fill (clearing the value from its peers) or removes eliminated candidates.
inline void apply_deduction(Board& board, CandidateGrid& grid, const Deduction& d) {
  if (d.is_fill()) {
    const auto& f = d.fill();
    const int i = cell_index(f.row, f.col);
    board.set(i, f.value);
    grid.assign(i, DigitSet{});
    for (int p : kUnits.peers[i]) grid.erase(p, f.value);
  } else {
    for (const auto& e : d.removed()) grid.erase(cell_index(e.row, e.col), e.value);
  }
}

}  // namespace forge::sudoku
