#pragma once

// Reference implementations used only by tests. They are deliberately naive
// and share no code with the library beyond the data types.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "forge/sudoku/board.hpp"
#include "forge/zebra/puzzle.hpp"

namespace oracle {

inline constexpr const char* kWikipedia =
    "530070000600195000098000060800060003400803001700020006060000280000419005000080079";
inline constexpr const char* kWikipediaSolution =
    "534678912672195348198342567859761423426853791713924856961537284287419635345286179";
inline constexpr const char* kHard =
    "800000000003600000070090200050007000000045700000100030001000068008500010090000400";

inline bool fits(const std::string& s, int i, char v) {
  const int r = i / 9, c = i % 9;
  for (int k = 0; k < 9; ++k) {
    if (s[r * 9 + k] == v || s[k * 9 + c] == v) return false;
  }
  const int br = r / 3 * 3, bc = c / 3 * 3;
  for (int dr = 0; dr < 3; ++dr) {
    for (int dc = 0; dc < 3; ++dc) {
      if (s[(br + dr) * 9 + bc + dc] == v) return false;
    }
  }
  return true;
}

/// Row-major backtracking over an 81-char string ('.' empty). Counts up to cap.
inline void count_solutions(std::string& s, int from, int cap, int& count, std::string& first) {
  while (from < 81 && s[from] != '.') ++from;
  if (from == 81) {
    if (count++ == 0) first = s;
    return;
  }
  for (char v = '1'; v <= '9' && count < cap; ++v) {
    if (!fits(s, from, v)) continue;
    s[from] = v;
    count_solutions(s, from + 1, cap, count, first);
    s[from] = '.';
  }
}

struct SudokuCount {
  int count = 0;
  std::string first;
};

inline SudokuCount sudoku_solutions(std::string s, int cap = 2) {
  std::replace(s.begin(), s.end(), '0', '.');
  SudokuCount out;
  count_solutions(s, 0, cap, out.count, out.first);
  return out;
}

/// Every assignment of an m x n zebra grid, one next_permutation per column,
/// filtered by direct clue evaluation.
inline std::vector<forge::zebra::Assignment> zebra_models(int m, int n, const std::vector<forge::zebra::Clue>& clues) {
  std::vector<std::vector<int>> perms;
  std::vector<int> p(static_cast<std::size_t>(m));
  std::iota(p.begin(), p.end(), 1);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
  std::vector<forge::zebra::Assignment> out;
  for (;;) {
    forge::zebra::Assignment a(m, n);
    for (int attr = 1; attr <= n; ++attr) {
      for (int pos = 1; pos <= m; ++pos) a.set(pos, attr, perms[pick[attr - 1]][pos - 1]);
    }
    bool ok = true;
    for (const auto& c : clues) {
      int where[3] = {0, 0, 0};
      for (std::size_t k = 0; k < c.operands.size(); ++k) {
        const auto& d = c.operands[k];
        where[k] = d.is_position() ? d.value : a.position_of(d.attribute, d.value);
      }
      using forge::zebra::ClueType;
      bool holds = false;
      switch (c.type) {
        case ClueType::Eq: holds = where[0] == where[1]; break;
        case ClueType::Neq: holds = where[0] != where[1]; break;
        case ClueType::ImmediateLeft: holds = where[1] - where[0] == 1; break;
        case ClueType::NeighbourOf: holds = std::abs(where[0] - where[1]) == 1; break;
        case ClueType::EndsIn: holds = where[0] == 1 || where[0] == m; break;
        case ClueType::LeftOf: holds = where[0] < where[1]; break;
        case ClueType::InBetween:
          holds = (where[1] < where[0] && where[0] < where[2]) || (where[2] < where[0] && where[0] < where[1]);
          break;
      }
      if (!holds) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(a);
    std::size_t k = 0;
    while (k < pick.size() && ++pick[k] == perms.size()) pick[k++] = 0;
    if (k == pick.size()) break;
  }
  return out;
}

/// The running example: three people (Ali, Rose, Randy), three colors
/// (gold, silver, indigo) and three drinks (orange juice, beer, coffee).
///   1. The orange-juice drinker is immediately left of the coffee drinker.
///   2. The beer drinker is somewhere left of the indigo owner.
///   3. Rose lives in position 1.
///   4. Randy does not drink orange juice.
///   5. Randy owns gold.
inline std::vector<forge::zebra::Clue> three_friends_clues() {
  using forge::zebra::Clue;
  using forge::zebra::ClueType;
  using forge::zebra::Descriptor;
  return {
      Clue{ClueType::ImmediateLeft, {Descriptor::attr(3, 1), Descriptor::attr(3, 3)}},
      Clue{ClueType::LeftOf, {Descriptor::attr(3, 2), Descriptor::attr(2, 3)}},
      Clue{ClueType::Eq, {Descriptor::position(1), Descriptor::attr(1, 2)}},
      Clue{ClueType::Neq, {Descriptor::attr(1, 3), Descriptor::attr(3, 1)}},
      Clue{ClueType::Eq, {Descriptor::attr(1, 3), Descriptor::attr(2, 1)}},
  };
}

}  // namespace oracle
