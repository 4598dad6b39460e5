#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "forge/core/error.hpp"

namespace forge::sudoku {

inline constexpr int kSize = 9;
inline constexpr int kCells = 81;

// Rows, columns and blocks are 1-based in every public signature, matching the
// (r, c, v) token triplets. Cell indices are 0-based row-major: i = 9(r-1) + (c-1).

constexpr int cell_index(int row, int col) { return (row - 1) * kSize + (col - 1); }
constexpr int row_of(int index) { return index / kSize + 1; }
constexpr int col_of(int index) { return index % kSize + 1; }
constexpr int block_of(int row, int col) { return 3 * ((row - 1) / 3) + (col - 1) / 3 + 1; }
constexpr int block_of(int index) { return block_of(row_of(index), col_of(index)); }

/// Set of digits 1..9 stored as bits 1..9.
class DigitSet {
 public:
  constexpr DigitSet() = default;
  static constexpr DigitSet all() { return DigitSet(0x3FE); }
  static constexpr DigitSet single(int v) { return DigitSet(static_cast<std::uint16_t>(1u << v)); }
  static constexpr DigitSet from_bits(std::uint16_t bits) { return DigitSet(bits & 0x3FE); }

  constexpr bool contains(int v) const { return (bits_ >> v) & 1u; }
  constexpr void insert(int v) { bits_ |= static_cast<std::uint16_t>(1u << v); }
  constexpr void erase(int v) { bits_ &= static_cast<std::uint16_t>(~(1u << v)); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint16_t bits() const { return bits_; }
  /// Smallest member; undefined on the empty set.
  constexpr int first() const { return std::countr_zero(bits_); }

  constexpr bool is_subset_of(DigitSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr DigitSet operator&(DigitSet o) const { return DigitSet(bits_ & o.bits_); }
  constexpr DigitSet operator|(DigitSet o) const { return DigitSet(bits_ | o.bits_); }
  constexpr DigitSet minus(DigitSet o) const { return DigitSet(bits_ & ~o.bits_); }
  constexpr bool operator==(const DigitSet&) const = default;

  template <typename Fn>
  constexpr void for_each(Fn&& fn) const {
    for (std::uint16_t b = bits_; b != 0; b &= static_cast<std::uint16_t>(b - 1)) {
      fn(std::countr_zero(b));
    }
  }

 private:
  constexpr explicit DigitSet(std::uint16_t bits) : bits_(bits) {}
  std::uint16_t bits_ = 0;
};

/// A house: one of the 27 rows, columns and blocks.
enum class UnitKind : std::uint8_t { Row, Column, Block };

struct Unit {
  UnitKind kind;
  int number;  // 1..9
  bool operator==(const Unit&) const = default;
};

/// The 27 houses in scan order: rows 1..9, columns 1..9, blocks 1..9. Each
/// house lists its cells row-major.
struct UnitTable {
  std::array<Unit, 27> units{};
  std::array<std::array<int, 9>, 27> cells{};
  std::array<std::array<int, 20>, kCells> peers{};

  constexpr UnitTable() {
    for (int k = 0; k < 9; ++k) {
      units[k] = {UnitKind::Row, k + 1};
      units[9 + k] = {UnitKind::Column, k + 1};
      units[18 + k] = {UnitKind::Block, k + 1};
      for (int j = 0; j < 9; ++j) {
        cells[k][j] = k * 9 + j;
        cells[9 + k][j] = j * 9 + k;
        const int br = (k / 3) * 3 + j / 3;
        const int bc = (k % 3) * 3 + j % 3;
        cells[18 + k][j] = br * 9 + bc;
      }
    }
    for (int i = 0; i < kCells; ++i) {
      int n = 0;
      for (int j = 0; j < kCells; ++j) {
        if (j != i && (row_of(i) == row_of(j) || col_of(i) == col_of(j) || block_of(i) == block_of(j))) {
          peers[i][n++] = j;
        }
      }
    }
  }
};

inline constexpr UnitTable kUnits{};

constexpr bool sees(int a, int b) {
  return a != b && (row_of(a) == row_of(b) || col_of(a) == col_of(b) || block_of(a) == block_of(b));
}

/// 9x9 Sudoku state. A value of 0 marks an empty cell.
class Board {
 public:
  Board() = default;

  int at(int row, int col) const { return cells_[cell_index(row, col)]; }
  int at(int index) const { return cells_[index]; }
  bool is_given(int index) const { return givens_[index]; }
  bool empty_at(int index) const { return cells_[index] == 0; }

  /// Places a value without validity checks. Givens are set by parse_board only.
  void set(int index, int value) { cells_[index] = static_cast<std::uint8_t>(value); }
  void set_given(int index, int value) {
    cells_[index] = static_cast<std::uint8_t>(value);
    givens_[index] = value != 0;
  }

  int filled_count() const {
    int n = 0;
    for (auto v : cells_) n += v != 0;
    return n;
  }
  int given_count() const {
    int n = 0;
    for (auto g : givens_) n += g;
    return n;
  }
  bool complete() const { return filled_count() == kCells; }

  /// True when no house holds a duplicate value among filled cells.
  bool valid() const {
    for (const auto& unit : kUnits.cells) {
      DigitSet seen;
      for (int i : unit) {
        const int v = cells_[i];
        if (v == 0) continue;
        if (seen.contains(v)) return false;
        seen.insert(v);
      }
    }
    return true;
  }

  /// 81 characters, '.' for empty cells.
  std::string to_string() const {
    std::string out(kCells, '.');
    for (int i = 0; i < kCells; ++i) {
      if (cells_[i] != 0) out[i] = static_cast<char>('0' + cells_[i]);
    }
    return out;
  }

  /// Same cell values (givens mask ignored).
  bool same_values(const Board& other) const { return cells_ == other.cells_; }
  bool operator==(const Board&) const = default;

 private:
  std::array<std::uint8_t, kCells> cells_{};
  std::array<bool, kCells> givens_{};
};

/// Parses the 81-character row-major form. Digits are givens; '.' and '0' are empty.
inline Board parse_board(std::string_view text) {
  if (text.size() != kCells) {
    throw FormatError("board text must have 81 characters, got " + std::to_string(text.size()));
  }
  Board board;
  for (int i = 0; i < kCells; ++i) {
    const char ch = text[i];
    if (ch == '.' || ch == '0') continue;
    if (ch < '1' || ch > '9') {
      throw FormatError(std::string("invalid board character '") + ch + "' at offset " + std::to_string(i));
    }
    board.set_given(i, ch - '0');
  }
  if (!board.valid()) throw ValidityError("board has a duplicate value in a row, column or block");
  return board;
}

/// Per-cell admissible values. Filled cells carry the empty set.
class CandidateGrid {
 public:
  DigitSet at(int index) const { return sets_[index]; }
  DigitSet at(int row, int col) const { return sets_[cell_index(row, col)]; }
  void assign(int index, DigitSet s) { sets_[index] = s; }
  /// Returns true if the value was present.
  bool erase(int index, int value) {
    const bool had = sets_[index].contains(value);
    sets_[index].erase(value);
    return had;
  }
  bool is_subset_of(const CandidateGrid& prior) const {
    for (int i = 0; i < kCells; ++i) {
      if (!sets_[i].is_subset_of(prior.sets_[i])) return false;
    }
    return true;
  }
  bool operator==(const CandidateGrid&) const = default;

 private:
  std::array<DigitSet, kCells> sets_{};
};

/// Naive candidates: {1..9} minus the values already in the cell's row, column and block.
inline CandidateGrid compute_candidates(const Board& board) {
  CandidateGrid grid;
  for (int i = 0; i < kCells; ++i) {
    if (!board.empty_at(i)) continue;
    DigitSet s = DigitSet::all();
    for (int p : kUnits.peers[i]) {
      if (board.at(p) != 0) s.erase(board.at(p));
    }
    grid.assign(i, s);
  }
  return grid;
}

}  // namespace forge::sudoku
