#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/codec/vocabulary.hpp"
#include "forge/core/rng.hpp"
#include "forge/sudoku/solver.hpp"
#include "forge/zebra/solver.hpp"

namespace forge::codec {

/// Order of the solution triplets. Givens are always emitted in fixed order.
enum class Ordering : std::uint8_t { Fixed, Random, SolverDecomposed };

constexpr std::string_view ordering_name(Ordering o) {
  switch (o) {
    case Ordering::Fixed: return "fixed";
    case Ordering::Random: return "random";
    case Ordering::SolverDecomposed: return "solver";
  }
  return "?";
}

inline Ordering parse_ordering(std::string_view s) {
  if (s == "fixed") return Ordering::Fixed;
  if (s == "random") return Ordering::Random;
  if (s == "solver") return Ordering::SolverDecomposed;
  throw FormatError("unknown ordering: " + std::string(s));
}

/// Sudoku: (row, col, value). Zebra: (position, attribute, value).
struct Triplet {
  int first = 0;
  int second = 0;
  int third = 0;
  bool operator==(const Triplet&) const = default;
  auto operator<=>(const Triplet&) const = default;
};

struct TokenSequence {
  std::vector<Token> tokens;
  std::size_t given_len = 0;  // index of SEP
  Ordering ordering = Ordering::Fixed;
  std::vector<bool> loss_mask;  // false up to and including SEP

  void finalize_mask() {
    loss_mask.assign(tokens.size(), false);
    for (std::size_t i = given_len + 1; i < tokens.size(); ++i) loss_mask[i] = true;
  }
};

/// BOS, then the givens of `board` in row-major order, then SEP.
inline std::vector<Token> sudoku_prefix(const sudoku::Board& board) {
  std::vector<Token> out{kBos};
  for (int i = 0; i < sudoku::kCells; ++i) {
    if (board.empty_at(i)) continue;
    out.push_back(digit_token(sudoku::row_of(i)));
    out.push_back(digit_token(sudoku::col_of(i)));
    out.push_back(digit_token(board.at(i)));
  }
  out.push_back(kSep);
  return out;
}

inline void append_triplet(std::vector<Token>& out, int r, int c, int v) {
  out.push_back(digit_token(r));
  out.push_back(digit_token(c));
  out.push_back(digit_token(v));
}

/// Encodes a Sudoku puzzle and its solution. Every filled cell of `board`
/// counts as given; the solution part lists the trace's fills.
inline TokenSequence encode_sudoku(const sudoku::Board& board, const sudoku::ReasoningTrace& trace, Ordering ordering,
                                   std::uint64_t seed = 0) {
  using namespace sudoku;
  if (!trace.initial.same_values(board)) throw ConsistencyError("trace does not start from this board");
  Board replay = board;
  for (const auto& s : trace.steps) {
    const int i = cell_index(s.row, s.col);
    if (s.row < 1 || s.row > 9 || s.col < 1 || s.col > 9 || s.value < 1 || s.value > 9 || !replay.empty_at(i)) {
      throw ConsistencyError("trace step does not fill an empty cell");
    }
    replay.set(i, s.value);
  }
  if (!replay.complete() || !replay.valid()) throw ConsistencyError("trace does not complete the board");

  std::vector<TraceStep> solution;
  if (ordering == Ordering::SolverDecomposed) {
    solution = trace.steps;
  } else {
    for (int i = 0; i < kCells; ++i) {
      if (board.empty_at(i)) solution.push_back({row_of(i), col_of(i), replay.at(i), Strategy::LoneSingle, {}});
    }
    if (ordering == Ordering::Random) {
      Rng rng(seed);
      rng.shuffle(std::span<TraceStep>(solution));
    }
  }

  TokenSequence seq;
  seq.ordering = ordering;
  seq.tokens = sudoku_prefix(board);
  seq.given_len = seq.tokens.size() - 1;
  for (const auto& s : solution) append_triplet(seq.tokens, s.row, s.col, s.value);
  seq.tokens.push_back(kEos);
  seq.finalize_mask();
  return seq;
}

inline void append_descriptor(std::vector<Token>& out, const zebra::Descriptor& d) {
  if (d.is_position()) {
    out.push_back(position_token(d.value));
  } else {
    out.push_back(attribute_token(d.attribute));
    out.push_back(value_token(d.value));
  }
}

/// BOS, the clue records in puzzle order, then SEP.
inline std::vector<Token> zebra_prefix(const zebra::ZebraPuzzle& puzzle) {
  if (puzzle.m > kZebraMaxSize || puzzle.n > kZebraMaxSize) throw FormatError("zebra size exceeds vocabulary");
  std::vector<Token> out{kBos};
  for (const auto& clue : puzzle.clues) {
    out.push_back(clue_type_token(clue.type));
    for (const auto& d : clue.operands) append_descriptor(out, d);
  }
  out.push_back(kSep);
  return out;
}

/// Encodes clues plus the (position, attribute, value) solution triplets.
/// Fixed order is attribute-major: every position of attribute 1, then attribute 2, ...
inline TokenSequence encode_zebra(const zebra::ZebraPuzzle& puzzle, const zebra::ZebraTrace& trace, Ordering ordering,
                                  std::uint64_t seed = 0) {
  const int m = puzzle.m;
  const int n = puzzle.n;
  std::vector<int> seen(static_cast<std::size_t>(m * n), 0);
  for (const auto& s : trace.steps) {
    if (s.position < 1 || s.position > m || s.attribute < 1 || s.attribute > n ||
        puzzle.solution.value(s.position, s.attribute) != s.value ||
        seen[static_cast<std::size_t>((s.position - 1) * n + s.attribute - 1)]++ != 0) {
      throw ConsistencyError("zebra trace does not match the puzzle solution");
    }
  }
  if (static_cast<int>(trace.steps.size()) != m * n) throw ConsistencyError("zebra trace does not solve the puzzle");

  std::vector<Triplet> solution;
  if (ordering == Ordering::SolverDecomposed) {
    for (const auto& s : trace.steps) solution.push_back({s.position, s.attribute, s.value});
  } else {
    for (int a = 1; a <= n; ++a) {
      for (int p = 1; p <= m; ++p) solution.push_back({p, a, puzzle.solution.value(p, a)});
    }
    if (ordering == Ordering::Random) {
      Rng rng(seed);
      rng.shuffle(std::span<Triplet>(solution));
    }
  }

  TokenSequence seq;
  seq.ordering = ordering;
  seq.tokens = zebra_prefix(puzzle);
  seq.given_len = seq.tokens.size() - 1;
  for (const auto& t : solution) {
    seq.tokens.push_back(position_token(t.first));
    seq.tokens.push_back(attribute_token(t.second));
    seq.tokens.push_back(value_token(t.third));
  }
  seq.tokens.push_back(kEos);
  seq.finalize_mask();
  return seq;
}

struct DecodedSequence {
  std::vector<Triplet> givens;       // Sudoku givens
  std::vector<zebra::Clue> clues;    // Zebra clue records
  std::vector<Triplet> predictions;  // solution part, in emission order, duplicates kept
  std::size_t sep_index = 0;
  bool terminated = false;           // EOS reached at a triplet boundary
  bool malformed = false;            // the solution part ended mid-triplet or held a foreign token
};

namespace detail {

inline std::optional<Triplet> read_solution_triplet(std::span<const Token> t, PuzzleKind kind) {
  if (kind == PuzzleKind::Sudoku) {
    const auto a = as_digit(t[0]), b = as_digit(t[1]), c = as_digit(t[2]);
    if (!a || !b || !c) return std::nullopt;
    return Triplet{*a, *b, *c};
  }
  const auto a = as_position(t[0]), b = as_attribute(t[1]), c = as_value(t[2]);
  if (!a || !b || !c) return std::nullopt;
  return Triplet{*a, *b, *c};
}

}  // namespace detail

/// Parses a token stream produced by encode_* or by a model. The given part
/// must be well formed; the solution part is read triplet by triplet until
/// EOS, PAD or the end of input, keeping the longest valid prefix.
inline DecodedSequence decode_sequence(std::span<const Token> tokens, PuzzleKind kind) {
  if (tokens.empty() || tokens[0] != kBos) throw FormatError("sequence must begin with BOS");
  const auto sep = std::find(tokens.begin(), tokens.end(), kSep);
  if (sep == tokens.end()) throw FormatError("sequence has no SEP");
  if (std::find(sep + 1, tokens.end(), kSep) != tokens.end()) throw FormatError("sequence has more than one SEP");

  DecodedSequence out;
  out.sep_index = static_cast<std::size_t>(sep - tokens.begin());
  const auto given = tokens.subspan(1, out.sep_index - 1);
  if (kind == PuzzleKind::Sudoku) {
    if (given.size() % 3 != 0) throw FormatError("given part is not a whole number of triplets");
    for (std::size_t i = 0; i < given.size(); i += 3) {
      const auto t = detail::read_solution_triplet(given.subspan(i, 3), kind);
      if (!t) throw FormatError("bad token in given part");
      out.givens.push_back(*t);
    }
  } else {
    for (std::size_t i = 0; i < given.size();) {
      const auto type = as_clue_type(given[i++]);
      if (!type) throw FormatError("expected a clue-type token");
      zebra::Clue clue{*type, {}};
      for (int k = 0; k < zebra::arity(*type); ++k) {
        if (i >= given.size()) throw FormatError("clue record truncated");
        if (const auto p = as_position(given[i])) {
          clue.operands.push_back(zebra::Descriptor::position(*p));
          ++i;
          continue;
        }
        const auto a = as_attribute(given[i]);
        const auto v = i + 1 < given.size() ? as_value(given[i + 1]) : std::nullopt;
        if (!a || !v) throw FormatError("bad clue operand");
        clue.operands.push_back(zebra::Descriptor::attr(*a, *v));
        i += 2;
      }
      out.clues.push_back(std::move(clue));
    }
  }

  const auto tail = tokens.subspan(out.sep_index + 1);
  std::size_t i = 0;
  while (i < tail.size()) {
    if (tail[i] == kEos) {
      out.terminated = true;
      break;
    }
    if (tail[i] == kPad) break;
    if (i + 3 > tail.size()) {
      out.malformed = true;
      break;
    }
    const auto t = detail::read_solution_triplet(tail.subspan(i, 3), kind);
    if (!t) {
      out.malformed = true;
      break;
    }
    out.predictions.push_back(*t);
    i += 3;
  }
  return out;
}

inline DecodedSequence decode_sequence(const TokenSequence& seq, PuzzleKind kind) {
  return decode_sequence(std::span<const Token>(seq.tokens), kind);
}

/// Rebuilds the puzzle board (givens only) from a decoded Sudoku sequence.
inline sudoku::Board givens_board(const DecodedSequence& d) {
  sudoku::Board b;
  for (const auto& t : d.givens) b.set_given(sudoku::cell_index(t.first, t.second), t.third);
  return b;
}

/// Givens plus the first prediction for each empty cell.
inline sudoku::Board completed_board(const DecodedSequence& d) {
  sudoku::Board b = givens_board(d);
  for (const auto& t : d.predictions) {
    const int i = sudoku::cell_index(t.first, t.second);
    if (b.empty_at(i)) b.set(i, t.third);
  }
  return b;
}

/// Rebuilds a Zebra puzzle from a decoded sequence. Sizes come from the
/// solution triplets, so the solution part must be complete.
inline zebra::ZebraPuzzle zebra_from_decoded(const DecodedSequence& d) {
  zebra::ZebraPuzzle pz;
  for (const auto& t : d.predictions) {
    pz.m = std::max(pz.m, t.first);
    pz.n = std::max(pz.n, t.second);
  }
  pz.clues = d.clues;
  pz.solution = zebra::Assignment(pz.m, pz.n);
  for (const auto& t : d.predictions) pz.solution.set(t.first, t.second, t.third);
  return pz;
}

}  // namespace forge::codec
