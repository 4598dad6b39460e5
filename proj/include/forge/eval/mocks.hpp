#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "forge/core/hash.hpp"
#include "forge/core/rng.hpp"
#include "forge/eval/items.hpp"
#include "forge/sudoku/solver.hpp"
#include "forge/zebra/solver.hpp"

namespace forge::eval {

// Test models that know the answers. They read the prompt (BOS .. SEP) to find
// the puzzle and count the triplets after SEP to know where they are.

namespace detail {

struct MockPuzzle {
  const EvalItem* item = nullptr;
  std::vector<codec::Triplet> order;           // the solver's fill order
  std::vector<sudoku::CandidateGrid> states;   // f* after j fills, j = 0..E (Sudoku)
};

inline MockPuzzle prepare(const EvalItem& item) {
  MockPuzzle p{&item, {}, {}};
  if (item.kind == codec::PuzzleKind::Sudoku) {
    auto outcome = sudoku::solve_with_trace(item.puzzle);
    if (!std::holds_alternative<sudoku::ReasoningTrace>(outcome)) {
      throw ConsistencyError("solver mock needs puzzles the strategy solver completes");
    }
    sudoku::StrategySolver solver(item.puzzle);
    for (const auto& s : std::get<sudoku::ReasoningTrace>(outcome).steps) {
      auto snapshot = solver;
      snapshot.settle();
      p.states.push_back(snapshot.grid());
      solver.advance_to_fill();
      p.order.push_back({s.row, s.col, s.value});
    }
    p.states.push_back(solver.grid());
  } else {
    auto outcome = zebra::solve_zebra(item.zebra);
    if (!std::holds_alternative<zebra::ZebraSolved>(outcome)) {
      throw ConsistencyError("solver mock needs puzzles the zebra solver completes");
    }
    for (const auto& s : std::get<zebra::ZebraSolved>(outcome).trace.steps) {
      p.order.push_back({s.position, s.attribute, s.value});
    }
  }
  return p;
}

}  // namespace detail

/// Emits the solver's trace token by token. At a value slot it scores the
/// true value 10, the other members of the solver's candidate set 5 and
/// everything else 0, so its value logits encode f* exactly.
class SolverMockClient : public ModelClient {
 public:
  explicit SolverMockClient(const std::vector<EvalItem>& items, std::size_t batch_limit = 64)
      : batch_limit_(batch_limit) {
    if (items.empty()) throw std::invalid_argument("mock needs at least one puzzle");
    kind_ = items.front().kind;
    for (const auto& item : items) puzzles_.emplace(item.prompt, detail::prepare(item));
  }

  int vocab_size() const override { return codec::Vocabulary(kind_).size(); }
  std::string vocab_hash() const override { return codec::Vocabulary(kind_).hash(); }
  std::size_t batch_limit() const override { return batch_limit_; }

  std::vector<Logits> logits(const std::vector<Prefix>& prefixes) override {
    std::vector<Logits> out;
    out.reserve(prefixes.size());
    for (const auto& p : prefixes) out.push_back(answer(p));
    return out;
  }

 protected:
  struct Where {
    const detail::MockPuzzle* puzzle;
    std::span<const Token> generated;
    std::size_t j;     // complete triplets so far
    std::size_t slot;  // 0, 1 or 2
  };

  Where locate(const Prefix& prefix) const {
    const auto sep = std::find(prefix.begin(), prefix.end(), codec::kSep);
    if (sep == prefix.end()) throw ProtocolError("mock prefix has no SEP");
    const Prefix prompt(prefix.begin(), sep + 1);
    const auto it = puzzles_.find(prompt);
    if (it == puzzles_.end()) throw ProtocolError("mock does not know this puzzle");
    const std::span<const Token> gen(&*sep + 1, static_cast<std::size_t>(prefix.end() - sep - 1));
    return {&it->second, gen, gen.size() / 3, gen.size() % 3};
  }

  /// The true value at the cell named by the last two tokens, or nullopt.
  std::optional<std::pair<std::size_t, int>> slot_cell(const Where& w) const {
    const auto& item = *w.puzzle->item;
    const Token a = w.generated[w.generated.size() - 2];
    const Token b = w.generated[w.generated.size() - 1];
    const auto first = item.kind == codec::PuzzleKind::Sudoku ? codec::as_digit(a) : codec::as_position(a);
    const auto second = item.kind == codec::PuzzleKind::Sudoku ? codec::as_digit(b) : codec::as_attribute(b);
    if (!first || !second || *first > item.m || *second > item.n) return std::nullopt;
    const std::size_t c = item.cell(*first, *second);
    return std::make_pair(c, item.truth[c]);
  }

  Token value_token(int v) const {
    return kind_ == codec::PuzzleKind::Sudoku ? codec::digit_token(v) : codec::value_token(v);
  }

  virtual Logits answer(const Prefix& prefix) const {
    const Where w = locate(prefix);
    const auto& pz = *w.puzzle;
    Logits row(static_cast<std::size_t>(vocab_size()), 0.0);
    if (w.slot != 2 && w.j >= pz.order.size()) {
      row[codec::kEos] = 10.0;
      return row;
    }
    if (w.slot == 0) {
      row[kind_ == codec::PuzzleKind::Sudoku ? codec::digit_token(pz.order[w.j].first)
                                             : codec::position_token(pz.order[w.j].first)] = 10.0;
    } else if (w.slot == 1) {
      row[kind_ == codec::PuzzleKind::Sudoku ? codec::digit_token(pz.order[w.j].second)
                                             : codec::attribute_token(pz.order[w.j].second)] = 10.0;
    } else if (const auto cell = slot_cell(w)) {
      if (kind_ == codec::PuzzleKind::Sudoku && w.j < pz.states.size()) {
        pz.states[w.j].at(static_cast<int>(cell->first)).for_each([&](int v) { row[codec::digit_token(v)] = 5.0; });
      }
      row[value_token(cell->second)] = 10.0;
    }
    return row;
  }

  codec::PuzzleKind kind_ = codec::PuzzleKind::Sudoku;
  std::map<Prefix, detail::MockPuzzle> puzzles_;
  std::size_t batch_limit_;
};

/// The solver mock, except that in one puzzle one solution triplet gets a
/// wrong value.
class OneErrorMockClient : public SolverMockClient {
 public:
  OneErrorMockClient(const std::vector<EvalItem>& items, std::size_t puzzle, std::size_t triplet)
      : SolverMockClient(items), target_(items.at(puzzle).prompt), triplet_(triplet) {}

 protected:
  Logits answer(const Prefix& prefix) const override {
    Logits row = SolverMockClient::answer(prefix);
    const Where w = locate(prefix);
    if (w.slot != 2 || w.j != triplet_ || w.puzzle->item->prompt != target_) return row;
    if (const auto cell = slot_cell(w)) {
      const int range = w.puzzle->item->kind == codec::PuzzleKind::Sudoku ? 9 : w.puzzle->item->m;
      row[value_token(cell->second)] = 0.0;
      row[value_token(cell->second % range + 1)] = 10.0;
    }
    return row;
  }

 private:
  Prefix target_;
  std::size_t triplet_;
};

/// All logits zero.
class UniformClient : public ModelClient {
 public:
  explicit UniformClient(codec::PuzzleKind kind) : vocab_(kind) {}
  int vocab_size() const override { return vocab_.size(); }
  std::string vocab_hash() const override { return vocab_.hash(); }
  std::size_t batch_limit() const override { return 256; }
  std::vector<Logits> logits(const std::vector<Prefix>& prefixes) override {
    return std::vector<Logits>(prefixes.size(), Logits(static_cast<std::size_t>(vocab_.size()), 0.0));
  }

 private:
  codec::Vocabulary vocab_;
};

/// Sudoku only. At a value slot, puts logit 1 on one value drawn uniformly
/// from the naive candidates of the board the prefix describes; the draw is
/// seeded by the prefix. Other slots are uniform.
class RandomCandidateClient : public ModelClient {
 public:
  int vocab_size() const override { return 13; }
  std::string vocab_hash() const override { return codec::Vocabulary(codec::PuzzleKind::Sudoku).hash(); }
  std::size_t batch_limit() const override { return 256; }

  std::vector<Logits> logits(const std::vector<Prefix>& prefixes) override {
    std::vector<Logits> out;
    for (const auto& p : prefixes) out.push_back(answer(p));
    return out;
  }

  static std::uint64_t prefix_seed(const Prefix& p) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(p.data()), p.size() * sizeof(Token)));
  }

 private:
  static Logits answer(const Prefix& p) {
    Logits row(13, 0.0);
    const auto sep = std::find(p.begin(), p.end(), codec::kSep);
    if (sep == p.end() || (p.end() - sep - 1) % 3 != 2) return row;
    sudoku::Board board;
    std::vector<Token> triplets(p.begin() + 1, sep);
    triplets.insert(triplets.end(), sep + 1, p.end() - 2);
    for (std::size_t i = 0; i + 3 <= triplets.size(); i += 3) {
      const auto r = codec::as_digit(triplets[i]), c = codec::as_digit(triplets[i + 1]), v = codec::as_digit(triplets[i + 2]);
      if (r && c && v) board.set(sudoku::cell_index(*r, *c), *v);
    }
    const auto r = codec::as_digit(p[p.size() - 2]), c = codec::as_digit(p[p.size() - 1]);
    if (!r || !c) return row;
    std::vector<int> options;
    sudoku::compute_candidates(board).at(*r, *c).for_each([&](int v) { options.push_back(v); });
    if (options.empty()) return row;
    Rng rng(prefix_seed(p));
    row[codec::digit_token(options[rng.below(options.size())])] = 1.0;
    return row;
  }
};

}  // namespace forge::eval
