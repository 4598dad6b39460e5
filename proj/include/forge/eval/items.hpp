#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forge/codec/sequence.hpp"
#include "forge/eval/client.hpp"
#include "forge/pipeline/dataset.hpp"

namespace forge::eval {

/// One test puzzle as the harness sees it: the prompt to feed and the
/// values every cell must end up with.
struct EvalItem {
  std::size_t index = 0;
  codec::PuzzleKind kind = codec::PuzzleKind::Sudoku;
  Prefix prompt;  // BOS .. SEP
  int m = 9;      // rows (Sudoku) or positions (Zebra)
  int n = 9;      // columns or attributes
  std::vector<int> truth;    // m*n values, row-major
  std::vector<bool> given;   // m*n flags
  int givens = 0;
  int empties = 0;
  double difficulty = 0.0;
  std::string bucket;
  sudoku::Board puzzle;      // Sudoku only
  zebra::ZebraPuzzle zebra;  // Zebra only

  std::size_t cell(int first, int second) const { return static_cast<std::size_t>((first - 1) * n + (second - 1)); }
};

inline EvalItem sudoku_item(std::size_t index, const sudoku::Board& puzzle, const sudoku::Board& solution,
                            double difficulty = 0.0) {
  EvalItem it;
  it.index = index;
  it.kind = codec::PuzzleKind::Sudoku;
  it.prompt = codec::sudoku_prefix(puzzle);
  it.puzzle = puzzle;
  for (int i = 0; i < sudoku::kCells; ++i) {
    it.truth.push_back(solution.at(i));
    it.given.push_back(!puzzle.empty_at(i));
  }
  it.givens = puzzle.filled_count();
  it.empties = sudoku::kCells - it.givens;
  it.difficulty = difficulty;
  it.bucket = pipeline::bucket_label(difficulty);
  return it;
}

inline EvalItem zebra_item(std::size_t index, const zebra::ZebraPuzzle& p) {
  EvalItem it;
  it.index = index;
  it.kind = codec::PuzzleKind::Zebra;
  it.prompt = codec::zebra_prefix(p);
  it.m = p.m;
  it.n = p.n;
  it.zebra = p;
  for (int pos = 1; pos <= p.m; ++pos) {
    for (int a = 1; a <= p.n; ++a) it.truth.push_back(p.solution.value(pos, a));
  }
  it.given.assign(it.truth.size(), false);
  it.empties = p.m * p.n;
  it.bucket = std::to_string(p.m) + "x" + std::to_string(p.n);
  return it;
}

/// The test set of a built dataset, plus what a client must declare to use it.
struct EvalData {
  codec::PuzzleKind kind = codec::PuzzleKind::Sudoku;
  std::string vocab_hash;
  int vocab_size = 0;
  std::string source;
  std::vector<EvalItem> items;
};

inline EvalData load_eval_data(const std::filesystem::path& dir, const std::string& split = "test") {
  const auto loaded = pipeline::load_split(dir, split);
  EvalData data;
  data.kind = loaded.kind;
  data.vocab_hash = loaded.manifest.at("vocabulary").at("hash").get<std::string>();
  data.vocab_size = loaded.manifest.at("vocabulary").at("size").get<int>();
  data.source = dir.string();
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    const auto d = codec::decode_sequence(std::span<const Token>(loaded.records[i]), loaded.kind);
    if (loaded.kind == codec::PuzzleKind::Sudoku) {
      const double difficulty = loaded.meta[i].value("difficulty", 0.0);
      data.items.push_back(sudoku_item(i, codec::givens_board(d), codec::completed_board(d), difficulty));
    } else {
      data.items.push_back(zebra_item(i, codec::zebra_from_decoded(d)));
    }
  }
  return data;
}

/// What one decoded answer earned.
struct PuzzleResult {
  std::size_t index = 0;
  int empties = 0;
  int correct = 0;
  bool solved = false;
  bool terminated = false;   // ended with EOS
  bool malformed = false;    // broken triplet or foreign token
  int duplicates = 0;        // repeated cells, graded by first occurrence
  int extraneous = 0;        // triplets naming a given or out-of-range cell
  std::vector<int> mistakes; // filled count at each mistake, in emission order; missing cells last
  std::optional<std::string> error;
  std::vector<Token> generated;
  double score = 0.0;
  // The first wrong triplet, if the first mistake was one.
  std::optional<codec::Triplet> first_wrong;
  std::vector<codec::Triplet> accepted_before_first;  // correct triplets before the first mistake
};

/// Grades the solution part of a decoded answer by cell coordinates, so the
/// emission order never matters. Missing cells are mistakes made at the
/// final filled count.
inline PuzzleResult grade(const EvalItem& item, std::span<const Token> generated) {
  PuzzleResult r;
  r.index = item.index;
  r.empties = item.empties;
  r.generated.assign(generated.begin(), generated.end());
  std::vector<bool> seen(item.truth.size(), false);
  int filled = item.givens;
  std::size_t i = 0;
  while (i < generated.size()) {
    if (generated[i] == codec::kEos) {
      r.terminated = true;
      break;
    }
    if (generated[i] == codec::kPad) break;
    if (i + 3 > generated.size()) {
      r.malformed = true;
      break;
    }
    const auto t = codec::detail::read_solution_triplet(generated.subspan(i, 3), item.kind);
    i += 3;
    if (!t) {
      r.malformed = true;
      break;
    }
    if (t->first > item.m || t->second > item.n || item.given[item.cell(t->first, t->second)]) {
      ++r.extraneous;
      continue;
    }
    const std::size_t c = item.cell(t->first, t->second);
    if (seen[c]) {
      ++r.duplicates;
      continue;
    }
    seen[c] = true;
    if (t->third == item.truth[c]) {
      ++r.correct;
      if (r.mistakes.empty()) r.accepted_before_first.push_back(*t);
    } else {
      if (r.mistakes.empty()) r.first_wrong = *t;
      r.mistakes.push_back(filled);
    }
    ++filled;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!item.given[c] && !seen[c]) r.mistakes.push_back(filled);
  }
  r.solved = r.correct == item.empties;
  return r;
}

}  // namespace forge::eval
