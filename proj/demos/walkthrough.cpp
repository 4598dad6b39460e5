// Walks one Sudoku and one Zebra puzzle through solver, codec and the eval
// harness, printing each stage.
//
//   ./build/bin/forge_walkthrough [seed]

#include <iostream>
#include <string>

#include "forge/codec/sequence.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/eval/mocks.hpp"
#include "forge/eval/report.hpp"
#include "forge/sudoku/generator.hpp"
#include "forge/zebra/generator.hpp"
#include "forge/zebra/io.hpp"

using namespace forge;

namespace {

std::string surfaces(const codec::Vocabulary& v, std::span<const codec::Token> tokens) {
  std::string out;
  for (auto t : tokens) out += (out.empty() ? "" : " ") + v.surface(t);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 3;

  // Sudoku: a generated puzzle the strategy solver can finish.
  std::uint64_t s = seed;
  sudoku::GeneratedPuzzle g;
  sudoku::ReasoningTrace trace;
  for (;; ++s) {
    g = sudoku::generate_sudoku(s, 30);
    auto outcome = sudoku::solve_with_trace(g.puzzle);
    if (auto* t = std::get_if<sudoku::ReasoningTrace>(&outcome)) {
      trace = std::move(*t);
      break;
    }
  }
  std::cout << "sudoku (seed " << s << ", " << g.puzzle.given_count() << " givens)\n"
            << sudoku::render_board(g.puzzle) << "\nfirst steps of the solver:\n";
  for (std::size_t k = 0; k < 6; ++k) {
    const auto& st = trace.steps[k];
    std::cout << "  r" << st.row << "c" << st.col << " = " << st.value << "  (" << sudoku::strategy_name(st.strategy)
              << ")\n";
  }
  const codec::Vocabulary sv(codec::PuzzleKind::Sudoku);
  const auto seq = codec::encode_sudoku(g.puzzle, trace, codec::Ordering::SolverDecomposed, 0);
  std::cout << "sequence: " << seq.tokens.size() << " tokens, SEP at " << seq.given_len << "\n  ... "
            << surfaces(sv, std::span(seq.tokens).subspan(seq.given_len, 19)) << " ...\n\n";

  // Zebra: generate, solve, encode.
  const auto pz = zebra::generate_puzzle(4, 3, seed);
  const auto zt = std::get<zebra::ZebraSolved>(zebra::solve_zebra(pz)).trace;
  std::cout << zebra::render_puzzle(pz) << "deduction order:";
  for (const auto& st : zt.steps) std::cout << " p" << st.position << "a" << st.attribute << "=" << st.value;
  const codec::Vocabulary zv(codec::PuzzleKind::Zebra);
  const auto zseq = codec::encode_zebra(pz, zt, codec::Ordering::SolverDecomposed, 0);
  std::cout << "\nsequence: " << surfaces(zv, zseq.tokens) << "\n\n";

  // A model that answers from the solver scores perfectly; one wrong value
  // in one puzzle costs exactly one cell.
  std::vector<eval::EvalItem> items;
  for (std::uint64_t k = s; items.size() < 8; ++k) {
    const auto p = sudoku::generate_sudoku(k, 30);
    if (std::holds_alternative<sudoku::ReasoningTrace>(sudoku::solve_with_trace(p.puzzle))) {
      items.push_back(eval::sudoku_item(items.size(), p.puzzle, p.solution, 0.0));
    }
  }
  eval::EvalData data{codec::PuzzleKind::Sudoku, sv.hash(), sv.size(), "walkthrough", std::move(items)};
  eval::EvalConfig cfg;
  cfg.beam = 3;
  cfg.hinted = true;
  eval::OneErrorMockClient model(data.items, 2, 5);
  std::cout << eval::render_text(eval::evaluate_model(model, data, cfg));
}
