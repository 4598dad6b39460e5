#include <gtest/gtest.h>

#include "forge/sudoku/generator.hpp"
#include "forge/sudoku/oracle.hpp"
#include "forge/sudoku/solver.hpp"
#include "oracles.hpp"

using namespace forge::sudoku;

TEST(BruteForce, CompleteBoardIsAFixedPoint) {
  const Board solved = parse_board(oracle::kWikipediaSolution);
  const auto r = brute_force_solve(solved);
  EXPECT_EQ(r.count, 1);
  ASSERT_TRUE(r.first);
  EXPECT_TRUE(r.first->same_values(solved));
}

TEST(BruteForce, EmptyBoardHitsTheCap) {
  EXPECT_EQ(brute_force_solve(Board{}, 2).count, 2);
  EXPECT_EQ(brute_force_solve(Board{}, 5).count, 5);
}

TEST(BruteForce, InvalidBoardThrows) {
  Board b;
  b.set(0, 3);
  b.set(80, 3);
  EXPECT_NO_THROW(brute_force_solve(b));
  b.set(8, 3);
  EXPECT_THROW(brute_force_solve(b), forge::ValidityError);
}

TEST(BruteForce, MatchesNaiveReferenceOnKnownPuzzles) {
  for (const char* text : {oracle::kWikipedia, oracle::kHard}) {
    const auto ref = oracle::sudoku_solutions(text);
    const auto got = brute_force_solve(parse_board(text));
    EXPECT_EQ(got.count, ref.count);
    ASSERT_TRUE(got.first);
    EXPECT_EQ(got.first->to_string(), ref.first);
  }
}

TEST(BruteForce, DetectsMultipleSolutions) {
  std::string text = oracle::kWikipediaSolution;
  // Every other cell blanked; counts compared up to 3.
  for (int i = 0; i < 81; i += 2) text[i] = '.';
  const auto ref = oracle::sudoku_solutions(text, 3);
  EXPECT_EQ(brute_force_solve(parse_board(text), 3).count, ref.count);
}

TEST(Generator, PuzzlesAreUniqueAndConsistent) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto g = generate_sudoku(seed, 26);
    EXPECT_TRUE(g.solution.complete());
    EXPECT_TRUE(g.solution.valid());
    EXPECT_GE(g.puzzle.given_count(), 26);
    EXPECT_EQ(g.puzzle.given_count(), g.puzzle.filled_count());
    const auto ref = oracle::sudoku_solutions(g.puzzle.to_string());
    EXPECT_EQ(ref.count, 1);
    EXPECT_EQ(ref.first, g.solution.to_string());
  }
  EXPECT_EQ(generate_sudoku(5, 30).puzzle, generate_sudoku(5, 30).puzzle);
  EXPECT_NE(generate_sudoku(5, 30).puzzle, generate_sudoku(6, 30).puzzle);
}

TEST(Rating, SinglesOnlyPuzzleNeedsNoGuess) {
  const auto r = rate_difficulty(parse_board(oracle::kWikipedia), 5, 1);
  EXPECT_EQ(r.average_guesses, 0.0);
  EXPECT_EQ(r.max_guess_depth, 0);
  EXPECT_EQ(r.trials, 5);
}

TEST(Rating, SeededDeterminism) {
  const Board hard = parse_board(oracle::kHard);
  EXPECT_EQ(rate_difficulty(hard, 10, 3), rate_difficulty(hard, 10, 3));
  const auto r = rate_difficulty(hard, 10, 3);
  EXPECT_GT(r.average_guesses, 0.0);
  EXPECT_GT(r.max_guess_depth, 0);
}

TEST(Rating, ZeroStatusAgreesAcrossTrialCounts) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Board p = generate_sudoku(seed, 24).puzzle;
    const bool few = rate_difficulty(p, 1, seed).average_guesses == 0.0;
    const bool many = rate_difficulty(p, 100, seed).average_guesses == 0.0;
    EXPECT_EQ(few, many);
  }
}

TEST(Rating, RejectsBadInput) {
  EXPECT_THROW(rate_difficulty(parse_board(oracle::kWikipedia), 0, 1), forge::ValidityError);
  // Valid as a partial board, but r1c3 has no candidate left.
  Board dead;
  for (int c = 1; c <= 8; ++c) dead.set(cell_index(1, c), c);
  dead.set(cell_index(2, 9), 9);
  EXPECT_THROW(rate_difficulty(dead, 1, 1), forge::ValidityError);
}

TEST(Oracle, AgreesWithTracesOnGeneratedPuzzles) {
  int solved = 0;
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto g = generate_sudoku(seed, 28);
    const auto outcome = solve_with_trace(g.puzzle);
    if (!std::holds_alternative<ReasoningTrace>(outcome)) continue;
    ++solved;
    const auto bf = brute_force_solve(g.puzzle);
    ASSERT_EQ(bf.count, 1);
    EXPECT_TRUE(std::get<ReasoningTrace>(outcome).final_board().same_values(*bf.first));
  }
  EXPECT_GT(solved, 10);
}
