#include <gtest/gtest.h>

#include <sstream>

#include "forge/zebra/generator.hpp"
#include "forge/zebra/io.hpp"
#include "forge/zebra/solver.hpp"
#include "oracles.hpp"

using namespace forge::zebra;

namespace {

Assignment table(int m, int n, std::initializer_list<std::initializer_list<int>> rows) {
  Assignment a(m, n);
  int p = 1;
  for (const auto& row : rows) {
    int attr = 1;
    for (int v : row) a.set(p, attr++, v);
    ++p;
  }
  return a;
}

// Rose/silver/beer, Ali/indigo/orange juice, Randy/gold/coffee.
const Assignment kThreeFriends = table(3, 3, {{2, 2, 2}, {1, 3, 1}, {3, 1, 3}});

std::uint16_t bit(int v) { return static_cast<std::uint16_t>(1u << v); }

}  // namespace

TEST(ClueSemantics, EachTypeOnAFixedTable) {
  // position: 1 2 3 4 ; attribute 1 values 4 1 3 2
  const Assignment a = table(4, 1, {{4}, {1}, {3}, {2}});
  const auto v = [](int x) { return Descriptor::attr(1, x); };
  EXPECT_TRUE(evaluate_clue({ClueType::Eq, {Descriptor::position(2), v(1)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::Eq, {Descriptor::position(1), v(1)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::Neq, {Descriptor::position(1), v(1)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::ImmediateLeft, {v(4), v(1)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::ImmediateLeft, {v(1), v(4)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::ImmediateLeft, {v(2), v(4)}}, a));  // v(2) sits at the last position
  EXPECT_TRUE(evaluate_clue({ClueType::NeighbourOf, {v(1), v(4)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::NeighbourOf, {v(4), v(1)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::NeighbourOf, {v(4), v(3)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::EndsIn, {v(4)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::EndsIn, {v(2)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::EndsIn, {v(3)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::LeftOf, {v(4), v(2)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::LeftOf, {v(2), v(4)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::InBetween, {v(1), v(4), v(3)}}, a));
  EXPECT_TRUE(evaluate_clue({ClueType::InBetween, {v(1), v(3), v(4)}}, a));
  EXPECT_FALSE(evaluate_clue({ClueType::InBetween, {v(4), v(1), v(3)}}, a));
}

TEST(ClueSemantics, CanonicalFormIsOrderInsensitiveForSymmetricTypes) {
  const auto x = Descriptor::attr(1, 1), y = Descriptor::attr(2, 3), z = Descriptor::position(2);
  EXPECT_TRUE((Clue{ClueType::Eq, {x, y}}).equivalent({ClueType::Eq, {y, x}}));
  EXPECT_TRUE((Clue{ClueType::NeighbourOf, {x, y}}).equivalent({ClueType::NeighbourOf, {y, x}}));
  EXPECT_FALSE((Clue{ClueType::LeftOf, {x, y}}).equivalent({ClueType::LeftOf, {y, x}}));
  EXPECT_TRUE((Clue{ClueType::InBetween, {z, x, y}}).equivalent({ClueType::InBetween, {z, y, x}}));
  EXPECT_FALSE((Clue{ClueType::InBetween, {z, x, y}}).equivalent({ClueType::InBetween, {x, z, y}}));
}

TEST(ClueSemantics, ValidationRejectsMalformedClues) {
  EXPECT_THROW(validate_clue({ClueType::Eq, {Descriptor::attr(1, 1)}}, 3, 3), forge::FormatError);
  EXPECT_THROW(validate_clue({ClueType::Eq, {Descriptor::attr(1, 1), Descriptor::attr(1, 1)}}, 3, 3),
               forge::FormatError);
  EXPECT_THROW(validate_clue({ClueType::EndsIn, {Descriptor::attr(4, 1)}}, 3, 3), forge::FormatError);
  EXPECT_THROW(validate_clue({ClueType::EndsIn, {Descriptor::position(4)}}, 3, 3), forge::FormatError);
  EXPECT_NO_THROW(validate_clue({ClueType::EndsIn, {Descriptor::attr(3, 3)}}, 3, 3));
}

// Relabeling the values of one attribute, in the table and in the clue alike,
// never changes the verdict.
TEST(ClueSemantics, InvariantUnderValueRelabeling) {
  forge::Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const Assignment a = random_assignment(4, 3, rng);
    Clue c;
    c.type = kClueTypes[rng.below(7)];
    for (int k = 0; k < arity(c.type); ++k) c.operands.push_back(detail::sample_descriptor(4, 3, rng));
    std::vector<std::vector<int>> relabel(4);
    for (int attr = 1; attr <= 3; ++attr) {
      relabel[attr] = {0, 1, 2, 3, 4};
      rng.shuffle(std::span<int>(relabel[attr]).subspan(1));
    }
    Assignment b(4, 3);
    for (int p = 1; p <= 4; ++p) {
      for (int attr = 1; attr <= 3; ++attr) b.set(p, attr, relabel[attr][a.value(p, attr)]);
    }
    Clue d = c;
    for (auto& op : d.operands) {
      if (!op.is_position()) op.value = relabel[op.attribute][op.value];
    }
    EXPECT_EQ(evaluate_clue(c, a), evaluate_clue(d, b));
  }
}

TEST(ThreeFriends, ReferenceEnumerationFindsOneModel) {
  const auto models = oracle::zebra_models(3, 3, oracle::three_friends_clues());
  ASSERT_EQ(models.size(), 1u);
  EXPECT_EQ(models.front(), kThreeFriends);
  EXPECT_EQ(oracle::zebra_models(3, 3, {}).size(), 216u);
  EXPECT_TRUE(satisfies_all(oracle::three_friends_clues(), kThreeFriends));
  EXPECT_TRUE(evaluate_clue(oracle::three_friends_clues()[2], kThreeFriends));
}

TEST(ThreeFriends, SolverAndBruteForceAgree) {
  const auto clues = oracle::three_friends_clues();
  const auto outcome = solve_zebra(3, 3, clues);
  ASSERT_TRUE(std::holds_alternative<ZebraSolved>(outcome));
  const auto& solved = std::get<ZebraSolved>(outcome);
  EXPECT_EQ(solved.assignment, kThreeFriends);
  EXPECT_EQ(solved.trace.steps.size(), 9u);
  const auto bf = brute_force_zebra(3, 3, clues);
  EXPECT_EQ(bf.count, 1);
  EXPECT_EQ(bf.solutions.front(), kThreeFriends);
}

TEST(Subset, SingleEqClueCollapsesOneCell) {
  const auto clues = oracle::three_friends_clues();
  const auto next = deduce_with_subset(ZebraGrid::full(3, 3), clues, {2});
  ASSERT_TRUE(next);
  EXPECT_EQ(next->at(1, 1), bit(2));
  EXPECT_EQ(next->at(2, 1), bit(1) | bit(3));
  EXPECT_EQ(next->at(1, 2), bit(1) | bit(2) | bit(3));
}

TEST(Subset, FirstTwoCluesForceTheDrinkColumn) {
  // Only one of the six drink orders satisfies both clues.
  const auto clues = oracle::three_friends_clues();
  std::vector<int> order = {1, 2, 3};
  int satisfying = 0;
  do {
    for (int indigo = 1; indigo <= 3; ++indigo) {
      const int oj = std::find(order.begin(), order.end(), 1) - order.begin() + 1;
      const int coffee = std::find(order.begin(), order.end(), 3) - order.begin() + 1;
      const int beer = std::find(order.begin(), order.end(), 2) - order.begin() + 1;
      if (oj + 1 == coffee && beer < indigo) {
        ++satisfying;
        EXPECT_EQ(order, (std::vector<int>{2, 1, 3}));
        break;
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));
  EXPECT_EQ(satisfying, 1);

  const auto next = deduce_with_subset(ZebraGrid::full(3, 3), clues, {0, 1});
  ASSERT_TRUE(next);
  EXPECT_EQ(next->at(1, 3), bit(2));
  EXPECT_EQ(next->at(2, 3), bit(1));
  EXPECT_EQ(next->at(3, 3), bit(3));
}

TEST(Subset, NoProgressAndContradiction) {
  const auto clues = oracle::three_friends_clues();
  auto grid = ZebraGrid::full(3, 3);
  grid.assign(1, 1, bit(2));
  grid.assign(2, 1, bit(1) | bit(3));
  grid.assign(3, 1, bit(1) | bit(3));
  EXPECT_FALSE(deduce_with_subset(grid, clues, {2}).has_value());

  grid.assign(1, 1, bit(1));
  grid.assign(2, 1, bit(2) | bit(3));
  grid.assign(3, 1, bit(2) | bit(3));
  EXPECT_THROW(deduce_with_subset(grid, clues, {2}), ZebraContradiction);
  EXPECT_THROW(deduce_with_subset(grid, clues, {}), std::invalid_argument);
}

// Within the columns a subset names, the subset step keeps exactly the values
// used by some completion of the grid that satisfies the subset's clues.
TEST(Subset, ExactAgainstEnumeration) {
  forge::Rng rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 3 + static_cast<int>(rng.below(2));
    const int n = 3;
    const Assignment hidden = random_assignment(m, n, rng);
    std::vector<Clue> clues;
    for (int k = 0; k < 3; ++k) clues.push_back(sample_true_clue(hidden, clues, rng));
    ZebraGrid grid = ZebraGrid::full(m, n);
    for (int p = 1; p <= m; ++p) {
      for (int a = 1; a <= n; ++a) {
        if (rng.below(3) != 0) continue;
        std::uint16_t mask = grid.at(p, a);
        for (int v = 1; v <= m; ++v) {
          if (v != hidden.value(p, a) && rng.below(2) == 0) mask = static_cast<std::uint16_t>(mask & ~bit(v));
        }
        grid.assign(p, a, mask);
      }
    }
    std::vector<int> subset;
    for (int k = 0; k < 3; ++k) {
      if (k == 0 || rng.below(2) == 0) subset.push_back(k);
    }
    std::vector<Clue> chosen;
    for (int k : subset) chosen.push_back(clues[k]);

    ZebraGrid expect(ZebraGrid::full(m, n));
    for (int p = 1; p <= m; ++p) {
      for (int a = 1; a <= n; ++a) expect.assign(p, a, 0);
    }
    for (const auto& model : oracle::zebra_models(m, n, chosen)) {
      if (!grid.admits(model)) continue;
      for (int p = 1; p <= m; ++p) {
        for (int a = 1; a <= n; ++a) expect.assign(p, a, expect.at(p, a) | bit(model.value(p, a)));
      }
    }
    // Columns the subset never names are left alone.
    std::uint32_t named = 0;
    for (const auto& c : chosen) named |= c.attribute_mask();
    for (int p = 1; p <= m; ++p) {
      for (int a = 1; a <= n; ++a) {
        if (!((named >> a) & 1u)) expect.assign(p, a, grid.at(p, a));
      }
    }
    const auto got = deduce_with_subset(grid, clues, subset);
    if (got) {
      EXPECT_EQ(*got, expect) << "trial " << trial;
    } else {
      EXPECT_EQ(grid, expect) << "trial " << trial;
    }
  }
}

TEST(Solver, EmptyClueSetIsStuck) {
  const auto outcome = solve_zebra(3, 3, {});
  ASSERT_TRUE(std::holds_alternative<ZebraStuck>(outcome));
  EXPECT_EQ(std::get<ZebraStuck>(outcome).grid, ZebraGrid::full(3, 3));
  EXPECT_EQ(brute_force_zebra(3, 3, {}).count, 216);
}

TEST(BruteForce, ContradictionAndBudget) {
  auto clues = oracle::three_friends_clues();
  clues.push_back({ClueType::Eq, {Descriptor::position(1), Descriptor::attr(1, 1)}});
  EXPECT_EQ(brute_force_zebra(3, 3, clues).count, 0);
  EXPECT_THROW(brute_force_zebra(6, 6, {}, 1e6), std::length_error);
}

TEST(Generator, DeterministicPerSeed) {
  EXPECT_EQ(generate_puzzle(3, 4, 7), generate_puzzle(3, 4, 7));
  EXPECT_NE(generate_puzzle(3, 4, 7).clues, generate_puzzle(3, 4, 8).clues);
}

TEST(Generator, PuzzlesAreUniqueSolvableAndMinimal) {
  for (int m = 3; m <= 4; ++m) {
    for (int n = 3; n <= 4; ++n) {
      for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto pz = generate_puzzle(m, n, seed * 31 + 5);
        ASSERT_TRUE(pz.solution.is_permutation_table());
        EXPECT_TRUE(satisfies_all(pz.clues, pz.solution));
        const auto models = oracle::zebra_models(m, n, pz.clues);
        ASSERT_EQ(models.size(), 1u);
        EXPECT_EQ(models.front(), pz.solution);
        const auto outcome = solve_zebra(pz);
        ASSERT_TRUE(std::holds_alternative<ZebraSolved>(outcome));
        const auto& solved = std::get<ZebraSolved>(outcome);
        EXPECT_EQ(solved.assignment, pz.solution);
        EXPECT_EQ(solved.trace.used_clues().size(), pz.clues.size());
        for (std::size_t i = 0; i < pz.clues.size(); ++i) {
          for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(pz.clues[i].equivalent(pz.clues[j]));
        }
      }
    }
  }
}

// Replaying the deducer one event at a time: every event is reproduced by its
// own subset on the previous grid, and the hidden solution always survives.
TEST(Solver, TraceReplayAndSoundness) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pz = generate_puzzle(4, 4, seed);
    ZebraDeducer engine(pz.m, pz.n, pz.clues);
    std::vector<ZebraStep> committed;
    while (!engine.grid().complete()) {
      const ZebraGrid before = engine.grid();
      const auto ev = engine.step();
      ASSERT_TRUE(ev);
      ASSERT_LE(ev->subset.size(), 3u);
      const auto again = deduce_with_subset(before, pz.clues, ev->subset);
      ASSERT_TRUE(again);
      EXPECT_EQ(*again, engine.grid());
      EXPECT_TRUE(engine.grid().admits(pz.solution));
      EXPECT_TRUE(engine.grid().is_subset_of(before));
      for (const auto& st : ev->committed) EXPECT_EQ(pz.solution.value(st.position, st.attribute), st.value);
      committed.insert(committed.end(), ev->committed.begin(), ev->committed.end());
    }
    EXPECT_EQ(committed.size(), static_cast<std::size_t>(pz.m * pz.n));
  }
}

TEST(Io, LineRoundTripAndHeader) {
  ZebraPuzzle pz{3, 3, oracle::three_friends_clues(), kThreeFriends};
  EXPECT_EQ(puzzle_from_line(puzzle_to_line(pz)), pz);
  std::stringstream file;
  file << header_line() << '\n' << puzzle_to_line(pz) << '\n' << puzzle_to_line(generate_puzzle(4, 3, 2)) << '\n';
  const auto back = read_puzzles(file);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], pz);
  std::stringstream bad("{\"format\":\"other\"}\n");
  EXPECT_THROW(read_puzzles(bad), forge::FormatError);
  EXPECT_THROW(puzzle_from_line("{\"m\":3}"), forge::FormatError);
  EXPECT_THROW(puzzle_from_line("not json"), forge::FormatError);
  EXPECT_NE(render_puzzle(pz).find("ImmediateLeft(attr3=1, attr3=3)"), std::string::npos);
}
