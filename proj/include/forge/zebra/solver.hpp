#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "forge/zebra/puzzle.hpp"

namespace forge::zebra {

/// The clue set admits no assignment consistent with the current grid.
class ZebraContradiction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate values (bits 1..m) for every (position, attribute) cell.
class ZebraGrid {
 public:
  ZebraGrid() = default;

  static ZebraGrid full(int m, int n) {
    ZebraGrid g;
    g.m_ = m;
    g.n_ = n;
    g.sets_.assign(static_cast<std::size_t>(m * n), static_cast<std::uint16_t>(((1u << m) - 1) << 1));
    return g;
  }

  int entities() const { return m_; }
  int attributes() const { return n_; }
  std::uint16_t at(int p, int a) const { return sets_[idx(p, a)]; }
  void assign(int p, int a, std::uint16_t mask) { sets_[idx(p, a)] = mask; }
  bool committed(int p, int a) const { return std::popcount(at(p, a)) == 1; }
  int committed_value(int p, int a) const { return std::countr_zero(at(p, a)); }

  bool complete() const {
    for (auto s : sets_) {
      if (std::popcount(s) != 1) return false;
    }
    return true;
  }

  bool is_subset_of(const ZebraGrid& other) const {
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      if (sets_[i] & ~other.sets_[i]) return false;
    }
    return true;
  }

  bool admits(const Assignment& asg) const {
    for (int p = 1; p <= m_; ++p) {
      for (int a = 1; a <= n_; ++a) {
        if (!((at(p, a) >> asg.value(p, a)) & 1u)) return false;
      }
    }
    return true;
  }

  Assignment to_assignment() const {
    Assignment asg(m_, n_);
    for (int p = 1; p <= m_; ++p) {
      for (int a = 1; a <= n_; ++a) asg.set(p, a, committed_value(p, a));
    }
    return asg;
  }

  bool operator==(const ZebraGrid&) const = default;

 private:
  std::size_t idx(int p, int a) const { return static_cast<std::size_t>((p - 1) * n_ + (a - 1)); }
  int m_ = 0;
  int n_ = 0;
  std::vector<std::uint16_t> sets_;
};

namespace detail {

inline constexpr int kMaxEntities = 15;
inline constexpr int kMaxVars = 9;  // three clues with at most three operands each

inline bool augment(const std::uint16_t* adj, int p, std::uint16_t& seen, int* owner) {
  for (std::uint16_t b = adj[p]; b; b &= static_cast<std::uint16_t>(b - 1)) {
    const int v = std::countr_zero(b);
    if ((seen >> v) & 1u) continue;
    seen |= static_cast<std::uint16_t>(1u << v);
    if (owner[v] < 0 || augment(adj, owner[v], seen, owner)) {
      owner[v] = p;
      return true;
    }
  }
  return false;
}

/// Kuhn's augmenting-path matching of positions (0..m-1) to values (bits in
/// adj). Fills match_value[p] and returns true iff the matching is perfect.
inline bool perfect_matching(const std::uint16_t* adj, int m, int* match_value) {
  int owner[kMaxEntities + 1];
  std::fill(std::begin(owner), std::end(owner), -1);
  for (int p = 0; p < m; ++p) {
    std::uint16_t seen = 0;
    if (!augment(adj, p, seen, owner)) return false;
  }
  for (int v = 1; v <= kMaxEntities; ++v) {
    if (owner[v] >= 0) match_value[owner[v]] = v;
  }
  return true;
}

/// Marks in `support` every edge (p, v) of adj that lies on some perfect
/// matching. Returns false if adj has no perfect matching at all.
inline bool matching_support(const std::uint16_t* adj, int m, std::uint16_t* support) {
  int match[kMaxEntities];
  if (!perfect_matching(adj, m, match)) return false;
  for (int p = 0; p < m; ++p) support[p] = static_cast<std::uint16_t>(1u << match[p]);
  std::uint16_t forced[kMaxEntities];
  for (int p = 0; p < m; ++p) {
    for (std::uint16_t b = adj[p] & ~support[p]; b; b &= static_cast<std::uint16_t>(b - 1)) {
      const int v = std::countr_zero(b);
      if ((support[p] >> v) & 1u) continue;
      const std::uint16_t bit = static_cast<std::uint16_t>(1u << v);
      for (int q = 0; q < m; ++q) forced[q] = q == p ? bit : static_cast<std::uint16_t>(adj[q] & ~bit);
      if (perfect_matching(forced, m, match)) {
        for (int q = 0; q < m; ++q) support[q] |= static_cast<std::uint16_t>(1u << match[q]);
      }
    }
  }
  return true;
}

}  // namespace detail

/// Shrinks the grid using the clues `subset` (indices into `clues`) together
/// with the rule that every attribute column is a permutation.
///
/// All completions of the attribute columns named by the subset that agree
/// with the grid are enumerated; a value survives at a cell iff some
/// completion satisfying every clue of the subset uses it. Returns the
/// shrunken grid when at least one cell lost a value, nullopt otherwise.
/// Throws ZebraContradiction when no completion exists.
///
/// The enumeration runs over where each named (attribute, value) pair sits;
/// the rest of each column is handled by bipartite matching, memoized on the
/// placement of that column's named values.
inline std::optional<ZebraGrid> deduce_with_subset(const ZebraGrid& grid, const std::vector<Clue>& clues,
                                                   const std::vector<int>& subset) {
  using detail::kMaxEntities;
  using detail::kMaxVars;
  const int m = grid.entities();
  if (subset.empty() || subset.size() > 3) throw std::invalid_argument("clue subset size must be 1..3");

  struct Var {
    int attribute;
    int value;
    std::uint16_t domain;  // positions, bits 1..m
  };
  std::array<Var, kMaxVars> vars{};
  int var_count = 0;
  // operand_var[c][k]: variable of operand k of subset clue c, or -1 for a position literal.
  std::array<std::array<int, 3>, 3> operand_var{};
  std::array<int, 3> check_at{-1, -1, -1};
  for (std::size_t c = 0; c < subset.size(); ++c) {
    const Clue& clue = clues[static_cast<std::size_t>(subset[c])];
    operand_var[c] = {-1, -1, -1};
    for (std::size_t k = 0; k < clue.operands.size(); ++k) {
      const auto& d = clue.operands[k];
      if (d.is_position()) continue;
      int found = -1;
      for (int x = 0; x < var_count; ++x) {
        if (vars[x].attribute == d.attribute && vars[x].value == d.value) found = x;
      }
      if (found < 0) {
        std::uint16_t domain = 0;
        for (int p = 1; p <= m; ++p) {
          if ((grid.at(p, d.attribute) >> d.value) & 1u) domain |= static_cast<std::uint16_t>(1u << p);
        }
        vars[var_count] = {d.attribute, d.value, domain};
        found = var_count++;
      }
      operand_var[c][k] = found;
      check_at[c] = std::max(check_at[c], found);
    }
  }

  // Distinct attributes in order of first appearance, with the variable after
  // which each column is fully placed.
  struct Column {
    int attribute;
    int last_var;
    std::uint16_t fixed_values;
    std::array<std::uint16_t, kMaxEntities> survivors;
    struct Entry {
      std::uint64_t key;
      bool feasible;
      bool merged;
      std::array<std::uint16_t, kMaxEntities> support;
    };
    std::vector<Entry> memo;  // few distinct placements per call; linear lookup
  };
  std::vector<Column> columns;
  std::array<int, kMaxVars> column_of{};
  for (int x = 0; x < var_count; ++x) {
    int found = -1;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].attribute == vars[x].attribute) found = static_cast<int>(i);
    }
    if (found < 0) {
      columns.push_back({vars[x].attribute, x, 0, {}, {}});
      found = static_cast<int>(columns.size()) - 1;
    }
    column_of[x] = found;
    columns[found].last_var = x;
    columns[found].fixed_values |= static_cast<std::uint16_t>(1u << vars[x].value);
  }

  std::array<int, kMaxVars> var_pos{};
  auto clue_holds = [&](std::size_t c) {
    const Clue& clue = clues[static_cast<std::size_t>(subset[c])];
    int pos[3] = {0, 0, 0};
    for (std::size_t k = 0; k < clue.operands.size(); ++k) {
      pos[k] = operand_var[c][k] < 0 ? clue.operands[k].value : var_pos[operand_var[c][k]];
    }
    return holds_at_positions(clue.type, pos, m);
  };
  for (std::size_t c = 0; c < subset.size(); ++c) {
    if (check_at[c] < 0 && !clue_holds(c)) throw ZebraContradiction("clue over position literals is false");
  }

  auto column_entry = [&](Column& col) -> Column::Entry& {
    std::uint64_t key = 0;
    for (int x = 0; x < var_count; ++x) {
      if (vars[x].attribute == col.attribute) key = (key << 4) | static_cast<std::uint64_t>(var_pos[x]);
    }
    for (auto& e : col.memo) {
      if (e.key == key) return e;
    }
    std::array<std::uint16_t, kMaxEntities> adj{};
    for (int p = 1; p <= m; ++p) adj[p - 1] = static_cast<std::uint16_t>(grid.at(p, col.attribute) & ~col.fixed_values);
    for (int x = 0; x < var_count; ++x) {
      if (vars[x].attribute == col.attribute) adj[var_pos[x] - 1] = static_cast<std::uint16_t>(1u << vars[x].value);
    }
    auto& e = col.memo.emplace_back();
    e.key = key;
    e.merged = false;
    e.support.fill(0);
    e.feasible = detail::matching_support(adj.data(), m, e.support.data());
    return e;
  };

  bool any_leaf = false;
  bool saturated = false;
  auto visit_leaf = [&] {
    any_leaf = true;
    bool changed = false;
    for (auto& col : columns) {
      auto& entry = column_entry(col);
      if (entry.merged) continue;
      entry.merged = true;
      for (int p = 0; p < m; ++p) {
        const auto before = col.survivors[p];
        col.survivors[p] |= entry.support[p];
        changed = changed || col.survivors[p] != before;
      }
    }
    if (!changed) return;
    for (const auto& col : columns) {
      for (int p = 1; p <= m; ++p) {
        if (col.survivors[p - 1] != grid.at(p, col.attribute)) return;
      }
    }
    saturated = true;
  };

  auto assign = [&](auto&& self, int x) -> void {
    if (x == var_count) {
      visit_leaf();
      return;
    }
    for (std::uint16_t b = vars[x].domain; b && !saturated; b &= static_cast<std::uint16_t>(b - 1)) {
      const int p = std::countr_zero(b);
      bool ok = true;
      for (int y = 0; y < x && ok; ++y) ok = !(vars[y].attribute == vars[x].attribute && var_pos[y] == p);
      if (!ok) continue;
      var_pos[x] = p;
      for (std::size_t c = 0; c < subset.size() && ok; ++c) {
        if (check_at[c] == x) ok = clue_holds(c);
      }
      if (ok) {
        auto& col = columns[static_cast<std::size_t>(column_of[x])];
        if (col.last_var == x) ok = column_entry(col).feasible;
      }
      if (ok) self(self, x + 1);
    }
    var_pos[x] = 0;
  };
  assign(assign, 0);

  if (!any_leaf) throw ZebraContradiction("no assignment satisfies the clue subset");
  if (saturated) return std::nullopt;
  ZebraGrid out = grid;
  bool shrank = false;
  for (const auto& col : columns) {
    for (int p = 1; p <= m; ++p) {
      const auto current = grid.at(p, col.attribute);
      const auto next = static_cast<std::uint16_t>(current & col.survivors[p - 1]);
      if (next != current) {
        shrank = true;
        out.assign(p, col.attribute, next);
      }
    }
  }
  if (!shrank) return std::nullopt;
  return out;
}

/// A cell value that became certain.
struct ZebraStep {
  int position = 0;
  int attribute = 0;
  int value = 0;
  int event = 0;  // index into ZebraTrace::progress
  bool operator==(const ZebraStep&) const = default;
};

struct ZebraTrace {
  std::vector<ZebraStep> steps;               // committed cells in deduction order
  std::vector<std::vector<int>> progress;     // clue subsets that shrank the grid, in order

  /// Sorted indices of clues that took part in some progress event.
  std::vector<int> used_clues() const {
    std::vector<int> out;
    for (const auto& s : progress) out.insert(out.end(), s.begin(), s.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

/// Fixpoint engine for k-subset deduction (k = 1, 2, 3).
///
/// A subset is re-examined only when an attribute column it names has changed
/// since it last failed to make progress; its result depends on nothing else.
/// Subsets whose clues split into groups sharing no attribute are skipped,
/// because such a subset deduces nothing its parts did not.
class ZebraDeducer {
 public:
  struct Event {
    std::vector<int> subset;
    std::vector<ZebraStep> committed;
  };

  ZebraDeducer(int m, int n, std::vector<Clue> clues = {}) : grid_(ZebraGrid::full(m, n)), clues_(std::move(clues)) {
    if (m < 1 || m > detail::kMaxEntities || n < 1 || n > 31) throw FormatError("zebra size out of range");
    for (const auto& c : clues_) validate_clue(c, m, n);
    const int count = static_cast<int>(clues_.size());
    for (int i = 0; i < count; ++i) push_subset({i});
    for (int i = 0; i < count; ++i) {
      for (int j = i + 1; j < count; ++j) push_subset({i, j});
    }
    for (int i = 0; i < count; ++i) {
      for (int j = i + 1; j < count; ++j) {
        for (int l = j + 1; l < count; ++l) push_subset({i, j, l});
      }
    }
  }

  const ZebraGrid& grid() const { return grid_; }
  const std::vector<Clue>& clues() const { return clues_; }

  /// Appends a clue. Its subsets are examined after existing subsets of the same size.
  void add_clue(Clue clue) {
    validate_clue(clue, grid_.entities(), grid_.attributes());
    clues_.push_back(std::move(clue));
    const int last = static_cast<int>(clues_.size()) - 1;
    push_subset({last});
    for (int i = 0; i < last; ++i) push_subset({i, last});
    for (int i = 0; i < last; ++i) {
      for (int j = i + 1; j < last; ++j) push_subset({i, j, last});
    }
  }

  /// Applies the first subset (smallest k first) that makes progress.
  std::optional<Event> step() {
    for (auto& group : subsets_) {
      for (auto& s : group) {
        if (!stale(s)) continue;
        auto next = deduce_with_subset(grid_, clues_, s.clues);
        if (!next) {
          s.last_eval = stamp_;
          continue;
        }
        Event ev{s.clues, {}};
        ++stamp_;
        for (int a = 1; a <= grid_.attributes(); ++a) {
          for (int p = 1; p <= grid_.entities(); ++p) {
            if (next->at(p, a) != grid_.at(p, a)) attr_stamp_[static_cast<std::size_t>(a)] = stamp_;
          }
        }
        for (int p = 1; p <= grid_.entities(); ++p) {
          for (int a = 1; a <= grid_.attributes(); ++a) {
            if (next->committed(p, a) && !grid_.committed(p, a)) {
              ev.committed.push_back({p, a, next->committed_value(p, a), 0});
            }
          }
        }
        grid_ = std::move(*next);
        s.last_eval = stamp_;
        return ev;
      }
    }
    return std::nullopt;
  }

  /// Runs step() to fixpoint, appending to `trace` when given.
  void run(ZebraTrace* trace = nullptr) {
    while (!grid_.complete()) {
      auto ev = step();
      if (!ev) return;
      if (trace) {
        const int id = static_cast<int>(trace->progress.size());
        trace->progress.push_back(ev->subset);
        for (auto st : ev->committed) {
          st.event = id;
          trace->steps.push_back(st);
        }
      }
    }
  }

 private:
  struct Subset {
    std::vector<int> clues;
    std::uint32_t mask = 0;
    long last_eval = -1;
  };

  void push_subset(std::vector<int> idx) {
    std::vector<std::uint32_t> masks;
    for (int i : idx) masks.push_back(clues_[static_cast<std::size_t>(i)].attribute_mask());
    if (idx.size() == 2 && (masks[0] & masks[1]) == 0) return;
    if (idx.size() == 3) {
      const int links = ((masks[0] & masks[1]) != 0) + ((masks[0] & masks[2]) != 0) + ((masks[1] & masks[2]) != 0);
      if (links < 2) return;
    }
    Subset s;
    s.mask = masks[0] | (idx.size() > 1 ? masks[1] : 0u) | (idx.size() > 2 ? masks[2] : 0u);
    s.clues = std::move(idx);
    subsets_[s.clues.size() - 1].push_back(std::move(s));
  }

  bool stale(const Subset& s) const {
    if (s.last_eval < 0) return true;
    for (int a = 1; a <= grid_.attributes(); ++a) {
      if (((s.mask >> a) & 1u) && attr_stamp_[static_cast<std::size_t>(a)] > s.last_eval) return true;
    }
    return false;
  }

  ZebraGrid grid_;
  std::vector<Clue> clues_;
  std::array<std::vector<Subset>, 3> subsets_;
  std::array<long, 32> attr_stamp_{};
  long stamp_ = 0;
};

struct ZebraSolved {
  Assignment assignment;
  ZebraTrace trace;
};

struct ZebraStuck {
  ZebraGrid grid;
  ZebraTrace trace;
};

using ZebraOutcome = std::variant<ZebraSolved, ZebraStuck>;

/// Solves by k-subset deduction with subsets in (k, lexicographic) order,
/// restarting at k = 1 after every progress event.
inline ZebraOutcome solve_zebra(int m, int n, const std::vector<Clue>& clues) {
  ZebraDeducer engine(m, n, clues);
  ZebraTrace trace;
  engine.run(&trace);
  if (!engine.grid().complete()) return ZebraStuck{engine.grid(), std::move(trace)};
  return ZebraSolved{engine.grid().to_assignment(), std::move(trace)};
}

inline ZebraOutcome solve_zebra(const ZebraPuzzle& puzzle) { return solve_zebra(puzzle.m, puzzle.n, puzzle.clues); }

}  // namespace forge::zebra
