#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/core/error.hpp"

namespace forge::zebra {

/// Identifies an entity in a clue: a position literal or an (attribute, value) pair.
/// Positions, attributes and values are all 1-based.
struct Descriptor {
  enum class Kind : std::uint8_t { Position, AttributeValue };

  Kind kind = Kind::Position;
  int attribute = 0;  // 0 for Position
  int value = 0;      // the position for Position, the attribute value otherwise

  static constexpr Descriptor position(int p) { return {Kind::Position, 0, p}; }
  static constexpr Descriptor attr(int a, int v) { return {Kind::AttributeValue, a, v}; }

  constexpr bool is_position() const { return kind == Kind::Position; }
  auto operator<=>(const Descriptor&) const = default;
};

enum class ClueType : std::uint8_t { Eq, Neq, ImmediateLeft, NeighbourOf, EndsIn, LeftOf, InBetween };

inline constexpr std::array<ClueType, 7> kClueTypes = {ClueType::Eq,          ClueType::Neq,    ClueType::ImmediateLeft,
                                                      ClueType::NeighbourOf, ClueType::EndsIn, ClueType::LeftOf,
                                                      ClueType::InBetween};

constexpr int arity(ClueType t) {
  switch (t) {
    case ClueType::EndsIn: return 1;
    case ClueType::InBetween: return 3;
    default: return 2;
  }
}

constexpr std::string_view clue_type_name(ClueType t) {
  switch (t) {
    case ClueType::Eq: return "Eq";
    case ClueType::Neq: return "Neq";
    case ClueType::ImmediateLeft: return "ImmediateLeft";
    case ClueType::NeighbourOf: return "NeighbourOf";
    case ClueType::EndsIn: return "EndsIn";
    case ClueType::LeftOf: return "LeftOf";
    case ClueType::InBetween: return "InBetween";
  }
  return "?";
}

inline std::optional<ClueType> parse_clue_type(std::string_view name) {
  for (ClueType t : kClueTypes) {
    if (clue_type_name(t) == name) return t;
  }
  return std::nullopt;
}

struct Clue {
  ClueType type = ClueType::Eq;
  std::vector<Descriptor> operands;

  bool operator==(const Clue&) const = default;

  /// Order-insensitive operand form for symmetric relations, so that
  /// Eq(x, y) and Eq(y, x) compare equal. InBetween is symmetric in its flankers.
  Clue canonical() const {
    Clue c = *this;
    switch (type) {
      case ClueType::Eq:
      case ClueType::Neq:
      case ClueType::NeighbourOf: std::sort(c.operands.begin(), c.operands.end()); break;
      case ClueType::InBetween:
        if (c.operands.size() == 3 && c.operands[2] < c.operands[1]) std::swap(c.operands[1], c.operands[2]);
        break;
      default: break;
    }
    return c;
  }
  bool equivalent(const Clue& other) const { return canonical() == other.canonical(); }

  /// Bitmask of attributes (bit a) named by the operands.
  std::uint32_t attribute_mask() const {
    std::uint32_t mask = 0;
    for (const auto& d : operands) {
      if (!d.is_position()) mask |= 1u << d.attribute;
    }
    return mask;
  }
};

/// table[p][a] = value; each attribute column is a permutation of 1..m.
class Assignment {
 public:
  Assignment() = default;
  Assignment(int m, int n) : m_(m), n_(n), table_(static_cast<std::size_t>(m * n), 0) {}

  int entities() const { return m_; }
  int attributes() const { return n_; }
  int value(int p, int a) const { return table_[idx(p, a)]; }
  void set(int p, int a, int v) { table_[idx(p, a)] = v; }

  /// The position holding value v of attribute a, or 0 if none.
  int position_of(int a, int v) const {
    for (int p = 1; p <= m_; ++p) {
      if (value(p, a) == v) return p;
    }
    return 0;
  }

  bool is_permutation_table() const {
    for (int a = 1; a <= n_; ++a) {
      std::uint32_t seen = 0;
      for (int p = 1; p <= m_; ++p) {
        const int v = value(p, a);
        if (v < 1 || v > m_ || (seen >> v) & 1u) return false;
        seen |= 1u << v;
      }
    }
    return true;
  }

  bool operator==(const Assignment&) const = default;

 private:
  std::size_t idx(int p, int a) const { return static_cast<std::size_t>((p - 1) * n_ + (a - 1)); }
  int m_ = 0;
  int n_ = 0;
  std::vector<int> table_;
};

struct ZebraPuzzle {
  int m = 0;  // entities
  int n = 0;  // attributes
  std::vector<Clue> clues;
  Assignment solution;

  bool operator==(const ZebraPuzzle&) const = default;
};

inline bool descriptor_in_range(const Descriptor& d, int m, int n) {
  if (d.is_position()) return d.value >= 1 && d.value <= m;
  return d.attribute >= 1 && d.attribute <= n && d.value >= 1 && d.value <= m;
}

/// Operand count matches the type, operands are distinct and in range.
inline void validate_clue(const Clue& clue, int m, int n) {
  if (static_cast<int>(clue.operands.size()) != arity(clue.type)) {
    throw FormatError(std::string(clue_type_name(clue.type)) + " clue needs " + std::to_string(arity(clue.type)) +
                      " operands");
  }
  for (std::size_t i = 0; i < clue.operands.size(); ++i) {
    if (!descriptor_in_range(clue.operands[i], m, n)) throw FormatError("clue operand out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (clue.operands[i] == clue.operands[j]) throw FormatError("clue operands must be distinct");
    }
  }
}

/// Evaluates a clue given the entity position of each operand.
inline bool holds_at_positions(ClueType type, const int* pos, int m) {
  switch (type) {
    case ClueType::Eq: return pos[0] == pos[1];
    case ClueType::Neq: return pos[0] != pos[1];
    case ClueType::ImmediateLeft: return pos[0] + 1 == pos[1];
    case ClueType::NeighbourOf: return pos[0] - pos[1] == 1 || pos[1] - pos[0] == 1;
    case ClueType::EndsIn: return pos[0] == 1 || pos[0] == m;
    case ClueType::LeftOf: return pos[0] < pos[1];
    case ClueType::InBetween: return std::min(pos[1], pos[2]) < pos[0] && pos[0] < std::max(pos[1], pos[2]);
  }
  return false;
}

inline bool evaluate_clue(const Clue& clue, const Assignment& asg) {
  int pos[3] = {0, 0, 0};
  for (std::size_t k = 0; k < clue.operands.size() && k < 3; ++k) {
    const auto& d = clue.operands[k];
    pos[k] = d.is_position() ? d.value : asg.position_of(d.attribute, d.value);
  }
  return holds_at_positions(clue.type, pos, asg.entities());
}

inline bool satisfies_all(const std::vector<Clue>& clues, const Assignment& asg) {
  return std::all_of(clues.begin(), clues.end(), [&](const Clue& c) { return evaluate_clue(c, asg); });
}

}  // namespace forge::zebra
