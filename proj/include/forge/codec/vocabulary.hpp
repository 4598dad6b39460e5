#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "forge/core/error.hpp"
#include "forge/core/hash.hpp"
#include "forge/zebra/puzzle.hpp"

namespace forge::codec {

using Token = std::uint16_t;

enum class PuzzleKind : std::uint8_t { Sudoku, Zebra };

constexpr std::string_view kind_name(PuzzleKind k) { return k == PuzzleKind::Sudoku ? "sudoku" : "zebra"; }

inline PuzzleKind parse_kind(std::string_view s) {
  if (s == "sudoku") return PuzzleKind::Sudoku;
  if (s == "zebra") return PuzzleKind::Zebra;
  throw FormatError("unknown puzzle kind: " + std::string(s));
}

// Token id layout. Each block is contiguous and disjoint from the others.
//   0..3    PAD BOS SEP EOS
//   4..12   digits 1..9 (Sudoku rows, columns and values share this block)
//   13..19  Zebra clue types, in ClueType order
//   20..25  Zebra positions 1..6
//   26..31  Zebra attributes 1..6
//   32..37  Zebra values 1..6
inline constexpr Token kPad = 0;
inline constexpr Token kBos = 1;
inline constexpr Token kSep = 2;
inline constexpr Token kEos = 3;
inline constexpr Token kDigitBase = 4;
inline constexpr Token kClueTypeBase = 13;
inline constexpr Token kPositionBase = 20;
inline constexpr Token kAttributeBase = 26;
inline constexpr Token kValueBase = 32;
inline constexpr int kZebraMaxSize = 6;

constexpr Token digit_token(int d) { return static_cast<Token>(kDigitBase + d - 1); }
constexpr Token clue_type_token(zebra::ClueType t) { return static_cast<Token>(kClueTypeBase + static_cast<int>(t)); }
constexpr Token position_token(int p) { return static_cast<Token>(kPositionBase + p - 1); }
constexpr Token attribute_token(int a) { return static_cast<Token>(kAttributeBase + a - 1); }
constexpr Token value_token(int v) { return static_cast<Token>(kValueBase + v - 1); }

/// Inverse of the block encoders: the 1-based member, or nullopt outside the block.
constexpr std::optional<int> block_member(Token t, Token base, int count) {
  if (t < base || t >= base + count) return std::nullopt;
  return t - base + 1;
}
constexpr std::optional<int> as_digit(Token t) { return block_member(t, kDigitBase, 9); }
constexpr std::optional<int> as_position(Token t) { return block_member(t, kPositionBase, kZebraMaxSize); }
constexpr std::optional<int> as_attribute(Token t) { return block_member(t, kAttributeBase, kZebraMaxSize); }
constexpr std::optional<int> as_value(Token t) { return block_member(t, kValueBase, kZebraMaxSize); }
inline std::optional<zebra::ClueType> as_clue_type(Token t) {
  const auto k = block_member(t, kClueTypeBase, 7);
  if (!k) return std::nullopt;
  return zebra::kClueTypes[static_cast<std::size_t>(*k - 1)];
}

/// The vocabulary of one puzzle kind. Zebra extends the Sudoku layout, so a
/// Zebra vocabulary keeps the (unused) digit block.
class Vocabulary {
 public:
  explicit Vocabulary(PuzzleKind kind) : kind_(kind) {}

  PuzzleKind kind() const { return kind_; }
  int size() const { return kind_ == PuzzleKind::Sudoku ? 13 : 38; }

  std::string surface(Token id) const {
    switch (id) {
      case kPad: return "<pad>";
      case kBos: return "<bos>";
      case kSep: return "<sep>";
      case kEos: return "<eos>";
      default: break;
    }
    if (auto d = as_digit(id)) return std::to_string(*d);
    if (kind_ == PuzzleKind::Zebra) {
      if (auto t = as_clue_type(id)) return std::string(zebra::clue_type_name(*t));
      if (auto p = as_position(id)) return "pos" + std::to_string(*p);
      if (auto a = as_attribute(id)) return "attr" + std::to_string(*a);
      if (auto v = as_value(id)) return "val" + std::to_string(*v);
    }
    throw FormatError("token id out of vocabulary: " + std::to_string(id));
  }

  /// id -> surface form manifest, shipped alongside every dataset.
  nlohmann::ordered_json manifest() const {
    nlohmann::ordered_json j;
    j["kind"] = std::string(kind_name(kind_));
    j["size"] = size();
    j["framing"] = {{"pad", kPad}, {"bos", kBos}, {"sep", kSep}, {"eos", kEos}};
    auto tokens = nlohmann::ordered_json::array();
    for (int id = 0; id < size(); ++id) tokens.push_back({{"id", id}, {"surface", surface(static_cast<Token>(id))}});
    j["tokens"] = tokens;
    return j;
  }

  /// FNV-1a of the compact manifest text; trainers and model servers echo it.
  std::string hash() const { return hex64(fnv1a64(manifest().dump())); }

 private:
  PuzzleKind kind_;
};

}  // namespace forge::codec
