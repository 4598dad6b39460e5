#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/core/error.hpp"
#include "forge/zebra/puzzle.hpp"

namespace forge::zebra {

// Puzzle files are JSON lines: a header line, then one puzzle per line.
//   {"format":"forge-zebra","version":1}
//   {"m":3,"n":3,"clues":[{"type":"Eq","operands":[["P",1],["A",1,2]]}],"solution":[[2,2,2],...]}
inline constexpr const char* kZebraFormat = "forge-zebra";
inline constexpr int kZebraFormatVersion = 1;

inline nlohmann::ordered_json descriptor_to_json(const Descriptor& d) {
  if (d.is_position()) return nlohmann::ordered_json::array({"P", d.value});
  return nlohmann::ordered_json::array({"A", d.attribute, d.value});
}

inline Descriptor descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) throw FormatError("descriptor must be [\"P\",p] or [\"A\",a,v]");
  const auto tag = j[0].get<std::string>();
  if (tag == "P" && j.size() == 2 && j[1].is_number_integer()) return Descriptor::position(j[1].get<int>());
  if (tag == "A" && j.size() == 3 && j[1].is_number_integer() && j[2].is_number_integer()) {
    return Descriptor::attr(j[1].get<int>(), j[2].get<int>());
  }
  throw FormatError("descriptor must be [\"P\",p] or [\"A\",a,v]");
}

inline nlohmann::ordered_json clue_to_json(const Clue& c) {
  nlohmann::ordered_json j;
  j["type"] = std::string(clue_type_name(c.type));
  auto ops = nlohmann::ordered_json::array();
  for (const auto& d : c.operands) ops.push_back(descriptor_to_json(d));
  j["operands"] = ops;
  return j;
}

inline Clue clue_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.contains("operands")) throw FormatError("clue needs type and operands");
  const auto type = parse_clue_type(j.at("type").get<std::string>());
  if (!type) throw FormatError("unknown clue type: " + j.at("type").get<std::string>());
  Clue c{*type, {}};
  for (const auto& d : j.at("operands")) c.operands.push_back(descriptor_from_json(d));
  return c;
}

inline nlohmann::ordered_json puzzle_to_json(const ZebraPuzzle& p) {
  nlohmann::ordered_json j;
  j["m"] = p.m;
  j["n"] = p.n;
  auto clues = nlohmann::ordered_json::array();
  for (const auto& c : p.clues) clues.push_back(clue_to_json(c));
  j["clues"] = clues;
  auto rows = nlohmann::ordered_json::array();
  for (int pos = 1; pos <= p.m; ++pos) {
    auto row = nlohmann::ordered_json::array();
    for (int a = 1; a <= p.n; ++a) row.push_back(p.solution.value(pos, a));
    rows.push_back(row);
  }
  j["solution"] = rows;
  return j;
}

inline ZebraPuzzle puzzle_from_json(const nlohmann::json& j) {
  try {
    ZebraPuzzle p;
    p.m = j.at("m").get<int>();
    p.n = j.at("n").get<int>();
    if (p.m < 1 || p.n < 1) throw FormatError("zebra size must be positive");
    for (const auto& c : j.at("clues")) {
      p.clues.push_back(clue_from_json(c));
      validate_clue(p.clues.back(), p.m, p.n);
    }
    p.solution = Assignment(p.m, p.n);
    const auto& rows = j.at("solution");
    if (!rows.is_array() || static_cast<int>(rows.size()) != p.m) throw FormatError("solution needs m rows");
    for (int pos = 1; pos <= p.m; ++pos) {
      const auto& row = rows[static_cast<std::size_t>(pos - 1)];
      if (!row.is_array() || static_cast<int>(row.size()) != p.n) throw FormatError("solution rows need n values");
      for (int a = 1; a <= p.n; ++a) p.solution.set(pos, a, row[static_cast<std::size_t>(a - 1)].get<int>());
    }
    if (!p.solution.is_permutation_table()) throw FormatError("solution columns must be permutations");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad zebra puzzle json: ") + e.what());
  }
}

inline std::string puzzle_to_line(const ZebraPuzzle& p) { return puzzle_to_json(p).dump(); }

inline ZebraPuzzle puzzle_from_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bad zebra puzzle line: ") + e.what());
  }
  return puzzle_from_json(j);
}

/// Extra header fields (tool, command) follow format and version.
inline std::string header_line(const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
  nlohmann::ordered_json h;
  h["format"] = kZebraFormat;
  h["version"] = kZebraFormatVersion;
  for (const auto& [k, v] : extra.items()) h[k] = v;
  return h.dump();
}

inline void write_puzzles(const std::string& path, const std::vector<ZebraPuzzle>& puzzles,
                          const nlohmann::ordered_json& header_extra = nlohmann::ordered_json::object()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << header_line(header_extra) << '\n';
  for (const auto& p : puzzles) out << puzzle_to_line(p) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<ZebraPuzzle> read_puzzles(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty zebra puzzle file");
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != kZebraFormat ||
      header.value("version", 0) != kZebraFormatVersion) {
    throw FormatError("missing or unsupported zebra file header");
  }
  std::vector<ZebraPuzzle> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(puzzle_from_line(line));
  }
  return out;
}

inline std::vector<ZebraPuzzle> read_puzzles(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  return read_puzzles(in);
}

inline std::string describe_descriptor(const Descriptor& d) {
  if (d.is_position()) return "position " + std::to_string(d.value);
  return "attr" + std::to_string(d.attribute) + "=" + std::to_string(d.value);
}

/// Human-readable clue list and solution table.
inline std::string render_puzzle(const ZebraPuzzle& p) {
  std::ostringstream out;
  out << "zebra " << p.m << "x" << p.n << ", " << p.clues.size() << " clues\n";
  for (std::size_t i = 0; i < p.clues.size(); ++i) {
    const auto& c = p.clues[i];
    out << "  " << (i + 1) << ". " << clue_type_name(c.type) << "(";
    for (std::size_t k = 0; k < c.operands.size(); ++k) out << (k ? ", " : "") << describe_descriptor(c.operands[k]);
    out << ")\n";
  }
  out << "solution (position: values by attribute)\n";
  for (int pos = 1; pos <= p.m; ++pos) {
    out << "  " << pos << ":";
    for (int a = 1; a <= p.n; ++a) out << ' ' << p.solution.value(pos, a);
    out << '\n';
  }
  return out.str();
}

}  // namespace forge::zebra
