#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <boost/tokenizer.hpp>

#include "forge/core/error.hpp"
#include "forge/core/parallel.hpp"
#include "forge/sudoku/oracle.hpp"
#include "forge/sudoku/solver.hpp"

namespace forge::pipeline {

using LogSink = std::function<void(const std::string&)>;

/// Header names of the three columns ingest reads. Other columns are ignored.
struct CsvColumns {
  std::string puzzle = "puzzle";
  std::string solution = "solution";
  std::string difficulty = "difficulty";
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::string_view trimmed = line;
  if (!trimmed.empty() && trimmed.back() == '\r') trimmed.remove_suffix(1);
  const std::string text(trimmed);
  try {
    Tokenizer tok(text, boost::escaped_list_separator<char>('\\', ',', '"'));
    return {tok.begin(), tok.end()};
  } catch (const boost::escaped_list_error& e) {
    throw FormatError(std::string("bad csv line: ") + e.what());
  }
}

/// One kept puzzle with its solver trace.
struct SudokuRecord {
  std::size_t row = 0;  // 1-based data row in the source file
  sudoku::Board puzzle;
  sudoku::Board solution;
  double difficulty = 0.0;
  sudoku::ReasoningTrace trace;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t unreadable = 0;
  std::size_t inconsistent = 0;  // solution column disagrees with the givens or the oracle
  std::size_t not_unique = 0;
  std::size_t stuck = 0;
  std::size_t duplicate = 0;

  std::size_t dropped() const { return unreadable + inconsistent + not_unique + stuck + duplicate; }
};

namespace detail {

enum class Verdict : std::uint8_t { Kept, Unreadable, Inconsistent, NotUnique, Stuck };

struct RowResult {
  Verdict verdict = Verdict::Unreadable;
  std::string message;
  std::optional<SudokuRecord> record;
};

inline RowResult check_row(std::size_t row, const std::vector<std::string>& fields, std::size_t puzzle_col,
                           std::size_t solution_col, std::optional<std::size_t> difficulty_col) {
  RowResult r;
  const auto fail = [&](Verdict v, const std::string& why) {
    r.verdict = v;
    r.message = "row " + std::to_string(row) + ": " + why;
    return r;
  };
  const std::size_t need = std::max({puzzle_col, solution_col, difficulty_col.value_or(0)});
  if (fields.size() <= need) return fail(Verdict::Unreadable, "too few fields");
  SudokuRecord rec;
  rec.row = row;
  try {
    rec.puzzle = sudoku::parse_board(fields[puzzle_col]);
    rec.solution = sudoku::parse_board(fields[solution_col]);
  } catch (const std::exception& e) {
    return fail(Verdict::Unreadable, e.what());
  }
  if (difficulty_col) {
    const std::string& text = fields[*difficulty_col];
    try {
      std::size_t used = 0;
      rec.difficulty = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      return fail(Verdict::Unreadable, "bad difficulty '" + text + "'");
    }
  }
  if (!rec.solution.complete()) return fail(Verdict::Inconsistent, "solution is not complete");
  for (int i = 0; i < sudoku::kCells; ++i) {
    if (!rec.puzzle.empty_at(i) && rec.puzzle.at(i) != rec.solution.at(i)) {
      return fail(Verdict::Inconsistent, "solution contradicts a given");
    }
  }
  const auto bf = sudoku::brute_force_solve(rec.puzzle, 2);
  if (bf.count == 0) return fail(Verdict::Inconsistent, "puzzle has no solution");
  if (bf.count > 1) return fail(Verdict::NotUnique, "puzzle has more than one solution");
  if (!bf.first->same_values(rec.solution)) return fail(Verdict::Inconsistent, "solution column disagrees with oracle");
  auto outcome = sudoku::solve_with_trace(rec.puzzle);
  if (!std::holds_alternative<sudoku::ReasoningTrace>(outcome)) return fail(Verdict::Stuck, "strategy solver is stuck");
  rec.trace = std::move(std::get<sudoku::ReasoningTrace>(outcome));
  r.verdict = Verdict::Kept;
  r.record = std::move(rec);
  return r;
}

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw FormatError("csv header has no column '" + name + "'");
}

}  // namespace detail

struct IngestOptions {
  std::size_t limit = 0;  // 0 = no limit
  CsvColumns columns;
  bool has_difficulty = true;
  unsigned jobs = 1;
  std::size_t batch_rows = 4096;
  LogSink log;
};

struct IngestResult {
  std::vector<SudokuRecord> records;
  IngestReport report;
};

/// Reads puzzle rows, keeps those that are consistent, uniquely solvable and
/// solved by the strategy solver, and drops repeated puzzles. Skips are logged
/// and counted, never fatal. Rows are checked in parallel batches; the kept
/// list is the first `limit` passing rows in file order.
inline IngestResult ingest_and_filter(std::istream& in, const IngestOptions& opt) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv is empty");
  const auto header = split_csv_line(line);
  const std::size_t puzzle_col = detail::column_index(header, opt.columns.puzzle);
  const std::size_t solution_col = detail::column_index(header, opt.columns.solution);
  std::optional<std::size_t> difficulty_col;
  if (opt.has_difficulty) difficulty_col = detail::column_index(header, opt.columns.difficulty);

  IngestResult out;
  std::unordered_set<std::string> seen;
  const auto log = [&](const std::string& msg) {
    if (opt.log) opt.log(msg);
  };
  std::size_t row = 0;
  bool done = false;
  while (!done) {
    std::vector<std::pair<std::size_t, std::string>> batch;
    while (batch.size() < opt.batch_rows && std::getline(in, line)) {
      ++row;
      if (line.empty() || line == "\r") continue;
      batch.emplace_back(row, line);
    }
    if (batch.empty()) break;
    auto results = parallel_map(batch.size(), opt.jobs, [&](std::size_t k) {
      try {
        return detail::check_row(batch[k].first, split_csv_line(batch[k].second), puzzle_col, solution_col,
                                 difficulty_col);
      } catch (const std::exception& e) {
        return detail::RowResult{detail::Verdict::Unreadable, "row " + std::to_string(batch[k].first) + ": " + e.what(),
                                 std::nullopt};
      }
    });
    for (auto& r : results) {
      ++out.report.rows;
      switch (r.verdict) {
        case detail::Verdict::Kept: break;
        case detail::Verdict::Unreadable: ++out.report.unreadable; break;
        case detail::Verdict::Inconsistent: ++out.report.inconsistent; break;
        case detail::Verdict::NotUnique: ++out.report.not_unique; break;
        case detail::Verdict::Stuck: ++out.report.stuck; break;
      }
      if (r.verdict != detail::Verdict::Kept) {
        log("skip " + r.message);
        continue;
      }
      if (!seen.insert(r.record->puzzle.to_string()).second) {
        ++out.report.duplicate;
        log("skip row " + std::to_string(r.record->row) + ": duplicate puzzle");
        continue;
      }
      out.records.push_back(std::move(*r.record));
      ++out.report.kept;
      if (opt.limit != 0 && out.report.kept == opt.limit) {
        done = true;
        break;
      }
    }
  }
  return out;
}

inline IngestResult ingest_and_filter(const std::string& path, const IngestOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open csv: " + path);
  return ingest_and_filter(in, opt);
}

}  // namespace forge::pipeline
