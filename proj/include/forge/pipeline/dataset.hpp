#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/codec/sequence.hpp"
#include "forge/core/command.hpp"
#include "forge/core/rng.hpp"
#include "forge/pipeline/csv.hpp"
#include "forge/pipeline/shards.hpp"
#include "forge/zebra/generator.hpp"
#include "forge/zebra/io.hpp"

namespace forge::pipeline {

inline constexpr const char* kManifestFormat = "forge-dataset";
inline constexpr int kManifestVersion = 1;
inline constexpr double kBucketWidth = 0.5;

// Stream ids for derive_seed, so that split, ordering and generation draws
// never share a random sequence.
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kOrderStream = 2;
inline constexpr std::uint64_t kZebraStream = 3;

/// Lower edge of the difficulty bucket holding `d`, as text ("0.0", "0.5", ...).
inline std::string bucket_label(double d) {
  const double lo = std::floor(d / kBucketWidth) * kBucketWidth;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", lo);
  return buf;
}

struct SplitConfig {
  std::uint64_t seed = 0;
  double test_fraction = 0.1 / 1.9;
  std::optional<std::size_t> test_count;
  bool stratify = false;  // sample the same fraction inside every difficulty bucket
};

/// Returns the sorted indices of the test split among `count` items.
inline std::vector<std::size_t> choose_test_split(std::size_t count, const SplitConfig& cfg,
                                                  const std::vector<std::string>& buckets = {}) {
  Rng rng(derive_seed(cfg.seed, kSplitStream));
  std::vector<std::size_t> test;
  const auto target = [&](std::size_t n) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * std::clamp(cfg.test_fraction, 0.0, 1.0)));
  };
  if (cfg.stratify && !cfg.test_count && buckets.size() == count) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < count; ++i) groups[buckets[i]].push_back(i);
    for (auto& [label, members] : groups) {
      rng.shuffle(std::span<std::size_t>(members));
      members.resize(target(members.size()));
      test.insert(test.end(), members.begin(), members.end());
    }
  } else {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(std::min(count, cfg.test_count.value_or(target(count))));
    test = std::move(order);
  }
  std::sort(test.begin(), test.end());
  return test;
}

struct EncodedItem {
  std::vector<codec::Token> tokens;
  nlohmann::ordered_json meta;
  std::string identity;  // puzzle identity used for disjointness checks
  std::string bucket;    // difficulty bucket label, empty when the kind has none
};

struct SplitOutput {
  std::vector<ShardInfo> shards;
  std::size_t records = 0;
  std::map<std::string, std::size_t> histogram;
};

inline SplitOutput write_split(const fs::path& dir, const std::string& split, const std::vector<const EncodedItem*>& items,
                               std::size_t record_length, std::size_t per_shard) {
  ShardWriter writer(dir, split, record_length, per_shard);
  std::ostringstream meta;
  SplitOutput out;
  for (const EncodedItem* item : items) {
    writer.write(item->tokens);
    meta << item->meta.dump() << '\n';
    if (!item->bucket.empty()) ++out.histogram[item->bucket];
    ++out.records;
  }
  out.shards = writer.finish();
  write_text_file(dir / (split + ".meta.jsonl"), meta.str());
  return out;
}

struct BuildCommon {
  codec::Ordering ordering = codec::Ordering::Fixed;
  SplitConfig split;
  std::size_t records_per_shard = 100000;
  unsigned jobs = 1;
  CommandSpec command;
  LogSink log;
};

/// Splits, writes shards, sidecars, the vocabulary file and manifest.json.
/// Returns the manifest. Nothing time- or host-dependent goes into any file.
inline nlohmann::ordered_json emit_dataset(const fs::path& dir, codec::PuzzleKind kind, const BuildCommon& common,
                                           const std::vector<EncodedItem>& items, nlohmann::ordered_json extra) {
  fs::create_directories(dir);
  std::size_t record_length = 0;
  for (const auto& it : items) record_length = std::max(record_length, it.tokens.size());
  if (record_length == 0) record_length = 1;

  std::vector<std::string> buckets;
  for (const auto& it : items) buckets.push_back(it.bucket);
  const auto test_idx = choose_test_split(items.size(), common.split, buckets);
  std::vector<char> is_test(items.size(), 0);
  for (auto i : test_idx) is_test[i] = 1;
  std::vector<const EncodedItem*> train, test;
  for (std::size_t i = 0; i < items.size(); ++i) (is_test[i] ? test : train).push_back(&items[i]);

  const codec::Vocabulary vocab(kind);
  write_text_file(dir / "vocab.json", vocab.manifest().dump(2) + "\n");
  const auto train_out = write_split(dir, "train", train, record_length, common.records_per_shard);
  const auto test_out = write_split(dir, "test", test, record_length, common.records_per_shard);

  nlohmann::ordered_json m;
  m["format"] = kManifestFormat;
  m["version"] = kManifestVersion;
  m["tool"] = tool_json();
  m["command"] = common.command.to_json();
  m["kind"] = std::string(codec::kind_name(kind));
  m["ordering"] = std::string(codec::ordering_name(common.ordering));
  m["resample_random_order"] = common.ordering == codec::Ordering::Random;
  m["seed"] = common.split.seed;
  m["split"] = {{"test_fraction", common.split.test_fraction},
                {"test_count", common.split.test_count ? nlohmann::ordered_json(*common.split.test_count)
                                                       : nlohmann::ordered_json(nullptr)},
                {"stratify", common.split.stratify}};
  m["vocabulary"] = {{"file", "vocab.json"}, {"size", vocab.size()}, {"hash", vocab.hash()}};
  m["framing"] = {{"pad", codec::kPad}, {"bos", codec::kBos}, {"sep", codec::kSep}, {"eos", codec::kEos}};
  m["record_length"] = record_length;
  m["token_encoding"] = "u16le";
  m["counts"] = {{"train", train_out.records}, {"test", test_out.records}};
  nlohmann::ordered_json hist;
  hist["bucket_width"] = kBucketWidth;
  hist["train"] = train_out.histogram;
  hist["test"] = test_out.histogram;
  m["difficulty_histogram"] = hist;
  auto shards = nlohmann::ordered_json::array();
  for (const auto* part : {&train_out, &test_out}) {
    for (const auto& s : part->shards) {
      shards.push_back({{"split", s.split}, {"file", s.file}, {"records", s.records}, {"bytes", s.bytes}});
    }
  }
  m["shards"] = shards;
  m["meta"] = {{"train", "train.meta.jsonl"}, {"test", "test.meta.jsonl"}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

struct SudokuBuildConfig {
  std::string csv;
  IngestOptions ingest;
  BuildCommon common;
};

inline nlohmann::ordered_json ingest_json(const IngestReport& r) {
  return {{"rows", r.rows},           {"kept", r.kept},       {"unreadable", r.unreadable},
          {"inconsistent", r.inconsistent}, {"not_unique", r.not_unique}, {"stuck", r.stuck},
          {"duplicate", r.duplicate}};
}

inline std::vector<EncodedItem> encode_sudoku_records(const std::vector<SudokuRecord>& records,
                                                      const BuildCommon& common) {
  const std::uint64_t order_seed = derive_seed(common.split.seed, kOrderStream);
  return parallel_map(records.size(), common.jobs, [&](std::size_t i) {
    const auto& r = records[i];
    EncodedItem item;
    item.tokens = codec::encode_sudoku(r.puzzle, r.trace, common.ordering, derive_seed(order_seed, i)).tokens;
    item.identity = r.puzzle.to_string();
    item.bucket = bucket_label(r.difficulty);
    item.meta["index"] = i;
    item.meta["row"] = r.row;
    item.meta["puzzle"] = item.identity;
    item.meta["givens"] = r.puzzle.given_count();
    item.meta["difficulty"] = r.difficulty;
    return item;
  });
}

/// Sudoku dataset from a puzzle CSV: ingest, filter, encode, split, write.
inline nlohmann::ordered_json build_sudoku_dataset(const fs::path& dir, const SudokuBuildConfig& cfg) {
  auto ingest = cfg.ingest;
  ingest.jobs = cfg.common.jobs;
  if (!ingest.log) ingest.log = cfg.common.log;
  const auto in = ingest_and_filter(cfg.csv, ingest);
  const auto items = encode_sudoku_records(in.records, cfg.common);
  nlohmann::ordered_json extra;
  extra["ingest"] = ingest_json(in.report);
  extra["source"] = {{"csv", fs::path(cfg.csv).filename().string()},
                     {"columns",
                      {{"puzzle", cfg.ingest.columns.puzzle},
                       {"solution", cfg.ingest.columns.solution},
                       {"difficulty", cfg.ingest.has_difficulty ? cfg.ingest.columns.difficulty : ""}}},
                     {"limit", cfg.ingest.limit}};
  return emit_dataset(dir, codec::PuzzleKind::Sudoku, cfg.common, items, extra);
}

struct ZebraBuildConfig {
  int min_size = 3;
  int max_size = 6;
  std::size_t per_size = 20000;
  zebra::ClueWeights weights;
  BuildCommon common;
};

/// Order-insensitive identity of a clue set, used to deduplicate and to check
/// train/test disjointness.
inline std::string zebra_identity(const zebra::ZebraPuzzle& p) {
  std::vector<std::string> parts;
  for (const auto& c : p.clues) parts.push_back(zebra::clue_to_json(c.canonical()).dump());
  std::sort(parts.begin(), parts.end());
  std::string key = std::to_string(p.m) + "x" + std::to_string(p.n);
  for (const auto& s : parts) key += ";" + s;
  return key;
}

/// Zebra dataset: `per_size` distinct generated puzzles for every (m, n) in
/// [min_size, max_size]^2, encoded and split.
inline nlohmann::ordered_json build_zebra_dataset(const fs::path& dir, const ZebraBuildConfig& cfg) {
  if (cfg.min_size < 2 || cfg.max_size > codec::kZebraMaxSize || cfg.min_size > cfg.max_size) {
    throw FormatError("zebra sizes must lie in 2.." + std::to_string(codec::kZebraMaxSize));
  }
  struct Generated {
    zebra::ZebraPuzzle puzzle;
    zebra::ZebraTrace trace;
    std::uint64_t seed = 0;
  };
  std::vector<EncodedItem> items;
  const std::uint64_t gen_seed = derive_seed(cfg.common.split.seed, kZebraStream);
  const std::uint64_t order_seed = derive_seed(cfg.common.split.seed, kOrderStream);
  std::set<std::string> seen;
  nlohmann::ordered_json per_size = nlohmann::ordered_json::object();
  for (int m = cfg.min_size; m <= cfg.max_size; ++m) {
    for (int n = cfg.min_size; n <= cfg.max_size; ++n) {
      const std::uint64_t size_seed = derive_seed(gen_seed, static_cast<std::uint64_t>(m * 100 + n));
      std::size_t kept = 0, drawn = 0, duplicates = 0;
      while (kept < cfg.per_size) {
        const std::size_t want = cfg.per_size - kept;
        const auto batch = parallel_map(want, cfg.common.jobs, [&](std::size_t k) {
          Generated g;
          g.seed = derive_seed(size_seed, drawn + k);
          g.puzzle = zebra::generate_puzzle(m, n, g.seed, cfg.weights);
          g.trace = std::get<zebra::ZebraSolved>(zebra::solve_zebra(g.puzzle)).trace;
          return g;
        });
        drawn += want;
        for (const auto& g : batch) {
          std::string id = zebra_identity(g.puzzle);
          if (!seen.insert(id).second) {
            ++duplicates;
            continue;
          }
          EncodedItem item;
          const std::size_t index = items.size();
          item.tokens = codec::encode_zebra(g.puzzle, g.trace, cfg.common.ordering, derive_seed(order_seed, index)).tokens;
          item.identity = std::move(id);
          item.meta["index"] = index;
          item.meta["m"] = m;
          item.meta["n"] = n;
          item.meta["seed"] = g.seed;
          item.meta["clues"] = g.puzzle.clues.size();
          items.push_back(std::move(item));
          ++kept;
        }
      }
      per_size[std::to_string(m) + "x" + std::to_string(n)] = {{"kept", kept}, {"duplicates", duplicates}};
    }
  }
  nlohmann::ordered_json extra;
  extra["zebra"] = {{"min_size", cfg.min_size}, {"max_size", cfg.max_size}, {"per_size", cfg.per_size},
                    {"clue_weights", cfg.weights.weight}, {"sizes", per_size}};
  return emit_dataset(dir, codec::PuzzleKind::Zebra, cfg.common, items, extra);
}

/// A dataset split loaded back from disk.
struct LoadedSplit {
  nlohmann::json manifest;
  codec::PuzzleKind kind = codec::PuzzleKind::Sudoku;
  std::vector<std::vector<codec::Token>> records;  // PAD stripped
  std::vector<nlohmann::json> meta;
};

inline nlohmann::json load_manifest(const fs::path& dir) {
  const auto text = read_text_file(dir / "manifest.json");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("bad manifest.json: " + std::string(e.what()));
  }
  if (m.value("format", "") != kManifestFormat) throw FormatError("not a forge dataset: " + dir.string());
  return m;
}

inline LoadedSplit load_split(const fs::path& dir, const std::string& split) {
  LoadedSplit out;
  out.manifest = load_manifest(dir);
  out.kind = codec::parse_kind(out.manifest.at("kind").get<std::string>());
  const codec::Vocabulary vocab(out.kind);
  if (out.manifest.at("vocabulary").at("hash").get<std::string>() != vocab.hash()) {
    throw ConsistencyError("dataset vocabulary hash does not match this build");
  }
  const auto record_length = out.manifest.at("record_length").get<std::size_t>();
  for (const auto& s : out.manifest.at("shards")) {
    if (s.at("split").get<std::string>() != split) continue;
    const auto file = s.at("file").get<std::string>();
    auto recs = read_shard(dir / file, record_length);
    if (recs.size() != s.at("records").get<std::size_t>()) throw ConsistencyError("shard record count mismatch: " + file);
    for (auto& r : recs) out.records.push_back(strip_padding(std::move(r)));
  }
  out.meta = read_jsonl(dir / out.manifest.at("meta").at(split).get<std::string>());
  if (out.meta.size() != out.records.size()) throw ConsistencyError("meta sidecar and shards disagree for " + split);
  if (out.records.size() != out.manifest.at("counts").at(split).get<std::size_t>()) {
    throw ConsistencyError("manifest count disagrees with shards for " + split);
  }
  return out;
}

/// Result of re-checking a dataset directory against its own manifest.
struct VerifyReport {
  std::size_t records = 0;
  std::size_t bad_records = 0;
  std::size_t overlap = 0;  // puzzles present in both splits
  bool histogram_matches = true;
  std::vector<std::string> problems;
  bool ok() const { return bad_records == 0 && overlap == 0 && histogram_matches && problems.empty(); }
};

/// Decodes every record, checks it against the oracle (unique solution equal
/// to the encoded one), checks split disjointness and recounts the histogram.
inline VerifyReport verify_dataset(const fs::path& dir, unsigned jobs = 1) {
  VerifyReport rep;
  std::map<std::string, std::set<std::string>> ids;
  for (const std::string split : {"train", "test"}) {
    const auto data = load_split(dir, split);
    const auto checks = parallel_map(data.records.size(), jobs, [&](std::size_t i) -> std::pair<bool, std::string> {
      try {
        const auto d = codec::decode_sequence(std::span<const codec::Token>(data.records[i]), data.kind);
        if (!d.terminated || d.malformed) return {false, ""};
        if (data.kind == codec::PuzzleKind::Sudoku) {
          const auto givens = codec::givens_board(d);
          const auto bf = sudoku::brute_force_solve(givens, 2);
          const bool good = bf.count == 1 && codec::completed_board(d).same_values(*bf.first) &&
                            static_cast<int>(d.predictions.size()) == sudoku::kCells - givens.given_count();
          return {good, givens.to_string()};
        }
        const auto pz = codec::zebra_from_decoded(d);
        const auto bf = zebra::brute_force_zebra(pz.m, pz.n, pz.clues, 2e8, 2);
        const bool good = pz.solution.is_permutation_table() && bf.count == 1 && bf.solutions.front() == pz.solution;
        return {good, zebra_identity(pz)};
      } catch (const std::length_error&) {
        // Too large for enumeration: fall back to the deduction solver.
        const auto d = codec::decode_sequence(std::span<const codec::Token>(data.records[i]), data.kind);
        const auto pz = codec::zebra_from_decoded(d);
        const auto outcome = zebra::solve_zebra(pz);
        const bool good = std::holds_alternative<zebra::ZebraSolved>(outcome) &&
                          std::get<zebra::ZebraSolved>(outcome).assignment == pz.solution;
        return {good, zebra_identity(pz)};
      } catch (const std::exception&) {
        return {false, ""};
      }
    });
    std::map<std::string, std::size_t> hist;
    for (std::size_t i = 0; i < checks.size(); ++i) {
      ++rep.records;
      if (!checks[i].first) {
        ++rep.bad_records;
        rep.problems.push_back(split + " record " + std::to_string(i) + " does not decode to a verified puzzle");
      }
      ids[split].insert(checks[i].second);
      if (data.kind == codec::PuzzleKind::Sudoku) {
        ++hist[bucket_label(data.meta[i].at("difficulty").get<double>())];
        if (data.meta[i].at("puzzle").get<std::string>() != checks[i].second) {
          rep.problems.push_back(split + " record " + std::to_string(i) + " disagrees with its sidecar");
        }
      }
    }
    const auto& declared = data.manifest.at("difficulty_histogram").at(split);
    std::map<std::string, std::size_t> want;
    for (auto it = declared.begin(); it != declared.end(); ++it) want[it.key()] = it.value().get<std::size_t>();
    if (want != hist) rep.histogram_matches = false;
  }
  for (const auto& id : ids["test"]) rep.overlap += ids["train"].count(id);
  return rep;
}

}  // namespace forge::pipeline
