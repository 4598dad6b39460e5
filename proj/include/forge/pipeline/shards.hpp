#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/codec/vocabulary.hpp"
#include "forge/core/error.hpp"

namespace forge::pipeline {

namespace fs = std::filesystem;

struct ShardInfo {
  std::string split;
  std::string file;  // relative to the dataset directory
  std::size_t records = 0;
  std::size_t bytes = 0;
};

inline std::string shard_name(const std::string& split, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%05zu.bin", index);
  return split + buf;
}

/// Writes fixed-length records of little-endian u16 tokens, PAD-filled, into
/// numbered shard files of at most `per_shard` records each.
class ShardWriter {
 public:
  ShardWriter(fs::path dir, std::string split, std::size_t record_length, std::size_t per_shard)
      : dir_(std::move(dir)), split_(std::move(split)), record_length_(record_length), per_shard_(per_shard) {
    if (record_length_ == 0 || per_shard_ == 0) throw FormatError("record length and shard size must be positive");
  }

  void write(const std::vector<codec::Token>& tokens) {
    if (tokens.size() > record_length_) {
      throw FormatError("record of " + std::to_string(tokens.size()) + " tokens exceeds record length " +
                        std::to_string(record_length_));
    }
    if (!out_.is_open() || shards_.back().records == per_shard_) open_next();
    buffer_.assign(record_length_ * 2, 0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      buffer_[2 * i] = static_cast<char>(tokens[i] & 0xFF);
      buffer_[2 * i + 1] = static_cast<char>(tokens[i] >> 8);
    }
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw IoError("write failed: " + (dir_ / shards_.back().file).string());
    ++shards_.back().records;
    shards_.back().bytes += buffer_.size();
  }

  /// Flushes and returns the shard list. A split with no records still gets one empty shard.
  std::vector<ShardInfo> finish() {
    if (shards_.empty()) open_next();
    close_current();
    return shards_;
  }

 private:
  void open_next() {
    close_current();
    ShardInfo info{split_, shard_name(split_, shards_.size()), 0, 0};
    out_.open(dir_ / info.file, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot create shard: " + (dir_ / info.file).string());
    shards_.push_back(info);
  }

  void close_current() {
    if (!out_.is_open()) return;
    out_.close();
    if (!out_) throw IoError("closing shard failed: " + (dir_ / shards_.back().file).string());
  }

  fs::path dir_;
  std::string split_;
  std::size_t record_length_;
  std::size_t per_shard_;
  std::ofstream out_;
  std::vector<char> buffer_;
  std::vector<ShardInfo> shards_;
};

/// Reads every record of one shard file. Trailing PAD tokens are kept.
inline std::vector<std::vector<codec::Token>> read_shard(const fs::path& path, std::size_t record_length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open shard: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % (record_length * 2) != 0) {
    throw FormatError("shard size is not a multiple of the record length: " + path.string());
  }
  std::vector<std::vector<codec::Token>> out(bytes.size() / (record_length * 2));
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r].resize(record_length);
    for (std::size_t i = 0; i < record_length; ++i) {
      const auto lo = static_cast<unsigned char>(bytes[(r * record_length + i) * 2]);
      const auto hi = static_cast<unsigned char>(bytes[(r * record_length + i) * 2 + 1]);
      out[r][i] = static_cast<codec::Token>(lo | (hi << 8));
    }
  }
  return out;
}

/// Drops PAD tokens after EOS.
inline std::vector<codec::Token> strip_padding(std::vector<codec::Token> record) {
  while (!record.empty() && record.back() == codec::kPad) record.pop_back();
  return record;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("bad json line in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forge::pipeline
