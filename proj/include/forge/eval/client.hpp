#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forge/codec/vocabulary.hpp"

namespace forge::eval {

using codec::Token;
using Prefix = std::vector<Token>;
using Logits = std::vector<double>;  // one score per vocabulary id

/// The model could not be reached or the stream broke. Retrying may help.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  bool retriable() const { return true; }
};

/// The model answered with something that breaks the protocol.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, std::string raw) : std::runtime_error(what), raw_(std::move(raw)) {}
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

/// Any next-token model. Implementations must be deterministic: the same
/// prefix always yields the same logits.
class ModelClient {
 public:
  virtual ~ModelClient() = default;

  virtual int protocol_version() const { return 1; }
  virtual int vocab_size() const = 0;
  virtual std::string vocab_hash() const = 0;
  virtual std::size_t batch_limit() const = 0;

  /// One logit vector per prefix, in order. `prefixes.size() <= batch_limit()`.
  virtual std::vector<Logits> logits(const std::vector<Prefix>& prefixes) = 0;
};

/// Splits `prefixes` into batches the client accepts and checks every answer.
inline std::vector<Logits> request_logits(ModelClient& client, const std::vector<Prefix>& prefixes) {
  std::vector<Logits> out;
  out.reserve(prefixes.size());
  for (const auto& p : prefixes) {
    if (p.empty() || p.front() != codec::kBos) throw std::invalid_argument("prefix must begin with BOS");
  }
  const std::size_t limit = std::max<std::size_t>(1, client.batch_limit());
  for (std::size_t begin = 0; begin < prefixes.size(); begin += limit) {
    const std::size_t end = std::min(prefixes.size(), begin + limit);
    std::vector<Prefix> batch(prefixes.begin() + static_cast<std::ptrdiff_t>(begin),
                              prefixes.begin() + static_cast<std::ptrdiff_t>(end));
    auto answer = client.logits(batch);
    if (answer.size() != batch.size()) {
      throw ProtocolError("model returned " + std::to_string(answer.size()) + " rows for a batch of " +
                          std::to_string(batch.size()));
    }
    for (auto& row : answer) {
      if (static_cast<int>(row.size()) != client.vocab_size()) {
        throw ProtocolError("logit row has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(client.vocab_size()));
      }
      for (double x : row) {
        if (!std::isfinite(x)) throw ProtocolError("non-finite logit");
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

/// A model defined by a function of the prefix. Used for stubs and mocks.
class FunctionClient : public ModelClient {
 public:
  using Fn = std::function<Logits(std::span<const Token>)>;

  FunctionClient(int vocab_size, std::string vocab_hash, Fn fn, std::size_t batch_limit = 64)
      : vocab_size_(vocab_size), vocab_hash_(std::move(vocab_hash)), fn_(std::move(fn)), batch_limit_(batch_limit) {}

  int vocab_size() const override { return vocab_size_; }
  std::string vocab_hash() const override { return vocab_hash_; }
  std::size_t batch_limit() const override { return batch_limit_; }

  std::vector<Logits> logits(const std::vector<Prefix>& prefixes) override {
    std::vector<Logits> out;
    out.reserve(prefixes.size());
    for (const auto& p : prefixes) out.push_back(fn_(p));
    ++calls_;
    return out;
  }

  std::size_t calls() const { return calls_; }

 private:
  int vocab_size_;
  std::string vocab_hash_;
  Fn fn_;
  std::size_t batch_limit_;
  std::size_t calls_ = 0;
};

/// A stub that answers from a fixed prefix -> logits table.
class TableClient : public ModelClient {
 public:
  TableClient(int vocab_size, std::map<Prefix, Logits> table, std::string vocab_hash = "table")
      : vocab_size_(vocab_size), table_(std::move(table)), vocab_hash_(std::move(vocab_hash)) {}

  int vocab_size() const override { return vocab_size_; }
  std::string vocab_hash() const override { return vocab_hash_; }
  std::size_t batch_limit() const override { return 16; }

  std::vector<Logits> logits(const std::vector<Prefix>& prefixes) override {
    std::vector<Logits> out;
    for (const auto& p : prefixes) {
      const auto it = table_.find(p);
      if (it == table_.end()) throw ProtocolError("prefix not in stub table");
      out.push_back(it->second);
    }
    return out;
  }

 private:
  int vocab_size_;
  std::map<Prefix, Logits> table_;
  std::string vocab_hash_;
};

}  // namespace forge::eval
