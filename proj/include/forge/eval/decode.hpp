#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/eval/client.hpp"

namespace forge::eval {

/// Every hypothesis of a puzzle was masked out. Recorded per puzzle.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tokens the decoder may emit next, given what it has generated so far.
using AllowedFn = std::function<std::vector<Token>(std::span<const Token> generated)>;

inline double log_sum_exp(const Logits& row) {
  const double hi = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double x : row) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

struct Hypothesis {
  Prefix tokens;  // full sequence, prompt included
  double score = 0.0;  // sum of log-probabilities of the generated tokens
  bool ended = false;  // emitted the end token
  bool finished = false;  // ended, or hit the length cap
};

struct BeamOptions {
  int width = 1;
  Token end = codec::kEos;
  std::size_t max_new_tokens = 256;
};

/// Length-synchronous beam search over one prompt, driven from outside so
/// that many searches can share logit batches.
///
/// Each round expands every unfinished hypothesis by every allowed token,
/// scored by log-softmax over the full vocabulary, and keeps the best `width`
/// candidates. Finished hypotheses compete unchanged. Ties are broken by
/// parent rank, then raw logit, then lower token id, so width 1 is exactly
/// greedy decoding. The search ends once the best hypothesis is finished;
/// scores only fall, so nothing can overtake it.
class BeamSearch {
 public:
  BeamSearch(Prefix prompt, BeamOptions options, AllowedFn allowed)
      : prompt_len_(prompt.size()), options_(options), allowed_(std::move(allowed)) {
    if (options_.width < 1) throw std::invalid_argument("beam width must be at least 1");
    beam_.push_back({std::move(prompt), 0.0, false, options_.max_new_tokens == 0});
    done_ = beam_.front().finished;
  }

  bool done() const { return done_; }
  bool failed() const { return error_.has_value(); }
  const std::optional<std::string>& error() const { return error_; }

  /// Prefixes whose next-token logits the next round needs, in beam order.
  std::vector<Prefix> pending() const {
    std::vector<Prefix> out;
    if (done_) return out;
    for (const auto& h : beam_) {
      if (!h.finished) out.push_back(h.tokens);
    }
    return out;
  }

  /// Consumes one logit row per pending prefix.
  void advance(const std::vector<Logits>& rows) {
    try {
      step(rows);
    } catch (const DecodeError& e) {
      error_ = e.what();
      done_ = true;
    }
  }

  const Hypothesis& best() const { return beam_.front(); }
  const std::vector<Hypothesis>& beam() const { return beam_; }

  std::vector<Token> generated() const {
    return {best().tokens.begin() + static_cast<std::ptrdiff_t>(prompt_len_), best().tokens.end()};
  }

 private:
  struct Candidate {
    double score;
    std::size_t parent;
    double raw;
    Token token;
    bool carried;
  };

  static bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.parent != b.parent) return a.parent < b.parent;
    if (a.raw != b.raw) return a.raw > b.raw;
    return a.token < b.token;
  }

  void step(const std::vector<Logits>& rows) {
    if (done_) return;
    std::vector<Candidate> pool;
    std::size_t row = 0;
    for (std::size_t i = 0; i < beam_.size(); ++i) {
      const auto& h = beam_[i];
      if (h.finished) {
        pool.push_back({h.score, i, std::numeric_limits<double>::infinity(), options_.end, true});
        continue;
      }
      if (row >= rows.size()) throw std::invalid_argument("fewer logit rows than pending hypotheses");
      const Logits& logits = rows[row++];
      const double lse = log_sum_exp(logits);
      const std::span<const Token> gen(h.tokens.data() + prompt_len_, h.tokens.size() - prompt_len_);
      for (Token t : allowed_(gen)) {
        if (t >= logits.size()) throw DecodeError("allowed token " + std::to_string(t) + " is outside the vocabulary");
        pool.push_back({h.score + (logits[t] - lse), i, logits[t], t, false});
      }
    }
    if (row != rows.size()) throw std::invalid_argument("more logit rows than pending hypotheses");
    if (pool.empty()) throw DecodeError("every hypothesis was masked out");

    const std::size_t keep = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(options_.width));
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), ranks_before);
    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& c = pool[k];
      if (c.carried) {
        next.push_back(beam_[c.parent]);
        continue;
      }
      Hypothesis h = beam_[c.parent];
      h.tokens.push_back(c.token);
      h.score = c.score;
      h.ended = c.token == options_.end;
      h.finished = h.ended || h.tokens.size() - prompt_len_ >= options_.max_new_tokens;
      next.push_back(std::move(h));
    }
    beam_ = std::move(next);
    done_ = beam_.front().finished;
  }

  std::size_t prompt_len_;
  BeamOptions options_;
  AllowedFn allowed_;
  std::vector<Hypothesis> beam_;
  bool done_ = false;
  std::optional<std::string> error_;
};

/// Runs all searches to completion, keeping at most `in_flight` active and
/// batching their logit requests together. Results do not depend on
/// `in_flight` because each search only sees its own rows.
inline void run_searches(ModelClient& client, std::vector<BeamSearch>& searches, std::size_t in_flight = 64) {
  in_flight = std::max<std::size_t>(1, in_flight);
  std::size_t admitted = 0;
  std::vector<std::size_t> active;
  for (;;) {
    std::erase_if(active, [&](std::size_t i) { return searches[i].done(); });
    while (active.size() < in_flight && admitted < searches.size()) {
      if (!searches[admitted].done()) active.push_back(admitted);
      ++admitted;
    }
    if (active.empty()) return;
    std::vector<Prefix> batch;
    std::vector<std::size_t> counts;
    for (std::size_t i : active) {
      auto p = searches[i].pending();
      counts.push_back(p.size());
      for (auto& x : p) batch.push_back(std::move(x));
    }
    const auto rows = request_logits(client, batch);
    std::size_t at = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      std::vector<Logits> mine(rows.begin() + static_cast<std::ptrdiff_t>(at),
                               rows.begin() + static_cast<std::ptrdiff_t>(at + counts[k]));
      at += counts[k];
      searches[active[k]].advance(mine);
    }
  }
}

/// Reference greedy decoder: the allowed token with the largest logit,
/// lowest id on ties, until the end token or the length cap.
inline std::vector<Token> greedy_decode(ModelClient& client, Prefix prompt, const AllowedFn& allowed, Token end,
                                        std::size_t max_new_tokens) {
  const std::size_t start = prompt.size();
  while (prompt.size() - start < max_new_tokens) {
    const auto rows = request_logits(client, {prompt});
    const auto options = allowed(std::span<const Token>(prompt.data() + start, prompt.size() - start));
    if (options.empty()) throw DecodeError("every token was masked out");
    Token pick = options.front();
    for (Token t : options) {
      if (t >= rows[0].size()) throw DecodeError("allowed token is outside the vocabulary");
      if (rows[0][t] > rows[0][pick] || (rows[0][t] == rows[0][pick] && t < pick)) pick = t;
    }
    prompt.push_back(pick);
    if (pick == end) break;
  }
  return {prompt.begin() + static_cast<std::ptrdiff_t>(start), prompt.end()};
}

/// Token grammar of a puzzle's solution part. Masked: each triplet slot
/// admits only tokens of its block, and EOS is forced once every empty cell
/// has a triplet. Unmasked: any token, with the same length cap.
struct SlotGrammar {
  codec::PuzzleKind kind = codec::PuzzleKind::Sudoku;
  int m = 9;  // Sudoku: 9. Zebra: positions (and values)
  int n = 9;  // Sudoku: 9. Zebra: attributes
  int empties = 0;
  bool masked = true;
  int vocab_size = 13;

  std::size_t max_new_tokens() const { return 3 * static_cast<std::size_t>(empties) + 1; }

  std::vector<Token> allowed(std::span<const Token> generated) const {
    std::vector<Token> out;
    if (!masked) {
      for (int t = 0; t < vocab_size; ++t) out.push_back(static_cast<Token>(t));
      return out;
    }
    const std::size_t slot = generated.size() % 3;
    if (slot == 0 && generated.size() / 3 >= static_cast<std::size_t>(empties)) return {codec::kEos};
    if (kind == codec::PuzzleKind::Sudoku) {
      for (int d = 1; d <= 9; ++d) out.push_back(codec::digit_token(d));
      return out;
    }
    const int count = slot == 1 ? n : m;
    for (int k = 1; k <= count; ++k) {
      out.push_back(slot == 0 ? codec::position_token(k) : slot == 1 ? codec::attribute_token(k) : codec::value_token(k));
    }
    return out;
  }

  AllowedFn fn() const {
    return [g = *this](std::span<const Token> generated) { return g.allowed(generated); };
  }
};

}  // namespace forge::eval
