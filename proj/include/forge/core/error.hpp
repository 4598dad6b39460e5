#pragma once

#include <stdexcept>
#include <string>

namespace forge {

/// Malformed textual or binary input (wrong length, bad character, bad token stream).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is well-formed but violates puzzle rules (duplicate in a house, unsolvable, ...).
class ValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two inputs that must agree do not (trace vs board, manifest vs client).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forge
