#pragma once

#include <stdexcept>
#include <string>

namespace benlog {

// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed textual input (digit strings, config values).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed value violates a proven bound (Hasse, oracle mismatch).
// Always indicates a bug, never bad input.
class IntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace benlog
