#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace genderprobe {

// Input that cannot be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input parsed fine but violates a contract (empty lexicon, bad config, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Network failure after retries were exhausted.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replay backend has no stored completion for the requested key.
class ReplayMissError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One or more adjectives could not be mapped to the pivot language.
class TranslationError : public std::runtime_error {
 public:
  TranslationError(const std::string& what, std::vector<std::string> tokens)
      : std::runtime_error(what), tokens_(std::move(tokens)) {}
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
};

}  // namespace genderprobe
