#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geome {

// Base of every error the library raises that is not a plain
// std::invalid_argument / std::out_of_range contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateTripleError : public Error {
 public:
  DuplicateTripleError(const std::string& file, std::size_t first_line, std::size_t line)
      : Error(file + ":" + std::to_string(line) + ": duplicate triple (first seen on line " +
              std::to_string(first_line) + ")"),
        first_line_(first_line),
        line_(line) {}
  std::size_t first_line() const { return first_line_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t first_line_;
  std::size_t line_;
};

class VocabularyError : public Error {
 public:
  VocabularyError(const std::string& kind, const std::string& symbol)
      : Error("unknown " + kind + " '" + symbol + "'"), symbol_(symbol) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::size_t batch_index)
      : Error("training diverged: non-finite loss in batch " + std::to_string(batch_index)),
        batch_index_(batch_index) {}
  std::size_t batch_index() const { return batch_index_; }

 private:
  std::size_t batch_index_;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class BadMagic : public CheckpointError {
 public:
  BadMagic() : CheckpointError("bad magic") {}
};

class UnsupportedVersion : public CheckpointError {
 public:
  explicit UnsupportedVersion(unsigned version)
      : CheckpointError("unsupported checkpoint version " + std::to_string(version)) {}
};

class TruncatedCheckpoint : public CheckpointError {
 public:
  TruncatedCheckpoint() : CheckpointError("truncated checkpoint") {}
};

class ShapeMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace geome
