#pragma once

#include <stdexcept>
#include <string>

namespace qstrat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad numeric configuration (resolution, thresholds, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A ball or point leaves the region where quadrature is valid.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyMeasureError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class CoveringInvalidError : public Error {
 public:
  using Error::Error;
};

class DecayViolationError : public Error {
 public:
  DecayViolationError(const std::string& what, int generation)
      : Error(what), generation_(generation) {}
  int generation() const { return generation_; }

 private:
  int generation_;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class InputError : public Error {
 public:
  InputError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace qstrat
