#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, dimension mismatches, malformed scenario files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A CSV row that cannot be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates an ordering or layout contract.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Sender/receiver disagreement: unknown tags, out-of-order samples,
/// state updates without a measurement.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A wire frame shorter than its tag requires.
class FrameError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

/// Predictor bookkeeping out of its admissible range.
class StateCorruptionError : public Error {
 public:
  using Error::Error;
};

/// Not enough buffered measurements for an identification step.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// The autocovariance of the increments shows no usable periodicity.
class NoCycleError : public Error {
 public:
  using Error::Error;
};

/// Monte-Carlo simulation that can never produce a state update.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

/// A quantity that is undefined for the given input (e.g. a ratio over
/// zero samples).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

}  // namespace etl
