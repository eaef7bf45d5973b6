#pragma once

#include <stdexcept>
#include <string>

namespace bss {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A scenario or data document violates its schema or an invariant.
/// `path()` is a JSON pointer (or "line:column" for delimited tables).
class ValidationError : public Error {
public:
  ValidationError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

/// A relative quantity was requested with a zero denominator.
class UndefinedRatioError : public Error {
public:
  using Error::Error;
};

/// A root-finding request has no solution in the admissible range.
class NoSolutionError : public Error {
public:
  NoSolutionError(const std::string& message, double floor)
      : Error(message), floor_(floor) {}

  /// Asymptotic lower bound of the function that was searched.
  double floor() const noexcept { return floor_; }

private:
  double floor_;
};

/// An inverse problem is singular or its unknowns are not identifiable.
class RankDeficiencyError : public Error {
public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace bss
