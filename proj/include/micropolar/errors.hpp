#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace micropolar {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different grids or have incompatible shapes.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Derivative order beyond what the spectral calculus supports.
class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel failed (e.g. the matrix exponential did not converge).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Transformed and primitive variables handed to an operation disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Non-finite coefficient detected during time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(double t, int shell, const std::string& what)
      : Error(what), time_(t), shell_(shell) {}
  double time() const noexcept { return time_; }
  /// Dyadic shell of the first offending mode.
  int shell() const noexcept { return shell_; }

 private:
  double time_;
  int shell_;
};

/// Configuration document failed to parse.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Configuration parsed but violates one or more invariants; all are listed.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// Filesystem failure; carries the offending path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace micropolar
