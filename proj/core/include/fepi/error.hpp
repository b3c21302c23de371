#pragma once

#include <stdexcept>
#include <string>

namespace fepi {

enum class ErrorKind {
  parameter,
  domain,
  convergence,
  inversion_quality,
  degenerate_input,
  precision,
  numeric,
  spec,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `kind()` lets callers (the CLI in
/// particular) map failures onto diagnostics without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::domain: return "domain";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::inversion_quality: return "inversion-quality";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::precision: return "precision";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::spec: return "spec";
  }
  return "unknown";
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace fepi
