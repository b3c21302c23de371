#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fepi/serialize.hpp"

namespace fepi::cli {

using io::json;

/// Exit codes of the driver.
enum ExitCode : int { kSuccess = 0, kError = 1, kViolated = 2, kInconclusive = 3 };

int exit_code(Verdict verdict);

/// A config that fails validation. `pointer` is the JSON pointer of the
/// offending value and `line` its line in the config text (0 if unknown).
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string pointer, const std::string& message, int line = 0);
  const std::string& pointer() const noexcept { return pointer_; }
  int line() const noexcept { return line_; }

 private:
  std::string pointer_;
  int line_;
};

/// Command-line overrides; unset fields fall back to the config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
};

struct Outcome {
  int exit_code = kSuccess;
  /// Serialized output in the requested format.
  std::string body;
  std::string format = "json";
  /// Structured result (one entry per row for sweeps).
  json document;
};

const std::vector<std::string>& command_names();

/// Runs a parsed config (single run or sweep). Throws SchemaError on
/// validation failures and fepi::Error on numeric failures.
Outcome run(const json& config, const Overrides& overrides = {});

/// Parses `text`, runs it, and attaches line numbers to schema errors.
Outcome run_text(const std::string& text, const Overrides& overrides = {});

/// Line (1-based) of the value at `pointer` in `text`, or 0.
int locate_pointer(const std::string& text, const std::string& pointer);

}  // namespace fepi::cli
