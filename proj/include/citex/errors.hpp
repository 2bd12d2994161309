#pragma once

#include <stdexcept>
#include <string>

namespace citex {

// Malformed or inconsistent input data. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Line-addressed failure while reading a text/JSONL file.
struct ParseError : DataError {
  ParseError(const std::string& path, std::size_t line, const std::string& msg)
      : DataError(path + ":" + std::to_string(line) + ": " + msg),
        line_number(line) {}
  std::size_t line_number;
};

// Bad flags or configuration. The CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace citex
