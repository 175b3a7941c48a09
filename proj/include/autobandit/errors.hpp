#pragma once

#include <stdexcept>
#include <string>

namespace autobandit {

// Exit-code categories used by the command line tool.
enum class ErrorCategory { config = 2, data = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct ActionError : Error {
  explicit ActionError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct LengthError : Error {
  explicit LengthError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct StreamExhausted : Error {
  explicit StreamExhausted(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

// Unparseable cell; row is 1-based over data rows (header excluded).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : Error(ErrorCategory::data,
              "row " + std::to_string(row) + ", column '" + column + "': " + what),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace autobandit
