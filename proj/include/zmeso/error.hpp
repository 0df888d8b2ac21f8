#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zmeso {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedTable : Error {
  MalformedTable(std::size_t line, const std::string& what)
      : Error("malformed zero table at line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct OutOfTabulatedRange : Error {
  using Error::Error;
};

struct SieveTooSmall : Error {
  using Error::Error;
};

struct ResourceExceeded : Error {
  using Error::Error;
};

struct Unsupported : Error {
  using Error::Error;
};

struct WindowExceedsTorus : Error {
  using Error::Error;
};

struct SupportBudgetExceeded : Error {
  using Error::Error;
};

struct ConfigError : Error {
  ConfigError(const std::string& field, const std::string& what)
      : Error("config field '" + field + "': " + what), field(field) {}
  std::string field;
};

}  // namespace zmeso
