#pragma once

#include <stdexcept>
#include <string>

namespace geopretext {

/// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Problems ingesting or parsing data files (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Missing or truncated input file.
class IngestionError : public DataError {
 public:
  explicit IngestionError(const std::string& what) : DataError(what) {}
};

/// File present but malformed (bad record length, bad magic, ...).
class FormatError : public DataError {
 public:
  explicit FormatError(const std::string& what) : DataError(what) {}
};

/// Training aborted (non-finite loss, failed checkpoint write; CLI exit code 4).
class TrainAbort : public std::runtime_error {
 public:
  explicit TrainAbort(const std::string& what) : std::runtime_error(what) {}
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int data_error = 3;
inline constexpr int train_abort = 4;
}  // namespace exit_code

}  // namespace geopretext
