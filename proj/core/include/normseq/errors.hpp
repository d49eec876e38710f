#pragma once

#include <stdexcept>
#include <string>

namespace normseq {

// Bad input data or configuration: maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& what) : ValidationError(what) {}
};

// Anything that goes wrong after inputs were accepted: exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public RuntimeFailure {
 public:
  explicit IoError(const std::string& what) : RuntimeFailure(what) {}
};

}  // namespace normseq
