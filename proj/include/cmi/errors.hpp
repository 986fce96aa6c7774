#pragma once

#include <stdexcept>
#include <string>

namespace cmi {

/// A value became NaN or infinite inside a public operation.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

/// An object was used out of sequence (e.g. backward before forward).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// A restricted sampling pool ended up empty.
class DegeneratePoolError : public std::runtime_error {
 public:
  explicit DegeneratePoolError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace cmi
