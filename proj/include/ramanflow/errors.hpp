// errors.hpp - exception types shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace ramanflow {

/// Invalid input: bad ladder, missing coefficients, malformed config files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The integration produced a non-finite or unphysical state.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ramanflow
