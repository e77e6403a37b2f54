#ifndef ADASTEP_ERRORS_HPP
#define ADASTEP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adastep {

/// Invalid configuration (bad parameter, dimension mismatch, malformed
/// config file). CLI maps this to exit code 1; messages name the offending
/// key or argument.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value where a finite one is required.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adastep

#endif  // ADASTEP_ERRORS_HPP
