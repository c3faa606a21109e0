#pragma once

#include <stdexcept>
#include <string>

namespace ofdm {

// Malformed input: dimension mismatches, invalid probability tables, unknown
// config keys. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Well-formed input whose numeric parameters violate a construction's
// feasibility inequalities (e.g. hard-instance gap >= 1/2). Exit code 3.
class ParameterError : public std::domain_error {
 public:
  explicit ParameterError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace ofdm
