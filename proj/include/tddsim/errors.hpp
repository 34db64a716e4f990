#pragma once

#include <stdexcept>
#include <string>

namespace tddsim {

/// Bad parameter value or malformed config input.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unusable sampled layout (e.g. zero SAPs); the caller may resample.
class TopologyError : public std::runtime_error {
 public:
  explicit TopologyError(const std::string& what) : std::runtime_error(what) {}
};

/// Co-located nodes. Probability zero under the continuous model, so this
/// aborts the realization with a diagnostic instead of clamping a distance.
class DegenerateGeometryError : public std::runtime_error {
 public:
  explicit DegenerateGeometryError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace tddsim
