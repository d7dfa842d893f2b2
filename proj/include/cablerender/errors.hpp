#pragma once

#include <stdexcept>
#include <string>

namespace cablerender {

// End effector coincides with an anchor, or a layout has coincident anchors.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroVector : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent configuration / input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cablerender
