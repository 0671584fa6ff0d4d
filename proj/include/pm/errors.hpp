#pragma once

#include <stdexcept>
#include <string>

namespace pm {

// Bad caller-supplied value (nonpositive dt, wrong lengths, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A model function returned something outside its domain, e.g. sigma <= 0.
struct ModelError : std::domain_error {
  using std::domain_error::domain_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition on state violated (pinned endpoint moved, non-finite start).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pm
