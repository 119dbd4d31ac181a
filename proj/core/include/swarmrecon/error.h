#ifndef SWARMRECON_ERROR_H_
#define SWARMRECON_ERROR_H_

#include <stdexcept>
#include <string>

namespace swarmrecon {

// Malformed or inconsistent configuration (bad keys, unknown scenario, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite losses, gradients or rewards during training.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persisted data failed validation (version, corruption, replay mismatch).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swarmrecon

#endif  // SWARMRECON_ERROR_H_
