#pragma once

#include <stdexcept>
#include <string>

namespace tsim {

/// Bad configuration value, unknown key, or unparsable input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not defined under the selected memory model.
class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Exhaustive exploration refused because the program is too large.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation cannot make progress. The message carries a per-core dump.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trace is structurally unusable (e.g. conflicting ops at identical
/// physiological time).
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsim
