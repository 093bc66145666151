#pragma once

#include <stdexcept>
#include <string>

namespace terragan {

/// Bad command line or configuration. CLI exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed or inconsistent input data. CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training stopped because a loss went non-finite. CLI exit code 3.
struct TrainingAborted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace terragan
