#pragma once

#include <stdexcept>
#include <string>

namespace oobad {

/// Invalid configuration or usage (bad flag values, out-of-range settings).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with the input data itself: malformed CSV, non-numeric cells,
/// missing values, constant columns, non-binary labels.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the per-row statistics when a row has no out-of-bag trees.
class NoOobModels : public std::domain_error {
 public:
  NoOobModels() : std::domain_error("no OOB models") {}
};

}  // namespace oobad
