#pragma once

#include <stdexcept>
#include <string>

namespace kfk {

/// A numeric argument outside its documented range.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector arguments of incompatible dimension.
class dimension_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A phase point outside the set an operation requires.
class domain_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A lattice that cannot resolve the requested kernel.
/// The message names the failing check and the achieved value.
class resolution_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file or override problems (message carries line/key).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kfk
