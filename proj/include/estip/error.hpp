#pragma once

#include <stdexcept>
#include <string>

namespace estip {

/// Malformed or out-of-range user input: kernel specs, datum specs, solver
/// configs. Raised at construction time, never from inner loops.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with a density datum or image.
class DatumError : public std::runtime_error {
 public:
  enum class Kind { unreadable, bad_format, zero_mass, negative, grid_mismatch, unnormalized, outside_extent };

  DatumError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Numerical breakdown inside a solver (non-finite values, support leaving
/// the computational box).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace estip
