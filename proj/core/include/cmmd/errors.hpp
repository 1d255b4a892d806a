#ifndef CMMD_ERRORS_HPP
#define CMMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmmd {

// Malformed data: dimension mismatches, non-finite entries, unreadable files.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-range configuration values (lambda <= 0, delta outside (0,1), ...).
struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// API contract violations, e.g. mixing models with different output kernels.
struct MisuseError : std::logic_error {
  explicit MisuseError(const std::string& what) : std::logic_error(what) {}
};

// Factorization failures that survive the jitter fallback.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Bootstrap calibration cannot produce a finite threshold.
struct CalibrationError : std::runtime_error {
  explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmmd

#endif
