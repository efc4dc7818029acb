#pragma once

#include <stdexcept>
#include <string>

namespace homsim {

// Thrown when an iterative numerical routine fails to reach its tolerance
// (quadrature, fits). Carries a human-readable diagnostic.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on malformed configuration files or inconsistent run parameters.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an output or input file cannot be read/written.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace homsim
