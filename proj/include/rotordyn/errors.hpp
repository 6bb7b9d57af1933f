#pragma once

// Error taxonomy shared by the library and the CLI front end. The CLI maps
// each category to a distinct process exit code.

#include <stdexcept>
#include <string>

namespace rotordyn {

// Malformed configuration input (unknown key, bad value, inconsistent combination).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Basis truncation or eigensolver convergence failure.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical integrity failure (positivity loss, degenerate state, singular input).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failure while writing or reading result files.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rotordyn
