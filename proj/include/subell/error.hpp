#pragma once

#include <stdexcept>
#include <string>

namespace subell {

enum class ErrorKind {
  input,             // dimension mismatch, malformed arguments
  unsupported,       // operation not defined for this structure
  no_path,           // CC graph search exhausted its box/budget
  numerical,         // non-convergence of an inner algorithm, NaN
  not_psd,           // materially negative eigenvalue
  precondition,      // documented precondition violated
  singular_point,    // x == y in the doubling calculus
  inadmissible,      // exponent outside the admissible range
  boundary_stencil,  // difference stencil leaves the grid box
  config,            // run configuration rejected
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace subell
