#pragma once

#include <stdexcept>
#include <string>

namespace fracdiss {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_argument,      // validation: bad parameter value or contract violation
  unsupported,           // validation: outside the supported domain (e.g. n >= 3)
  numerical,             // quadrature non-convergence, overflow, no contraction
  insufficient_growth,   // blow-up analysis requested on a run without growth
  io,                    // file system / config file failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what,
                    ErrorKind kind = ErrorKind::invalid_argument) {
  if (!cond) throw Error(kind, what);
}

} // namespace fracdiss
