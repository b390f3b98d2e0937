#ifndef SEGOPT_CORE_ERRORS_HPP
#define SEGOPT_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace segopt {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Io,
  DegenerateMask,
  Numeric,
  State,
  Unsupported,
};

/// Library-wide exception carrying a coarse error category; the C API maps
/// the category to a status code and the message to segopt_last_error().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace segopt

#endif
