#pragma once

#include <stdexcept>
#include <string>

namespace hetcap {

enum class ErrorCode {
  Input = 1,
  Resolution = 2,
  Parameter = 3,
  DomainTooSmall = 4,
  Numerical = 5,
  Precondition = 6,
  Config = 7,
  Io = 8,
};

// Base of every exception thrown by the library. The C API maps the code
// one-to-one onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define HETCAP_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  };

HETCAP_DEFINE_ERROR(InputError, Input)
HETCAP_DEFINE_ERROR(ResolutionError, Resolution)
HETCAP_DEFINE_ERROR(ParameterError, Parameter)
HETCAP_DEFINE_ERROR(DomainTooSmallError, DomainTooSmall)
HETCAP_DEFINE_ERROR(NumericalError, Numerical)
HETCAP_DEFINE_ERROR(PreconditionError, Precondition)
HETCAP_DEFINE_ERROR(ConfigError, Config)
HETCAP_DEFINE_ERROR(IoError, Io)

#undef HETCAP_DEFINE_ERROR

}  // namespace hetcap
