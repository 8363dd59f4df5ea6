#pragma once

#include <stdexcept>
#include <string>

namespace tensorreg {

// Base for everything the library throws on bad input. The CLI maps these to
// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TENSORREG_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  };

TENSORREG_DEFINE_ERROR(ShapeMismatch)
TENSORREG_DEFINE_ERROR(InvalidAxes)
TENSORREG_DEFINE_ERROR(InvalidValue)
TENSORREG_DEFINE_ERROR(UnsupportedKind)
TENSORREG_DEFINE_ERROR(NoClosedFormProx)
TENSORREG_DEFINE_ERROR(UnmatchedPair)
TENSORREG_DEFINE_ERROR(ZeroTensor)
TENSORREG_DEFINE_ERROR(SvdFailure)
TENSORREG_DEFINE_ERROR(InfeasibleClass)
TENSORREG_DEFINE_ERROR(BadCovarianceFactor)
TENSORREG_DEFINE_ERROR(UnstableModel)
TENSORREG_DEFINE_ERROR(ConfigError)
TENSORREG_DEFINE_ERROR(IoError)
TENSORREG_DEFINE_ERROR(FormatError)

#undef TENSORREG_DEFINE_ERROR

}  // namespace tensorreg
