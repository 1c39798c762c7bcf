#pragma once

#include <stdexcept>
#include <string>

namespace toxic {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes: UsageError -> 1, everything else -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TOXIC_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  };

TOXIC_DEFINE_ERROR(UsageError)
TOXIC_DEFINE_ERROR(SchemaError)
TOXIC_DEFINE_ERROR(DataError)
TOXIC_DEFINE_ERROR(ParseError)
TOXIC_DEFINE_ERROR(FormatError)
TOXIC_DEFINE_ERROR(ParamError)
TOXIC_DEFINE_ERROR(ConfigError)
TOXIC_DEFINE_ERROR(ShapeError)
TOXIC_DEFINE_ERROR(NumericError)
TOXIC_DEFINE_ERROR(MetricError)
TOXIC_DEFINE_ERROR(FitError)
TOXIC_DEFINE_ERROR(IntegrityError)
TOXIC_DEFINE_ERROR(SpecError)

#undef TOXIC_DEFINE_ERROR

}  // namespace toxic
