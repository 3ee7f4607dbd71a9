#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace margins {

// Base class for every error thrown by this library. Catching margins::Error
// is sufficient to contain any failure originating here; std::bad_alloc and
// friends still pass through untouched. kind() names the concrete error for
// diagnostics without RTTI gymnastics.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const { return "Error"; }
};

#define MARGINS_DEFINE_ERROR(name)                     \
  class name : public Error {                          \
   public:                                             \
    using Error::Error;                                \
    const char* kind() const override { return #name; } \
  }

MARGINS_DEFINE_ERROR(InvalidParameter);

// Requested a density from a distribution that has none (empirical data).
MARGINS_DEFINE_ERROR(DensityUnavailable);

// Adaptive quadrature hit its depth budget before meeting the tolerance.
MARGINS_DEFINE_ERROR(QuadratureFailure);

MARGINS_DEFINE_ERROR(UnknownTransform);

// A formula's precondition does not hold for these parameters; the quantity
// simply does not exist (e.g. an interior critical point of a log-concave
// mixture).
MARGINS_DEFINE_ERROR(NotApplicable);

MARGINS_DEFINE_ERROR(NegativeThreshold);
MARGINS_DEFINE_ERROR(ZeroCoverage);
MARGINS_DEFINE_ERROR(DegenerateTail);
MARGINS_DEFINE_ERROR(NonpositiveDensity);
MARGINS_DEFINE_ERROR(DegenerateSample);
MARGINS_DEFINE_ERROR(EmptyInput);
MARGINS_DEFINE_ERROR(WeightMismatch);
MARGINS_DEFINE_ERROR(NoPredictions);
MARGINS_DEFINE_ERROR(TooLarge);
MARGINS_DEFINE_ERROR(UndefinedRate);
MARGINS_DEFINE_ERROR(ZeroMass);
MARGINS_DEFINE_ERROR(NotLogConcave);
MARGINS_DEFINE_ERROR(OutOfRange);
MARGINS_DEFINE_ERROR(NegativeConfidence);
MARGINS_DEFINE_ERROR(SchemaError);
MARGINS_DEFINE_ERROR(EmptyFile);
MARGINS_DEFINE_ERROR(UnsupportedFormat);

#undef MARGINS_DEFINE_ERROR

// Carries the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  const char* kind() const override { return "ParseError"; }
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace margins
