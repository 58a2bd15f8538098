#pragma once

#include <stdexcept>
#include <string>

namespace near {

// Base class for all library errors. `code()` is a stable machine-readable
// identifier used by the CLI error records.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept { return "Error"; }
};

#define NEAR_ERROR_TYPE(Name)                                 \
  struct Name : Error {                                       \
    using Error::Error;                                       \
    const char* code() const noexcept override { return #Name; } \
  }

// linalg
NEAR_ERROR_TYPE(NonFiniteInput);
NEAR_ERROR_TYPE(InvalidDistribution);
NEAR_ERROR_TYPE(ZeroMatrix);

// netdef / scoring
NEAR_ERROR_TYPE(ShapeMismatch);
NEAR_ERROR_TYPE(InsufficientSamples);
NEAR_ERROR_TYPE(TooManyChannels);
NEAR_ERROR_TYPE(DegenerateLayer);

// sizing
NEAR_ERROR_TYPE(FitDegenerate);
NEAR_ERROR_TYPE(NoThreshold);

// evalstats
NEAR_ERROR_TYPE(DegenerateSample);
NEAR_ERROR_TYPE(InconsistentMethods);

// dataset / cli
NEAR_ERROR_TYPE(BadMagic);
NEAR_ERROR_TYPE(TruncatedFile);
NEAR_ERROR_TYPE(DimensionOverflow);
NEAR_ERROR_TYPE(RaggedRows);
NEAR_ERROR_TYPE(NonNumericCell);
NEAR_ERROR_TYPE(FileNotFound);

#undef NEAR_ERROR_TYPE

}  // namespace near
