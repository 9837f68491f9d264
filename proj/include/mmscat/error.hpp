#pragma once

#include <stdexcept>
#include <string>

namespace mmscat {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define MMSCAT_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                \
      public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

MMSCAT_DEFINE_ERROR(InvalidInput);
MMSCAT_DEFINE_ERROR(NonUnitary);
MMSCAT_DEFINE_ERROR(NotPositiveDefinite);
MMSCAT_DEFINE_ERROR(StepFailure);
MMSCAT_DEFINE_ERROR(SingularJostMatrix);
MMSCAT_DEFINE_ERROR(ClusterAmbiguity);
MMSCAT_DEFINE_ERROR(TailTooLarge);
MMSCAT_DEFINE_ERROR(NearSingularSystem);
MMSCAT_DEFINE_ERROR(IllConditionedRecovery);
MMSCAT_DEFINE_ERROR(DimensionMismatch);

#undef MMSCAT_DEFINE_ERROR

} // namespace mmscat
