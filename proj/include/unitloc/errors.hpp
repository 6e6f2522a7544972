#pragma once

#include <stdexcept>
#include <string>

namespace unitloc {

// Base type for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UNITLOC_ERROR(Name)                  \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// stimuli
UNITLOC_ERROR(FileMissingError);
UNITLOC_ERROR(CountMismatchError);
UNITLOC_ERROR(EmptyItemError);
UNITLOC_ERROR(InvalidTemplateError);
UNITLOC_ERROR(MalformedRecordError);
UNITLOC_ERROR(UnknownLabelError);

// model adapter
UNITLOC_ERROR(TokenizationEmptyError);
UNITLOC_ERROR(ContextOverflowError);
UNITLOC_ERROR(EmptyContinuationError);
UNITLOC_ERROR(ModelMismatchError);

// statistics / localization
UNITLOC_ERROR(TooFewSamplesError);
UNITLOC_ERROR(ShapeMismatchError);
UNITLOC_ERROR(PercentOutOfRangeError);
UNITLOC_ERROR(InvalidPError);
UNITLOC_ERROR(EmptyUnitSetError);
UNITLOC_ERROR(UniverseTooSmallError);

// lesion evaluation
UNITLOC_ERROR(EmptyBenchmarkError);
UNITLOC_ERROR(NotEnoughExamplesError);
UNITLOC_ERROR(UnknownTagError);
UNITLOC_ERROR(ZeroPooledVarianceError);

// encoding
UNITLOC_ERROR(DegenerateDesignError);
UNITLOC_ERROR(ConstantVectorError);
UNITLOC_ERROR(GroupLeakError);
UNITLOC_ERROR(TooFewStimuliError);

// orchestration
UNITLOC_ERROR(ConfigError);
UNITLOC_ERROR(MissingRunArtifactsError);

#undef UNITLOC_ERROR

}  // namespace unitloc
