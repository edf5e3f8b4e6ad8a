#pragma once

#include <stdexcept>
#include <string>

namespace chen {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CHEN_DEFINE_ERROR(Name)                   \
    class Name : public Error {                   \
    public:                                       \
        using Error::Error;                       \
    };

// algebra input
CHEN_DEFINE_ERROR(ParseError)
CHEN_DEFINE_ERROR(AlgebraInvalid)
CHEN_DEFINE_ERROR(MixedAlgebras)
CHEN_DEFINE_ERROR(DegreeOutOfRange)

// linear algebra / bar complex
CHEN_DEFINE_ERROR(DimensionMismatch)
CHEN_DEFINE_ERROR(CapTooSmall)
CHEN_DEFINE_ERROR(NoClassFound)
CHEN_DEFINE_ERROR(FunctionalNotClosed)

// geometry
CHEN_DEFINE_ERROR(AntipodalSegment)
CHEN_DEFINE_ERROR(NotBasedAtX0)
CHEN_DEFINE_ERROR(BasepointMismatch)
CHEN_DEFINE_ERROR(NotOnSphere)

// numerics
CHEN_DEFINE_ERROR(ArityMismatch)
CHEN_DEFINE_ERROR(TargetMismatch)
CHEN_DEFINE_ERROR(DegreeMismatch)
CHEN_DEFINE_ERROR(BoundViolated)

#undef CHEN_DEFINE_ERROR

} // namespace chen
