#pragma once

#include <stdexcept>
#include <string>

namespace fedvs {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroInverse : Error {
    using Error::Error;
};
struct DuplicatePoints : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct OverflowRange : Error {
    using Error::Error;
};
struct NonFiniteInput : Error {
    using Error::Error;
};
struct InsufficientResponders : Error {
    using Error::Error;
};
struct MissingShare : Error {
    using Error::Error;
};
struct EmptyResponderSet : Error {
    using Error::Error;
};
struct LabelMismatch : Error {
    using Error::Error;
};
struct OverflowBoundViolation : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct MalformedRow : Error {
    using Error::Error;
};
struct NonNumericFeature : Error {
    using Error::Error;
};

} // namespace fedvs
