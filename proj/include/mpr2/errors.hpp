#pragma once

#include <stdexcept>
#include <string>

namespace mpr2 {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An operation produced a value outside the target format's finite range.
struct OverflowError : Error {
    explicit OverflowError(const std::string& what) : Error(what) {}
};

struct DivisionByZero : Error {
    explicit DivisionByZero(const std::string& what) : Error(what) {}
};

// n * u >= 1 (or a derived gamma/beta quantity left its domain).
struct InvalidDimension : Error {
    explicit InvalidDimension(const std::string& what) : Error(what) {}
};

// Requested evaluation format is coarser than the argument's format.
struct ForbiddenEvaluation : Error {
    explicit ForbiddenEvaluation(const std::string& what) : Error(what) {}
};

// Relative gradient error bound is undefined: computed gradient is zero but
// the enclosure radius is not.
struct ZeroGradientBound : Error {
    explicit ZeroGradientBound(const std::string& what) : Error(what) {}
};

// fl(||s||) = 0, the phi ratio is undefined.
struct DegenerateStep : Error {
    explicit DegenerateStep(const std::string& what) : Error(what) {}
};

struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& what) : Error(what) {}
};

struct UnknownProblem : Error {
    explicit UnknownProblem(const std::string& what) : Error(what) {}
};

struct BadDimension : Error {
    explicit BadDimension(const std::string& what) : Error(what) {}
};

struct UnsupportedPrimitive : Error {
    explicit UnsupportedPrimitive(const std::string& what) : Error(what) {}
};

// sqrt of a rational that is not a perfect square; carries no payload, the
// caller is expected to fall back to an enclosure.
struct IrrationalResult : Error {
    explicit IrrationalResult(const std::string& what) : Error(what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

struct EmptyIntersection : Error {
    explicit EmptyIntersection(const std::string& what) : Error(what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace mpr2
