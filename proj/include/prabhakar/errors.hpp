#pragma once

#include <stdexcept>
#include <string>

namespace prabhakar {

/// Base class for every error raised by the library. The CLI maps the
/// concrete types onto its exit-code contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PRABHAKAR_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

PRABHAKAR_DEFINE_ERROR(InvalidParams);
PRABHAKAR_DEFINE_ERROR(NonConvergence);
PRABHAKAR_DEFINE_ERROR(DomainError);
PRABHAKAR_DEFINE_ERROR(QuadratureFailure);
PRABHAKAR_DEFINE_ERROR(ArgumentOutOfRange);
PRABHAKAR_DEFINE_ERROR(InvalidData);
PRABHAKAR_DEFINE_ERROR(DegenerateNonlocal);
PRABHAKAR_DEFINE_ERROR(SingularStep);
PRABHAKAR_DEFINE_ERROR(MaxIterExceeded);
PRABHAKAR_DEFINE_ERROR(RegimeViolation);
PRABHAKAR_DEFINE_ERROR(NonDifferentiable);

#undef PRABHAKAR_DEFINE_ERROR

/// Syntax error in an expression; `offset` is the byte offset of the
/// offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& expectation)
        : Error("ParseError at offset " + std::to_string(offset) + ": expected " + expectation),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Domain fault while evaluating an expression (ln of a non-positive value,
/// division by zero, ...). `offset` locates the failing node in the source.
class EvalError : public Error {
public:
    EvalError(std::size_t offset, const std::string& what)
        : Error("EvalError at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace prabhakar
