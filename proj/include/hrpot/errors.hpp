#ifndef HRPOT_ERRORS_HPP
#define HRPOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hrpot {

// Base class for all errors thrown by this library. Callers that do not care
// about the exact failure mode can catch this one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A matrix required to be symmetric positive definite failed its Cholesky
// factorization (a pivot fell below the relative tolerance).
struct NotPositiveDefinite : Error {
    using Error::Error;
};

// An argument was outside the domain of the operation (negative dependence
// parameter, mismatched dimensions, quantile outside (0,1), ...).
struct DomainError : Error {
    using Error::Error;
};

// A threshold selection produced fewer exceedances than the configured
// minimum; estimates from such sets would be meaningless.
struct TooFewExceedances : Error {
    using Error::Error;
};

// A data column is constant, so rank-based standardization is undefined.
struct DegenerateColumn : Error {
    using Error::Error;
};

// The block length exceeds the sample size, leaving no complete block.
struct BlockTooLarge : Error {
    using Error::Error;
};

// File could not be read, parsed, or written. Used by the I/O helpers and
// surfaced by the command line tool as its own exit code.
struct IoError : Error {
    using Error::Error;
};

} // namespace hrpot

#endif
