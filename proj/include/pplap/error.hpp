#pragma once

#include <stdexcept>
#include <string>

namespace pplap {

/// Bad input: malformed files, violated preconditions, dimension mismatches.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a trustworthy result
/// (quadrature on a non-finite integrand, solver breakdown).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pplap
