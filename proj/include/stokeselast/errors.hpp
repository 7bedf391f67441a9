#pragma once

#include <stdexcept>
#include <string>

namespace selast {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad grid sizes, coefficient floors violated,
/// malformed configuration, out-of-range parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Linear-solve failure. `near_singular()` is set when the matrix factorized
/// but the residual could not be driven below tolerance (the frequency-near-
/// eigenvalue situation) or when the factorization detected a singular pivot.
class SolverError : public Error {
public:
    explicit SolverError(const std::string& what, bool near_singular = false)
        : Error(what), near_singular_(near_singular) {}
    bool near_singular() const { return near_singular_; }

private:
    bool near_singular_ = false;
};

/// File-format violations: checksum mismatch, dimension mismatch,
/// unknown stagger tags, unparsable manifests.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace selast
