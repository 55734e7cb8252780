#pragma once

#include <stdexcept>
#include <string>

namespace qdiode {

// Every failure raised by the core derives from Error so the C boundary can
// map it onto a status code without inspecting message text.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition or invariant violation on caller-supplied values.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Linear-algebra failure: degenerate null space, non-finite propagator, ...
class SolverError : public Error {
public:
    using Error::Error;
};

// Least-squares fit could not be carried out (unidentifiable data, bad shape).
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace qdiode
