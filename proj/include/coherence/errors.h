// errors.h - exception types shared by every coherence module
#pragma once

#include <stdexcept>
#include <string>

namespace coh {

/// Base for all library errors. `exit_code()` is the stable CLI contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A matrix that violates the density-matrix invariants (Hermitian, trace one, PSD).
class InvalidState : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Requested size exceeds a configured cap (tensor size, oracle particle count).
class CapacityError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class InsufficientData : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

/// Random placement could not satisfy the minimum pair distance.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

} // namespace coh
