#pragma once

#include <stdexcept>
#include <string>

namespace fractal {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes do not line up: dimension or factor-structure mismatch, empty input.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A configured size cap would be exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or divergence during an iteration.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation is violated.
class ContractError : public Error {
public:
    using Error::Error;
};

/// The input is valid but outside what the algorithm supports.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace fractal
