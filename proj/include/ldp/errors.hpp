#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ldp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input validation --------------------------------------------------------

class EtaViolation : public Error {
public:
    EtaViolation(std::size_t i, std::size_t j, double value, double eta);
    std::size_t row;
    std::size_t col;
    double value;
    double eta;
};

class AsymmetryError : public Error {
public:
    AsymmetryError(std::size_t i, std::size_t j, double deviation);
    std::size_t row;
    std::size_t col;
    double deviation;
};

class RangeError : public Error {
public:
    RangeError(std::size_t i, std::size_t j, double value);
    std::size_t row;
    std::size_t col;
    double value;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line;
};

class ResolutionMismatch : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class TooLargeForExact : public Error {
public:
    explicit TooLargeForExact(std::size_t n);
};

// Numerical failures ------------------------------------------------------

class NoConvergence : public Error {
public:
    NoConvergence(long iterations, double residual);
    long iterations;
    double residual;
};

class HypothesisViolated : public Error {
public:
    using Error::Error;
};

class TailNotNegligible : public Error {
public:
    explicit TailNotNegligible(double ratio);
    double ratio;
};

class DegenerateEigenvalue : public Error {
public:
    explicit DegenerateEigenvalue(double gap);
    double gap;
};

class RegimeUnavailable : public Error {
public:
    using Error::Error;
};

class EmptyMask : public Error {
public:
    EmptyMask() : Error("mask must be a proper nonempty subset of blocks") {}
};

}  // namespace ldp
