#pragma once

#include <stdexcept>
#include <string>

namespace etafit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something outside an operation's preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

// The statistical model itself is unusable (rank deficiency, degenerate data).
class ModelError : public Error {
public:
    using Error::Error;
};

// Factorization breakdown, non-finite intermediate values and the like.
class NumericError : public Error {
public:
    using Error::Error;
};

class SolverError : public NumericError {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : NumericError(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

class BracketError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double lo, double hi)
        : NumericError(what), lo_(lo), hi_(hi) {}
    double bracket_lo() const { return lo_; }
    double bracket_hi() const { return hi_; }

private:
    double lo_;
    double hi_;
};

} // namespace etafit

namespace etafit {

// Raised by cooperative deadline checks; deliberately outside the Error
// hierarchy so numeric fallbacks never swallow it.
class TimeoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace etafit
