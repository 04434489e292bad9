#pragma once

#include <stdexcept>
#include <string>

namespace hyperlab {

// Exit-code families surfaced by the CLI: 2 validation, 3 numerical, 4 budget.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidElementError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateSpectrumError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ContinuationError : public NumericalError {
public:
    ContinuationError(const std::string& what, double r) : NumericalError(what), r_(r) {}
    double r() const { return r_; }

private:
    double r_;
};

class FixedPointError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace hyperlab
