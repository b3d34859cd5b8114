#pragma once

#include <stdexcept>
#include <string>

namespace medtest {

// Base for every error the library raises. The CLI maps each subclass to an
// exit code through exit_code().
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 1; }
};

// Bad arguments or configuration (exit 1).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Data errors: missing columns, unparsable cells, missing values (exit 2).
class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

// Estimation cannot proceed on this sample (exit 3).
class InfeasibleError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

// A cross-fitting training subset is too small or has a constant target.
class FoldDegeneracyError : public InfeasibleError {
public:
    FoldDegeneracyError(int fold, int cell, const std::string& what)
        : InfeasibleError("fold " + std::to_string(fold) + ", cell " + std::to_string(cell) +
                          ": " + what),
          fold_(fold),
          cell_(cell) {}
    int fold() const { return fold_; }
    int cell() const { return cell_; }

private:
    int fold_;
    int cell_;
};

class PartitionError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

// Exact-oracle deviation fell between the "holds" and "fails" thresholds.
class OracleGapError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

}  // namespace medtest
