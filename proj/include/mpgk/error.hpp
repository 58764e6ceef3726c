#pragma once

#include <stdexcept>
#include <string>

namespace mpgk {

// Base of every error raised by the library. The CLI maps the subclasses
// onto exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vertex or graph index outside its valid range.
class IndexError : public Error {
public:
    using Error::Error;
};

// Invalid numeric parameter (h < 3, m > nN, dims > size, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Requested kernel needs data the dataset does not carry.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition (asymmetric matrix, foreign tree, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed dataset file content.
class FormatError : public Error {
public:
    using Error::Error;
};

// Numerically degenerate input: zero Gram diagonal, all-zero Nyström block,
// single-class training set.
class DegenerateError : public Error {
public:
    using Error::Error;
};

}  // namespace mpgk
