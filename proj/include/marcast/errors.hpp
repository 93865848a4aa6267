#pragma once

#include <stdexcept>
#include <string>

namespace marcast {

/// Malformed or inconsistent input data (files, coverage gaps, lengths).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to produce a usable result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace marcast
