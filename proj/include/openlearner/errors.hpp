#pragma once

#include <stdexcept>
#include <string>

namespace openlearner {

/// Raised for malformed or inconsistent input data (files, configs, digests).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for numerical failures and protocol violations inside the models.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a value fails a type or range check (hyperparameters, specs).
class ValueError : public std::invalid_argument {
public:
    explicit ValueError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace openlearner
