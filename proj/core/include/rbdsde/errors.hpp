#pragma once

#include <stdexcept>
#include <string>

namespace rbdsde {

/// Bad input: malformed configuration, violated preconditions, mismatched shapes.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation that was set up correctly but could not be carried out
/// (ill-conditioned regression, failed root bracket, non-finite values).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rbdsde
