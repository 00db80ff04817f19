#ifndef PNAR_ERRORS_HPP
#define PNAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pnar {

/// Malformed input text (edge lists, CSV panels, flag values).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Objects that must agree on N, T or p do not.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine produced a non-finite or out-of-domain value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pnar

#endif  // PNAR_ERRORS_HPP
