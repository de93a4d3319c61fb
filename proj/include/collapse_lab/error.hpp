#ifndef COLLAPSE_LAB_ERROR_HPP
#define COLLAPSE_LAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace collapse_lab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter point lies outside its family's domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Dataset-level contract violations: empty input, samples off the support,
/// generation ordering, degenerate data for which no MLE exists in the domain.
class InvalidDataset : public Error {
public:
    using Error::Error;
};

/// Inputs that are malformed independently of any family (bad n, bad tol).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace collapse_lab

#endif  // COLLAPSE_LAB_ERROR_HPP
