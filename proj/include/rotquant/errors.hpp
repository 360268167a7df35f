#pragma once

#include <stdexcept>
#include <string>

namespace rotquant {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Vector length is zero, mismatched, or not valid for the transform.
class InvalidDimension : public Error {
public:
    using Error::Error;
};

/// NaN/Inf input or an otherwise undefined value was supplied.
class InvalidValue : public Error {
public:
    using Error::Error;
};

/// An iterative procedure (Lloyd iteration, continued fraction,
/// adaptive quadrature) failed to reach its tolerance.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A serialized payload is truncated, has a bad magic/version, or is
/// internally inconsistent.
class MalformedPayload : public Error {
public:
    using Error::Error;
};

/// The unbiased scale is undefined (nonpositive codeword correlation).
class DegenerateScale : public Error {
public:
    using Error::Error;
};

/// A sweep/recall/CLI configuration is unusable.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Operation is not defined for the requested method.
class Unsupported : public Error {
public:
    using Error::Error;
};

} // namespace rotquant
