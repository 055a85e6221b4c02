#ifndef DWCONV_ERRORS_HPP
#define DWCONV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dw {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// An evaluation point touches the support of a measure within tolerance.
class PointOnSupportError : public Error {
public:
    using Error::Error;
};

/// A transform requiring a probability measure received total mass != 1.
class NotProbabilityError : public Error {
public:
    using Error::Error;
};

/// 1 + psi vanished while forming the eta-transform.
class DegenerateTransformError : public Error {
public:
    using Error::Error;
};

/// A point lies outside the domain (or closure) required by an operation.
class DomainViolationError : public Error {
public:
    using Error::Error;
};

/// The Denjoy-Wolff solver was asked to handle the identity map.
class IdentityMapError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration did not settle within the iteration budget.
class NoConvergenceError : public Error {
public:
    long iterations = 0;
    NoConvergenceError(const std::string& msg, long it) : Error(msg), iterations(it) {}
};

/// Newton search over the interior start grid found no fixed point.
class NoFixedPointError : public Error {
public:
    using Error::Error;
};

/// Radial difference quotients persistently exceed one: not a Denjoy-Wolff point.
class DivergentQuotientError : public Error {
public:
    using Error::Error;
};

/// psi(iy)/iy does not decay; the half-plane subordination hypothesis fails.
class GrowthConditionError : public Error {
public:
    using Error::Error;
};

/// Circle measure has vanishing first moment; the phi = eta/lambda construction degenerates.
class ZeroMeanError : public Error {
public:
    using Error::Error;
};

/// A positive-line family map left its invariant wedge beyond tolerance.
class WedgeViolationError : public Error {
public:
    using Error::Error;
};

/// Richardson extrapolation failed to settle (atoms, support edges).
class ExtrapolationError : public Error {
public:
    using Error::Error;
};

/// Malformed measure-spec or CSV input.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace dw

#endif
