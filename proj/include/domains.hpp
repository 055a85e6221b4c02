#ifndef DWCONV_DOMAINS_HPP
#define DWCONV_DOMAINS_HPP

#include <complex>
#include <cmath>

#include "errors.hpp"

namespace dw {

using Complex = std::complex<double>;

/// Relative tolerance deciding whether a point sits on a domain boundary.
inline constexpr double kBoundaryTol = 1e-12;

/// A point of the Riemann sphere: a finite complex value or the point at infinity.
/// Infinity is a tagged state, never a huge float; NaN components are rejected.
class RSpherePoint {
public:
    RSpherePoint() = default;
    RSpherePoint(Complex v) : value_(v) {
        if (std::isnan(v.real()) || std::isnan(v.imag()))
            throw DomainViolationError("RSpherePoint: NaN component");
    }
    RSpherePoint(double v) : RSpherePoint(Complex(v, 0.0)) {}

    static RSpherePoint infinity() {
        RSpherePoint p;
        p.infinite_ = true;
        return p;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }

    Complex value() const {
        if (infinite_)
            throw DomainViolationError("RSpherePoint: value() on the point at infinity");
        return value_;
    }

    friend bool operator==(const RSpherePoint& a, const RSpherePoint& b) {
        if (a.infinite_ != b.infinite_) return false;
        return a.infinite_ || a.value_ == b.value_;
    }

private:
    Complex value_{0.0, 0.0};
    bool infinite_ = false;
};

/// Chordal (Riemann-sphere) distance; used where one side may be infinite.
double sphere_distance(const RSpherePoint& a, const RSpherePoint& b);

enum class DomainKind {
    disk,       // |z| < 1
    half_plane, // Im z > 0
    slit_plane  // C \ [0, +inf)
};

/// Membership predicates for the three domains the library works with,
/// with an explicit relative boundary tolerance.
struct DomainTag {
    DomainKind kind = DomainKind::disk;

    bool contains(const RSpherePoint& p, double tol = kBoundaryTol) const;
    bool on_boundary(const RSpherePoint& p, double tol = kBoundaryTol) const;
    bool contains_closure(const RSpherePoint& p, double tol = kBoundaryTol) const;
};

inline DomainTag disk_domain() { return DomainTag{DomainKind::disk}; }
inline DomainTag half_plane_domain() { return DomainTag{DomainKind::half_plane}; }
inline DomainTag slit_plane_domain() { return DomainTag{DomainKind::slit_plane}; }

/// z -> (z - i)/(z + i), the homeomorphism of closures H-bar -> D-bar sending
/// infinity to 1. Total on the closed half-plane.
RSpherePoint cayley(const RSpherePoint& z);

/// Inverse Cayley transform w -> i(1 + w)/(1 - w), sending 1 to infinity.
RSpherePoint cayley_inv(const RSpherePoint& w);

/// u(lambda) = -(-lambda)^(1 - theta/pi) with the principal branch,
/// arg(-lambda) in (-pi, 0). Maps H onto the wedge {theta < arg w < pi}.
/// theta = 0 is the identity. Rejects lambda with Im lambda <= 0.
Complex wedge_map(Complex lambda, double theta);

/// Inverse of wedge_map. Requires arg w in (theta, pi).
Complex wedge_map_inv(Complex w, double theta);

/// Derivatives of the wedge conjugation, used by Newton steps.
Complex wedge_map_derivative(Complex lambda, double theta);
Complex wedge_map_inv_derivative(Complex w, double theta);

/// Extension of wedge_map to the closed half-plane: negative reals map to the
/// ray arg = pi, positive reals to the lower wedge edge arg = theta, 0 -> 0.
RSpherePoint wedge_map_closure(const RSpherePoint& lambda, double theta);

/// Inverse on the closed wedge: edge rays map to the real axis, 0 -> 0,
/// infinity -> infinity.
RSpherePoint wedge_map_inv_closure(const RSpherePoint& w, double theta);

} // namespace dw

#endif
