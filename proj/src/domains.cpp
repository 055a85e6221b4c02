#include "domains.hpp"

#include <algorithm>

namespace dw {

double sphere_distance(const RSpherePoint& a, const RSpherePoint& b) {
    // chordal metric d(z,w) = 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)), d(z,inf) = 2/sqrt(1+|z|^2)
    if (a.is_infinite() && b.is_infinite()) return 0.0;
    if (a.is_infinite() || b.is_infinite()) {
        Complex z = a.is_infinite() ? b.value() : a.value();
        return 2.0 / std::sqrt(1.0 + std::norm(z));
    }
    Complex z = a.value(), w = b.value();
    return 2.0 * std::abs(z - w) / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
}

bool DomainTag::contains(const RSpherePoint& p, double tol) const {
    if (p.is_infinite()) return false;
    Complex z = p.value();
    double scale = std::max(1.0, std::abs(z));
    switch (kind) {
        case DomainKind::disk:
            return std::abs(z) < 1.0 - tol;
        case DomainKind::half_plane:
            return z.imag() > tol * scale;
        case DomainKind::slit_plane:
            // outside [0, +inf): either clearly off the real axis, or on the negative side
            if (std::abs(z.imag()) > tol * scale) return true;
            return z.real() < -tol;
    }
    return false;
}

bool DomainTag::on_boundary(const RSpherePoint& p, double tol) const {
    if (p.is_infinite())
        return kind != DomainKind::disk; // infinity bounds H and Omega
    Complex z = p.value();
    double scale = std::max(1.0, std::abs(z));
    switch (kind) {
        case DomainKind::disk:
            return std::abs(std::abs(z) - 1.0) <= tol;
        case DomainKind::half_plane:
            return std::abs(z.imag()) <= tol * scale;
        case DomainKind::slit_plane:
            return std::abs(z.imag()) <= tol * scale && z.real() >= -tol;
    }
    return false;
}

bool DomainTag::contains_closure(const RSpherePoint& p, double tol) const {
    return contains(p, tol) || on_boundary(p, tol);
}

RSpherePoint cayley(const RSpherePoint& z) {
    if (z.is_infinite()) return RSpherePoint(Complex(1.0, 0.0));
    Complex v = z.value();
    if (std::abs(v) > 1e150) {
        // avoid overflow in the quotient; (z-i)/(z+i) = 1 - 2i/(z+i)
        return RSpherePoint(1.0 - Complex(0.0, 2.0) / (v + Complex(0.0, 1.0)));
    }
    return RSpherePoint((v - Complex(0.0, 1.0)) / (v + Complex(0.0, 1.0)));
}

RSpherePoint cayley_inv(const RSpherePoint& w) {
    if (w.is_infinite())
        throw DomainViolationError("cayley_inv: input must lie in the closed disk");
    Complex v = w.value();
    Complex den = 1.0 - v;
    if (den == Complex(0.0, 0.0)) return RSpherePoint::infinity();
    return RSpherePoint(Complex(0.0, 1.0) * (1.0 + v) / den);
}

Complex wedge_map(Complex lambda, double theta) {
    if (theta < 0.0 || theta >= M_PI)
        throw DomainViolationError("wedge_map: theta must lie in [0, pi)");
    if (lambda.imag() <= 0.0)
        throw DomainViolationError("wedge_map: lambda must lie in the open upper half-plane");
    double p = 1.0 - theta / M_PI;
    if (p == 1.0) return lambda;
    return -std::exp(p * std::log(-lambda));
}

Complex wedge_map_inv(Complex w, double theta) {
    if (theta < 0.0 || theta >= M_PI)
        throw DomainViolationError("wedge_map_inv: theta must lie in [0, pi)");
    double a = std::arg(w);
    if (!(a > theta && a < M_PI))
        throw DomainViolationError("wedge_map_inv: point outside the open wedge");
    double p = 1.0 - theta / M_PI;
    if (p == 1.0) return w;
    return -std::exp(std::log(-w) / p);
}

Complex wedge_map_derivative(Complex lambda, double theta) {
    double p = 1.0 - theta / M_PI;
    if (p == 1.0) return Complex(1.0, 0.0);
    return p * std::exp((p - 1.0) * std::log(-lambda));
}

Complex wedge_map_inv_derivative(Complex w, double theta) {
    double p = 1.0 - theta / M_PI;
    if (p == 1.0) return Complex(1.0, 0.0);
    return (1.0 / p) * std::exp((1.0 / p - 1.0) * std::log(-w));
}

RSpherePoint wedge_map_closure(const RSpherePoint& lambda, double theta) {
    if (lambda.is_infinite()) return RSpherePoint::infinity();
    Complex v = lambda.value();
    double p = 1.0 - theta / M_PI;
    if (v.imag() > 0.0) return RSpherePoint(wedge_map(v, theta));
    double x = v.real();
    if (x == 0.0) return RSpherePoint(Complex(0.0, 0.0));
    if (x < 0.0) return RSpherePoint(Complex(-std::pow(-x, p), 0.0));
    // positive reals approach from above: arg(-lambda) -> -pi
    return RSpherePoint(std::pow(x, p) * std::exp(Complex(0.0, theta)));
}

RSpherePoint wedge_map_inv_closure(const RSpherePoint& w, double theta) {
    if (w.is_infinite()) return RSpherePoint::infinity();
    Complex v = w.value();
    double p = 1.0 - theta / M_PI;
    if (p == 1.0) return w;
    if (v == Complex(0.0, 0.0)) return RSpherePoint(Complex(0.0, 0.0));
    double a = std::arg(v);
    if (a > theta && a < M_PI) return RSpherePoint(wedge_map_inv(v, theta));
    if (std::abs(a - M_PI) <= 1e-12) // upper edge: negative reals
        return RSpherePoint(Complex(-std::pow(std::abs(v), 1.0 / p), 0.0));
    if (std::abs(a - theta) <= 1e-12) // lower edge: positive reals
        return RSpherePoint(Complex(std::pow(std::abs(v), 1.0 / p), 0.0));
    throw DomainViolationError("wedge_map_inv_closure: point outside the closed wedge");
}

} // namespace dw
