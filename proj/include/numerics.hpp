#ifndef DWCONV_NUMERICS_HPP
#define DWCONV_NUMERICS_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace dw {

using Complex = std::complex<double>;

/// Neville polynomial extrapolation of f(h) to h = 0 through the given
/// samples. `defect` (optional) receives the spread between the last two
/// extrapolation columns, a practical error indicator.
double extrapolate_to_zero(std::span<const double> h, std::span<const double> f,
                           double* defect = nullptr);
Complex extrapolate_to_zero(std::span<const double> h, std::span<const Complex> f,
                            double* defect = nullptr);

/// Gauss-Legendre nodes and weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
    explicit GaussLegendre(int order);
};

const GaussLegendre& gauss_legendre_16();

/// Integrates a complex-valued integrand over [a, b] with fixed-order
/// Gauss-Legendre panels, bisecting recursively while the integrand's nearest
/// singularity (distance reported by `pole_distance`, may be infinite) is not
/// well separated from the panel. Used for circle-measure quadrature where
/// the kernel pole can sit close to the integration arc.
Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           const std::function<double(double, double)>& pole_distance,
                           int max_depth = 40);

} // namespace dw

#endif
