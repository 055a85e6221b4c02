#include "numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace dw {

namespace {

template <typename T>
T neville_at_zero(std::span<const double> h, std::span<const T> f, double* defect) {
    std::size_t n = h.size();
    if (n == 0 || f.size() != n)
        throw std::invalid_argument("extrapolate_to_zero: mismatched samples");
    std::vector<T> p(f.begin(), f.end());
    T penultimate = p[0];
    for (std::size_t level = 1; level < n; ++level) {
        for (std::size_t i = 0; i + level < n; ++i) {
            // value at 0 of the interpolant through (h_i .. h_{i+level})
            p[i] = p[i + 1] + (p[i] - p[i + 1]) * (0.0 - h[i + level]) / (h[i] - h[i + level]);
        }
        if (level + 1 == n) penultimate = p[1];
    }
    if (defect)
        *defect = (n >= 2) ? std::abs(p[0] - penultimate) : 0.0;
    return p[0];
}

} // namespace

double extrapolate_to_zero(std::span<const double> h, std::span<const double> f, double* defect) {
    return neville_at_zero<double>(h, f, defect);
}

Complex extrapolate_to_zero(std::span<const double> h, std::span<const Complex> f, double* defect) {
    return neville_at_zero<Complex>(h, f, defect);
}

GaussLegendre::GaussLegendre(int order) {
    nodes.resize(order);
    weights.resize(order);
    int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[order - 1 - i] = weights[i];
    }
}

const GaussLegendre& gauss_legendre_16() {
    static const GaussLegendre gl(16);
    return gl;
}

namespace {

Complex gl_panel(const std::function<Complex(double)>& f, double a, double b) {
    const GaussLegendre& gl = gauss_legendre_16();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Complex sum = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k)
        sum += gl.weights[k] * f(mid + half * gl.nodes[k]);
    return half * sum;
}

Complex integrate_rec(const std::function<Complex(double)>& f, double a, double b,
                      const std::function<double(double, double)>& pole_distance, int depth) {
    double width = b - a;
    double d = pole_distance(a, b);
    if (depth <= 0 || width <= 1e-14 || d >= 1.5 * width)
        return gl_panel(f, a, b);
    double mid = 0.5 * (a + b);
    return integrate_rec(f, a, mid, pole_distance, depth - 1) +
           integrate_rec(f, mid, b, pole_distance, depth - 1);
}

} // namespace

Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           const std::function<double(double, double)>& pole_distance,
                           int max_depth) {
    if (!(b > a)) return Complex(0.0, 0.0);
    return integrate_rec(f, a, b, pole_distance, max_depth);
}

} // namespace dw
