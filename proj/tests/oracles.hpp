// Test-only oracles, independent of the library's evaluation paths.
#ifndef DWCONV_TEST_ORACLES_HPP
#define DWCONV_TEST_ORACLES_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "measures.hpp"

namespace oracles {

using dw::Complex;

// Adaptive Simpson quadrature on a real interval, complex integrand.
inline Complex simpson_rec(const std::function<Complex(double)>& f, double a, double b, Complex fa,
                           Complex fm, Complex fb, Complex whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    Complex flm = f(lm), frm = f(rm);
    Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline Complex adaptive_quadrature(const std::function<Complex(double)>& f, double a, double b,
                                   double tol = 1e-13) {
    Complex fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    Complex whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Closed-form semicircle Cauchy transform, G(z) = (z - sqrt(z^2 - 4 v))/ (2 v)
// for variance v, branch with G ~ 1/z at infinity.
inline Complex semicircle_cauchy(Complex z, double variance = 1.0) {
    Complex s = std::sqrt(z * z - 4.0 * variance);
    if ((z.imag() > 0 && s.imag() < 0) || (z.imag() < 0 && s.imag() > 0)) s = -s;
    return (z - s) / (2.0 * variance);
}

// Quadratic-formula fixed points of a Moebius map (a z + b)/(c z + d).
inline std::vector<Complex> moebius_fixed_points(Complex a, Complex b, Complex c, Complex d) {
    std::vector<Complex> out;
    if (std::abs(c) < 1e-300) {
        if (a != d) out.push_back(b / (d - a));
        return out;
    }
    Complex B = d - a;
    Complex s = std::sqrt(B * B + 4.0 * c * b);
    out.push_back((-B + s) / (2.0 * c));
    out.push_back((-B - s) / (2.0 * c));
    return out;
}

// MP(1) boxtimes MP(1) density via the S-transform: S = 1/(1+z)^2, so
// psi(1/u) solves psi^3 + 3 psi^2 + (3-u) psi + 1 = 0 and G(u) = (1+psi)/u.
// Root selected by the sign conditions of a Cauchy transform boundary value.
inline double mp_squared_density(double x) {
    // solve the cubic by Cardano with complex arithmetic, then pick the root
    // giving -Im G/pi > 0
    Complex a(3.0, 0.0), b(3.0 - x, 0.0), c(1.0, 0.0);
    Complex p = b - a * a / 3.0;
    Complex q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    Complex disc = q * q / 4.0 + p * p * p / 27.0;
    Complex sq = std::sqrt(disc);
    auto cbrt = [](Complex w) {
        double r = std::abs(w);
        double th = std::arg(w);
        return std::polar(std::cbrt(r), th / 3.0);
    };
    Complex u1 = cbrt(-q / 2.0 + sq);
    if (std::abs(u1) < 1e-30) u1 = cbrt(-q / 2.0 - sq);
    const Complex omega(-0.5, std::sqrt(3.0) / 2.0);
    double best = 0.0;
    for (int k = 0; k < 3; ++k) {
        Complex u = u1 * std::pow(omega, k);
        Complex root = u - p / (3.0 * u) - a / 3.0;
        Complex G = (1.0 + root) / x;
        double dens = -G.imag() / M_PI;
        if (std::abs(root.imag()) > 1e-12 && dens > best) best = dens;
    }
    return best;
}

// Deterministic uniform complex samples in a disk/half-plane.
struct Rng {
    unsigned long long s = 88172645463325252ull;
    double next() { // xorshift64, mapped to [0,1)
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return double(s >> 11) * 0x1.0p-53;
    }
    Complex in_disk(double rmax = 0.98) {
        while (true) {
            double x = 2.0 * next() - 1.0, y = 2.0 * next() - 1.0;
            if (x * x + y * y < rmax * rmax) return {x, y};
        }
    }
    Complex in_half_plane(double scale = 3.0) {
        return {scale * (2.0 * next() - 1.0), scale * next() + 1e-3};
    }
};

// Piecewise-linear semicircle sample on a cosine-clustered grid.
inline dw::MeasureRep semicircle_measure(int points = 2001, double variance = 1.0) {
    double r = 2.0 * std::sqrt(variance);
    std::vector<double> grid, vals;
    for (int k = 0; k < points; ++k) {
        double s = double(k) / (points - 1);
        double x = -r * std::cos(M_PI * s);
        grid.push_back(x);
        double v = r * r - x * x;
        vals.push_back(v > 0 ? std::sqrt(v) / (2.0 * M_PI * variance) : 0.0);
    }
    grid.front() = -r;
    grid.back() = r;
    dw::MeasureRep raw(dw::SupportKind::real_line, {}, std::move(grid), std::move(vals));
    return raw.rescaled_to_probability();
}

// Marchenko-Pastur(1) on a sin^2-clustered grid with an edge-completion atom
// carrying the [0, t0) tail of the x^{-1/2} blowup.
inline dw::MeasureRep mp1_measure(int points = 4001) {
    std::vector<double> grid, vals;
    for (int k = 1; k < points; ++k) {
        double s = double(k) / (points - 1);
        double t = 4.0 * std::pow(std::sin(M_PI * s / 2.0), 2);
        grid.push_back(t);
        vals.push_back(t < 4.0 ? std::sqrt((4.0 - t) / t) / (2.0 * M_PI) : 0.0);
    }
    grid.back() = 4.0;
    double t0 = grid.front();
    // density mass of the sampled part
    double dens = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        dens += 0.5 * (vals[i] + vals[i + 1]) * (grid[i + 1] - grid[i]);
    double tail = 1.0 - dens; // assign to a tiny atom at the centroid of [0, t0]
    std::vector<dw::Atom> atoms;
    if (tail > 0)
        atoms.push_back(dw::Atom{dw::RSpherePoint(t0 / 3.0), tail});
    return dw::MeasureRep(dw::SupportKind::positive_line, std::move(atoms), std::move(grid),
                          std::move(vals));
}

// Symmetric Bernoulli (delta_{-1} + delta_{+1})/2.
inline dw::MeasureRep bernoulli_measure() {
    return dw::MeasureRep(dw::SupportKind::real_line,
                          {dw::Atom{dw::RSpherePoint(-1.0), 0.5}, dw::Atom{dw::RSpherePoint(1.0), 0.5}});
}

// Haar measure on the circle (uniform angular density).
inline dw::MeasureRep haar_measure() {
    return dw::MeasureRep(dw::SupportKind::circle, {}, {-M_PI, M_PI},
                          {1.0 / (2.0 * M_PI), 1.0 / (2.0 * M_PI)});
}

} // namespace oracles

#endif
