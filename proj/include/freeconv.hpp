#ifndef DWCONV_FREECONV_HPP
#define DWCONV_FREECONV_HPP

#include <functional>
#include <span>

#include "subordination.hpp"

namespace dw {

struct SpectralAtom {
    double location = 0.0; // angle in (-pi, pi] for circle outputs
    double mass = 0.0;
};

/// Density plus atoms recovered by Stieltjes inversion, with per-point
/// extrapolation defects. Negative density values are clamped to zero and the
/// clamp magnitude is folded into the defect column.
struct SpectralOutput {
    std::vector<double> x_grid;
    std::vector<double> density;
    std::vector<double> defect;
    std::vector<SpectralAtom> atoms;
    std::vector<double> eps_schedule;
    double mass_defect = 0.0; // |quadrature + atoms - 1|

    double total_mass() const;
};

std::span<const double> default_eps_schedule();

/// -(1/pi) Im G(x + i eps) Richardson-extrapolated over the last three
/// epsilons of the schedule. Throws ExtrapolationError when the extrapolant
/// disagrees wildly with the raw samples (atoms, support edges).
double stieltjes_invert(const std::function<Complex(Complex)>& G, double x,
                        std::span<const double> eps_schedule = {}, double* defect = nullptr);

/// Atom masses lim eps * (-Im G(a + i eps)); masses below 1e-6 are discarded.
std::vector<SpectralAtom> detect_atoms(const std::function<Complex(Complex)>& G,
                                       std::span<const double> candidates,
                                       std::span<const double> eps_schedule = {});

/// Free additive convolution via half-plane subordination:
/// F(z) = omega1 + omega2 - z, density by Stieltjes inversion of 1/F.
/// Point-mass inputs short-circuit to the exact translation.
SpectralOutput free_additive_convolve(const MeasureRep& mu1, const MeasureRep& mu2,
                                      std::span<const double> x_grid,
                                      std::span<const double> eps_schedule = {});

struct CircleConvolveOutput {
    std::vector<Complex> z_grid;
    std::vector<Complex> eta; // eta_{mu1 boxtimes mu2} on z_grid
    SpectralOutput angular;   // density over angles with respect to d theta
};

/// Free multiplicative convolution on the circle via eta-transform
/// subordination; rejects zero-mean inputs (ZeroMeanError) except for the
/// Haar measure, which is absorbing. Angular density is recovered from the
/// psi series along radial limits.
CircleConvolveOutput free_mult_convolve_circle(const MeasureRep& mu1, const MeasureRep& mu2,
                                               std::span<const Complex> z_grid,
                                               std::span<const double> angle_grid,
                                               std::span<const double> eps_schedule = {});

/// Free multiplicative convolution on [0, +inf) via the wedge-conjugated
/// positive-line subordination; eta_box(lambda) = omega(lambda) omega2(lambda)/lambda,
/// G(u) = 1/(u (1 - eta_box(1/u))). Point masses short-circuit to dilation.
SpectralOutput free_mult_convolve_positive(const MeasureRep& mu1, const MeasureRep& mu2,
                                           std::span<const double> x_grid,
                                           std::span<const double> eps_schedule = {});

/// Suggested plotting window for the additive convolution: mean +- 4 std.
std::pair<double, double> suggest_additive_support(const MeasureRep& mu1, const MeasureRep& mu2);

CsvWriter spectral_csv(const SpectralOutput& s);
std::string spectral_sidecar_json(const SpectralOutput& s);

} // namespace dw

#endif
