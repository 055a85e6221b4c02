#ifndef DWCONV_DENJOY_WOLFF_HPP
#define DWCONV_DENJOY_WOLFF_HPP

#include <functional>
#include <optional>
#include <span>

#include "csvio.hpp"
#include "selfmaps.hpp"

namespace dw {

/// The five-way classification of an analytic self-map of the disk (the
/// half-plane is handled through Cayley conjugation).
enum class DWCase {
    identity,           // lambda_phi undefined; the solver refuses the identity instead
    boundary_constant,  // phi == gamma with unimodular gamma; lambda_phi = gamma
    interior_rotation,  // interior fixed point with |phi'| = 1
    interior_attracting, // interior fixed point with |phi'| < 1
    boundary_attracting, // no interior fixed point; attracting boundary point
};

const char* dw_case_name(DWCase c);

struct DWResult {
    RSpherePoint point;                  // in the map's own coordinates
    DWCase dw_case = DWCase::interior_attracting;
    std::optional<double> jc_derivative; // |phi'| at interior points, radial derivative at the boundary
    long iterations = 0;
    double residual = 0.0;               // |phi(point) - point| (interior); last step size at the boundary
};

struct DWOptions {
    double tol = 1e-12;
    long max_iter = 1000000;
    std::optional<Complex> warm_start; // disk coordinates
};

/// Denjoy-Wolff point by forward iteration from 0 (disk) / i (half-plane),
/// with structural fast paths (constants, alpha >= 1 Nevanlinna data,
/// fractional-linear bodies solved by the quadratic formula) and a Newton
/// polish. Throws IdentityMapError; throws NoConvergenceError for
/// rotation-like or parabolic dynamics that defeat plain iteration.
DWResult denjoy_wolff(const SelfMap& m, const DWOptions& opts = {});

/// Damped-Newton fixed-point search from a 5x5 interior start grid; resolves
/// the rotation case (|phi'| = 1 within 1e-8 at the root). Throws
/// NoFixedPointError when no fixed point is reachable (slow boundary dynamics).
DWResult rotation_resolve(const SelfMap& m, double tol = 1e-12);

/// Full chain: denjoy_wolff, then rotation_resolve on NoConvergence, then the
/// Cesaro-averaged fallback for slow parabolic boundary dynamics.
DWResult compute_denjoy_wolff(const SelfMap& m, const DWOptions& opts = {});

/// Julia-Caratheodory derivative at a boundary point as the Richardson limit
/// of (1 - |phi(r p)|)/(1 - r) over the radii schedule (1 - 10^-k by default).
/// Throws DivergentQuotientError when the quotients persistently exceed one.
double jc_derivative(const SelfMap& m, const RSpherePoint& boundary_point,
                     std::span<const double> radii = {});

struct Theorem1Row {
    long n = 0;
    RSpherePoint point;
    double distance = 0.0; // to the limit map's point (chordal when infinite)
    long iterations = 0;
};

/// Convergence table lambda_{phi_n} -> lambda_phi for a pointwise-convergent
/// family; solver errors for individual n propagate.
std::vector<Theorem1Row> theorem1_harness(const std::function<SelfMap(long)>& family,
                                          const SelfMap& limit, std::span<const long> ns,
                                          const DWOptions& opts = {});

CsvWriter theorem1_csv(const std::vector<Theorem1Row>& rows);

} // namespace dw

#endif
