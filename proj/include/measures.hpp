#ifndef DWCONV_MEASURES_HPP
#define DWCONV_MEASURES_HPP

#include <memory>
#include <optional>
#include <vector>

#include "domains.hpp"

namespace dw {

enum class SupportKind { real_line, circle, positive_line };

/// Mass consistency tolerance: declared total mass vs atoms + density integral.
inline constexpr double kMassTol = 1e-10;

struct Atom {
    RSpherePoint location; // circle: unimodular complex; real supports: real (infinity allowed on the real line)
    double mass = 0.0;
};

/// A finite positive Borel measure on R u {inf}, the unit circle, or [0,+inf),
/// represented as atoms plus an optional piecewise-linear density sampled on a
/// strictly increasing grid (angles in (-pi, pi] for the circle).
/// Immutable after validation; all transforms are pure.
class MeasureRep {
public:
    MeasureRep(SupportKind support, std::vector<Atom> atoms,
               std::vector<double> grid = {}, std::vector<double> values = {});

    /// Validates the declared mass against atoms + density within kMassTol.
    static MeasureRep with_declared_mass(SupportKind support, std::vector<Atom> atoms,
                                         std::vector<double> grid, std::vector<double> values,
                                         double total_mass);

    static MeasureRep point_mass(SupportKind support, RSpherePoint location, double mass = 1.0);
    static MeasureRep zero(SupportKind support);

    SupportKind support() const { return support_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    bool has_density() const { return !grid_.empty(); }
    double total_mass() const { return total_mass_; }
    double atom_mass() const;
    double density_mass() const { return density_mass_; }
    double infinity_mass() const;
    bool is_zero() const { return total_mass_ == 0.0; }
    bool is_probability(double tol = kMassTol) const;
    bool is_point_mass() const; // one finite atom, no density
    bool is_purely_atomic() const { return !has_density(); }

    /// Euclidean distance from a point to the support (finite part).
    double distance_to_support(Complex z) const;

    /// Rescales to total mass one. Only on explicit request, never silently.
    MeasureRep rescaled_to_probability() const;

    /// k-th moment of the finite part: int t^k dmu (t = e^{is} on the circle).
    Complex moment(int k) const;

    struct Tables; // precomputed evaluation tables (cell coefficients, moments)
    const Tables& tables() const { return *tables_; }

private:
    SupportKind support_;
    std::vector<Atom> atoms_;
    std::vector<double> grid_;
    std::vector<double> values_;
    double density_mass_ = 0.0;
    double total_mass_ = 0.0;
    std::shared_ptr<const Tables> tables_;
};

/// The fixed kernel family of the integral transforms.
enum class Kernel {
    nevanlinna,    // (1 + t z)/(t - z)
    cauchy,        // 1/(z - t)
    eta_psi,       // t z/(1 - t z)
    class_f,       // (1 + t^2)/(t (t - z))
    imag_identity, // (1 + t^2)/(t^2 + y^2),  y = Im(point)
};

/// Atom sum plus exact closed-form integration of the piecewise-linear density
/// against the kernel (adaptive Gauss-Legendre on angle cells for the circle).
/// Throws PointOnSupportError when the kernel singularity touches the support.
Complex integrate_kernel(const MeasureRep& m, Kernel k, Complex point);

/// Derivative of integrate_kernel with respect to the evaluation point.
Complex integrate_kernel_derivative(const MeasureRep& m, Kernel k, Complex point);

/// G(z) = int dmu(t)/(z - t) for probability measures; Im G < 0 on H.
Complex cauchy_transform(const MeasureRep& m, Complex z);
Complex cauchy_transform_derivative(const MeasureRep& m, Complex z);

/// psi(z) = int t z/(1 - t z) dmu(t) on the disk (circle measures) or the
/// slit plane (positive-line measures).
Complex psi_transform(const MeasureRep& m, Complex z);
Complex psi_transform_derivative(const MeasureRep& m, Complex z);

/// eta = psi/(1 + psi); throws DegenerateTransformError when 1 + psi vanishes.
Complex eta_transform(const MeasureRep& m, Complex z);

/// eta_mu(lambda)/lambda, with a moment-series fast path near lambda = 0 where
/// the direct quotient loses precision. Defined for circle and positive-line
/// measures; the value at 0 is the first moment.
Complex eta_over_lambda(const MeasureRep& m, Complex lambda);
Complex eta_over_lambda_derivative(const MeasureRep& m, Complex lambda);

/// Triple (alpha, beta, sigma) of the half-plane Nevanlinna representation
/// psi(z) = alpha z + beta + int (1+tz)/(t-z) dsigma(t); alpha = sigma({inf}).
struct NevanlinnaData {
    double alpha = 0.0;
    double beta = 0.0;
    MeasureRep sigma; // on the real line, no infinity atom

    NevanlinnaData(double a, double b, MeasureRep s);

    /// psi is the identity precisely when alpha = 1, beta = 0 and sigma(R) = 0.
    bool is_identity() const;

    Complex psi(Complex z) const;
    Complex psi_derivative(Complex z) const;
};

/// Representation data for the class-F functions on Omega = C \ [0,+inf):
/// f(lambda) = eta(lambda)/lambda = beta + int (1+t^2)/(t(t-lambda)) dsigma(t),
/// with sigma a finite positive measure on (0,+inf), int (1/t) dsigma < inf.
/// Alternatively backed by a probability measure mu on [0,+inf) through the
/// same identity f = eta_mu(lambda)/lambda, which evaluates the identical
/// function without an explicit (beta, sigma) pair.
class ClassFData {
public:
    /// Explicit (beta, sigma). sigma must be nonzero with grid start > 0 and
    /// finite int(1/t) dsigma unless allow_degenerate permits sigma = 0.
    ClassFData(double beta, MeasureRep sigma, bool allow_degenerate = false);

    /// Degenerate constant f == beta (point mass eta(lambda) = beta lambda).
    static ClassFData constant(double beta);

    /// Exact rational fit for a purely atomic probability measure on [0,+inf):
    /// poles of f become sigma atoms, beta = f(-inf).
    static ClassFData fit_atomic(const MeasureRep& mu);

    /// Evaluation backed directly by a probability measure on [0,+inf).
    static ClassFData from_measure(const MeasureRep& mu);

    Complex f(Complex lambda) const;
    Complex f_derivative(Complex lambda) const;
    Complex eta(Complex lambda) const { return lambda * f(lambda); }

    bool is_constant() const;
    double beta() const { return beta_; }
    const MeasureRep* sigma() const { return sigma_ ? &*sigma_ : nullptr; }
    const MeasureRep* backing_measure() const { return mu_ ? &*mu_ : nullptr; }

    /// gamma = lim_{x -> -inf} eta(x); infinite unless beta = 0 and the
    /// integral int (1+t^2)/t dsigma converges.
    RSpherePoint eta_limit_neg_infinity() const;

private:
    ClassFData() = default;
    double beta_ = 0.0;
    std::optional<MeasureRep> sigma_;
    std::optional<MeasureRep> mu_;
};

/// f_j(lambda) = beta_j + int (1+t^2)/(t(t-lambda)) dsigma_j(t).
Complex f_ratio(const ClassFData& d, Complex lambda);

} // namespace dw

#endif
