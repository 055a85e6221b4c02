#ifndef DWCONV_SELFMAPS_HPP
#define DWCONV_SELFMAPS_HPP

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "measures.hpp"

namespace dw {

/// An evaluable analytic map of a stated domain (disk, half-plane or slit
/// plane) into its closure. Closed-form bodies carry exact derivatives;
/// transform-backed bodies differentiate through their kernel integrals.
/// Immutable; evaluation is pure.
class SelfMap {
public:
    struct Constant {
        RSpherePoint value;
    };
    struct Affine {
        Complex a, b; // a z + b
    };
    struct Moebius {
        Complex a, b, c, d; // (a z + b)/(c z + d)
    };
    struct Polynomial {
        std::vector<Complex> coeffs; // c0 + c1 z + ...
    };
    struct Nevanlinna {
        std::shared_ptr<const NevanlinnaData> data; // half-plane self-map
    };
    struct EtaRatio {
        std::shared_ptr<const ClassFData> data; // f = eta/lambda on Omega
    };
    struct EtaRatioCircle {
        std::shared_ptr<const MeasureRep> mu; // phi = eta_mu/lambda on the disk
    };
    struct FShift {
        std::shared_ptr<const MeasureRep> mu; // psi = 1/G_mu - id on the half-plane
    };
    struct Composite {
        std::vector<SelfMap> chain; // applied left to right
    };
    struct ScaledRotation {
        Complex mu; // unimodular
        std::shared_ptr<const SelfMap> inner; // lambda -> inner(mu lambda)/mu
    };
    struct PosLineFamilyMap {
        std::shared_ptr<const ClassFData> f1, f2;
        Complex z; // lambda -> z f1(z f2(lambda))
    };
    struct WedgeConj {
        std::shared_ptr<const SelfMap> inner; // acts on the wedge G_theta
        double theta; // lambda -> u^{-1}(inner(u(lambda))) on H
    };
    struct ConstOverF {
        RSpherePoint gamma;
        std::shared_ptr<const ClassFData> f2; // lambda -> gamma/f2(lambda)
    };

    using Body = std::variant<Constant, Affine, Moebius, Polynomial, Nevanlinna, EtaRatio,
                              EtaRatioCircle, FShift, Composite, ScaledRotation,
                              PosLineFamilyMap, WedgeConj, ConstOverF>;

    SelfMap(DomainTag domain, Body body);

    static SelfMap constant(DomainTag domain, RSpherePoint value);
    static SelfMap affine(DomainTag domain, Complex a, Complex b);
    static SelfMap moebius(DomainTag domain, Complex a, Complex b, Complex c, Complex d);
    static SelfMap polynomial(DomainTag domain, std::vector<Complex> coeffs);
    static SelfMap nevanlinna(NevanlinnaData data);
    static SelfMap eta_ratio(ClassFData data);
    static SelfMap eta_ratio_circle(MeasureRep circle_mu);
    static SelfMap f_shift(MeasureRep line_mu);
    static SelfMap compose(std::vector<SelfMap> chain);
    static SelfMap scaled_rotation(Complex mu, SelfMap inner);

    const DomainTag& domain() const { return domain_; }
    const Body& body() const { return body_; }

    /// Evaluation on the closure. Boundary points of transform-backed bodies
    /// go through radial/vertical-ray limits with Richardson extrapolation.
    /// Numerical overflow maps to infinity for half-plane/slit-plane targets.
    RSpherePoint evaluate(const RSpherePoint& p) const;

    /// Fast path for interior points; throws on infinite results.
    Complex evaluate_interior(Complex z) const;

    /// Complex derivative at an interior point.
    Complex derivative(Complex z) const;

    /// Exact criterion for Nevanlinna bodies (alpha = 1, beta = 0, sigma = 0);
    /// structural fast paths for Moebius-like bodies; otherwise a 5-point
    /// numerical comparison.
    bool is_identity() const;

    /// Collapses Moebius-representable structure (affine, moebius, linear
    /// polynomial, sigma-free nevanlinna, compositions of such) into a
    /// coefficient matrix [a b; c d]; nullopt when not fractional-linear.
    std::optional<std::array<Complex, 4>> as_moebius() const;

    /// Detects structurally constant maps.
    std::optional<RSpherePoint> as_constant() const;

private:
    DomainTag domain_;
    Body body_;
};

/// Parametrized family of self-maps, one per section-3 construction.
class MapFamily {
public:
    enum class Kind { disk_multiplicative, circle_two_var, halfplane_additive_two_var, positive_line };

    static MapFamily disk_multiplicative(SelfMap phi);
    static MapFamily circle_two_var(SelfMap phi1, SelfMap phi2);
    static MapFamily halfplane_additive(SelfMap psi1, SelfMap psi2);
    static MapFamily positive_line(ClassFData f1, ClassFData f2);

    Kind kind() const { return kind_; }

    /// One-parameter kinds (disk-multiplicative, positive-line).
    SelfMap at(Complex z) const;
    /// Two-parameter kinds; diagonal calls use at(z, z).
    SelfMap at(Complex z1, Complex z2) const;

    const SelfMap& phi1() const { return *map1_; }
    const SelfMap& phi2() const { return *map2_; }
    const ClassFData& f1() const { return *f1_; }
    const ClassFData& f2() const { return *f2_; }

private:
    MapFamily() = default;
    Kind kind_ = Kind::disk_multiplicative;
    std::shared_ptr<const SelfMap> map1_, map2_;
    std::shared_ptr<const ClassFData> f1_, f2_;
};

struct FamilyBoundaryLimits {
    SelfMap phi_zero;  // constant 0
    SelfMap phi_inf;   // gamma/f2, or the constant-infinity map when gamma is infinite
    RSpherePoint gamma; // lim_{x -> -inf} eta_1(x)
};

/// Limit maps of a positive-line family as the parameter tends to 0 and to
/// infinity. gamma is taken from eta_1 (the outer factor of z f1(z f2(.))).
FamilyBoundaryLimits family_boundary_limits(const MapFamily& fam);

/// Validates lim_{y->inf} psi(iy)/(iy) -> 0 at y = 1e2, 1e4, 1e6 (ratio below
/// 1e-3 at the last sample and decreasing); throws GrowthConditionError.
void check_growth_condition(const SelfMap& psi);

/// psi(infinity) along the vertical ray, extrapolated; infinite marker when
/// the values grow without settling.
RSpherePoint psi_at_infinity(const SelfMap& psi);

} // namespace dw

#endif
