#include "selfmaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "numerics.hpp"

namespace dw {

namespace {

constexpr double kCtorTol = 1e-9;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Complex mat_det(const std::array<Complex, 4>& m) { return m[0] * m[3] - m[1] * m[2]; }

std::array<Complex, 4> mat_mul(const std::array<Complex, 4>& x, const std::array<Complex, 4>& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

std::array<Complex, 4> mat_normalized(std::array<Complex, 4> m) {
    double s = std::max({std::abs(m[0]), std::abs(m[1]), std::abs(m[2]), std::abs(m[3])});
    if (s > 0.0)
        for (Complex& c : m) c /= s;
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

SelfMap::SelfMap(DomainTag domain, Body body) : domain_(domain), body_(std::move(body)) {}

SelfMap SelfMap::constant(DomainTag domain, RSpherePoint value) {
    if (value.is_infinite() && domain.kind == DomainKind::disk)
        throw DomainViolationError("SelfMap: constant-infinity map has no disk target");
    if (value.is_finite() && !domain.contains_closure(value, 1e-9))
        throw DomainViolationError("SelfMap: constant value outside the closed target");
    return SelfMap(domain, Constant{value});
}

SelfMap SelfMap::affine(DomainTag domain, Complex a, Complex b) {
    switch (domain.kind) {
        case DomainKind::disk:
            if (std::abs(a) + std::abs(b) > 1.0 + kCtorTol)
                throw DomainViolationError("SelfMap: affine map exits the closed disk");
            break;
        case DomainKind::half_plane:
            if (std::abs(a.imag()) > kCtorTol || a.real() < -kCtorTol || b.imag() < -kCtorTol)
                throw DomainViolationError("SelfMap: affine map exits the closed half-plane");
            break;
        case DomainKind::slit_plane:
            break;
    }
    return SelfMap(domain, Affine{a, b});
}

SelfMap SelfMap::moebius(DomainTag domain, Complex a, Complex b, Complex c, Complex d) {
    if (a == Complex(0.0) && b == Complex(0.0) && c == Complex(0.0) && d == Complex(0.0))
        throw DomainViolationError("SelfMap: zero Moebius coefficients");
    return SelfMap(domain, Moebius{a, b, c, d});
}

SelfMap SelfMap::polynomial(DomainTag domain, std::vector<Complex> coeffs) {
    while (coeffs.size() > 1 && coeffs.back() == Complex(0.0)) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(Complex(0.0));
    // no sup check on the disk: maps like lambda^2 + c are legitimate inputs
    // whose forward orbits stay inside even though the sup on T exceeds one
    if (domain.kind == DomainKind::half_plane && coeffs.size() > 2)
        throw DomainViolationError("SelfMap: half-plane polynomial bodies must be degree <= 1");
    return SelfMap(domain, Polynomial{std::move(coeffs)});
}

SelfMap SelfMap::nevanlinna(NevanlinnaData data) {
    return SelfMap(half_plane_domain(),
                   Nevanlinna{std::make_shared<const NevanlinnaData>(std::move(data))});
}

SelfMap SelfMap::eta_ratio(ClassFData data) {
    return SelfMap(slit_plane_domain(), EtaRatio{std::make_shared<const ClassFData>(std::move(data))});
}

SelfMap SelfMap::eta_ratio_circle(MeasureRep circle_mu) {
    if (circle_mu.support() != SupportKind::circle || !circle_mu.is_probability())
        throw DomainViolationError("SelfMap: eta-ratio-circle needs a circle probability measure");
    return SelfMap(disk_domain(), EtaRatioCircle{std::make_shared<const MeasureRep>(std::move(circle_mu))});
}

SelfMap SelfMap::f_shift(MeasureRep line_mu) {
    if (line_mu.support() == SupportKind::circle || !line_mu.is_probability())
        throw DomainViolationError("SelfMap: f-shift needs a probability measure on the line");
    return SelfMap(half_plane_domain(), FShift{std::make_shared<const MeasureRep>(std::move(line_mu))});
}

SelfMap SelfMap::compose(std::vector<SelfMap> chain) {
    if (chain.empty()) throw DomainViolationError("SelfMap: empty composition");
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        if (chain[i].domain().kind != chain[i + 1].domain().kind)
            throw DomainViolationError("SelfMap: composition links different domains");
    DomainTag dom = chain.front().domain();
    return SelfMap(dom, Composite{std::move(chain)});
}

SelfMap SelfMap::scaled_rotation(Complex mu, SelfMap inner) {
    if (std::abs(std::abs(mu) - 1.0) > kCtorTol)
        throw DomainViolationError("SelfMap: scaled rotation needs a unimodular factor");
    if (inner.domain().kind != DomainKind::disk)
        throw DomainViolationError("SelfMap: scaled rotation is a disk construction");
    DomainTag dom = inner.domain();
    return SelfMap(dom, ScaledRotation{mu, std::make_shared<const SelfMap>(std::move(inner))});
}

// ---------------------------------------------------------------------------
// Interior evaluation and derivative
// ---------------------------------------------------------------------------

Complex SelfMap::evaluate_interior(Complex z) const {
    return std::visit(
        [&](const auto& b) -> Complex {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Constant>) {
                if (b.value.is_infinite())
                    throw DomainViolationError("evaluate_interior: constant-infinity map");
                return b.value.value();
            } else if constexpr (std::is_same_v<T, Affine>) {
                return b.a * z + b.b;
            } else if constexpr (std::is_same_v<T, Moebius>) {
                Complex den = b.c * z + b.d;
                if (den == Complex(0.0))
                    throw DomainViolationError("evaluate_interior: Moebius pole");
                return (b.a * z + b.b) / den;
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                Complex v = 0.0;
                for (auto it = b.coeffs.rbegin(); it != b.coeffs.rend(); ++it) v = v * z + *it;
                return v;
            } else if constexpr (std::is_same_v<T, Nevanlinna>) {
                return b.data->psi(z);
            } else if constexpr (std::is_same_v<T, EtaRatio>) {
                return b.data->f(z);
            } else if constexpr (std::is_same_v<T, EtaRatioCircle>) {
                return eta_over_lambda(*b.mu, z);
            } else if constexpr (std::is_same_v<T, FShift>) {
                Complex g = cauchy_transform(*b.mu, z);
                return 1.0 / g - z;
            } else if constexpr (std::is_same_v<T, Composite>) {
                Complex v = z;
                for (const SelfMap& link : b.chain) v = link.evaluate_interior(v);
                return v;
            } else if constexpr (std::is_same_v<T, ScaledRotation>) {
                return b.inner->evaluate_interior(b.mu * z) / b.mu;
            } else if constexpr (std::is_same_v<T, PosLineFamilyMap>) {
                Complex inner = b.z * b.f2->f(z);
                return b.z * b.f1->f(inner);
            } else if constexpr (std::is_same_v<T, WedgeConj>) {
                Complex u = wedge_map(z, b.theta);
                Complex w = b.inner->evaluate_interior(u);
                if (b.theta == 0.0) return w;
                double a = std::arg(w);
                if (a <= b.theta) {
                    if (a > b.theta - 1e-8)
                        throw WedgeViolationError("wedge conjugation: image grazes the wedge edge");
                    throw WedgeViolationError("wedge conjugation: image left the invariant wedge");
                }
                if (a >= M_PI) // negative real axis, closure point of H
                    return -std::pow(std::abs(w), 1.0 / (1.0 - b.theta / M_PI));
                return wedge_map_inv(w, b.theta);
            } else if constexpr (std::is_same_v<T, ConstOverF>) {
                if (b.gamma.is_infinite())
                    throw DomainViolationError("evaluate_interior: constant-infinity map");
                return b.gamma.value() / b.f2->f(z);
            }
        },
        body_);
}

Complex SelfMap::derivative(Complex z) const {
    return std::visit(
        [&](const auto& b) -> Complex {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return Complex(0.0);
            } else if constexpr (std::is_same_v<T, Affine>) {
                return b.a;
            } else if constexpr (std::is_same_v<T, Moebius>) {
                Complex den = b.c * z + b.d;
                return mat_det({b.a, b.b, b.c, b.d}) / (den * den);
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                Complex v = 0.0;
                for (std::size_t k = b.coeffs.size(); k-- > 1;)
                    v = v * z + double(k) * b.coeffs[k];
                return v;
            } else if constexpr (std::is_same_v<T, Nevanlinna>) {
                return b.data->psi_derivative(z);
            } else if constexpr (std::is_same_v<T, EtaRatio>) {
                return b.data->f_derivative(z);
            } else if constexpr (std::is_same_v<T, EtaRatioCircle>) {
                return eta_over_lambda_derivative(*b.mu, z);
            } else if constexpr (std::is_same_v<T, FShift>) {
                Complex g = cauchy_transform(*b.mu, z);
                Complex gp = cauchy_transform_derivative(*b.mu, z);
                return -gp / (g * g) - 1.0;
            } else if constexpr (std::is_same_v<T, Composite>) {
                Complex v = z, d = 1.0;
                for (const SelfMap& link : b.chain) {
                    d *= link.derivative(v);
                    v = link.evaluate_interior(v);
                }
                return d;
            } else if constexpr (std::is_same_v<T, ScaledRotation>) {
                return b.inner->derivative(b.mu * z);
            } else if constexpr (std::is_same_v<T, PosLineFamilyMap>) {
                Complex inner = b.z * b.f2->f(z);
                return b.z * b.f1->f_derivative(inner) * b.z * b.f2->f_derivative(z);
            } else if constexpr (std::is_same_v<T, WedgeConj>) {
                Complex u = wedge_map(z, b.theta);
                Complex w = b.inner->evaluate_interior(u);
                Complex dw = b.inner->derivative(u);
                return wedge_map_inv_derivative(w, b.theta) * dw * wedge_map_derivative(z, b.theta);
            } else if constexpr (std::is_same_v<T, ConstOverF>) {
                Complex f = b.f2->f(z);
                return -b.gamma.value() * b.f2->f_derivative(z) / (f * f);
            }
        },
        body_);
}

// ---------------------------------------------------------------------------
// Closure evaluation
// ---------------------------------------------------------------------------

namespace {

// radial / vertical-ray limit with the fixed epsilon schedule and Richardson
// extrapolation; declared when successive extrapolants agree to 1e-8
RSpherePoint ray_limit(const std::function<Complex(Complex)>& eval, Complex boundary_point,
                       Complex inward) {
    static const double eps[] = {1e-3, 1e-5, 1e-7};
    double scale = std::max(1.0, std::abs(boundary_point));
    std::vector<double> hs;
    std::vector<Complex> vs;
    for (double e : eps) {
        hs.push_back(e);
        vs.push_back(eval(boundary_point + (e * scale) * inward));
    }
    double defect = 0.0;
    Complex lim = extrapolate_to_zero(hs, vs, &defect);
    if (defect > 1e-8 * std::max(1.0, std::abs(lim)))
        throw ExtrapolationError("boundary evaluation: ray limit did not settle");
    return RSpherePoint(lim);
}

Complex inward_direction(const DomainTag& dom, Complex p) {
    switch (dom.kind) {
        case DomainKind::disk:
            return -p / std::abs(p); // radial, toward 0
        case DomainKind::half_plane:
        case DomainKind::slit_plane:
            return Complex(0.0, 1.0); // vertical ray (prime end r_+ on the slit plane)
    }
    return Complex(0.0, 1.0);
}

} // namespace

RSpherePoint SelfMap::evaluate(const RSpherePoint& p) const {
    if (p.is_finite() && !domain_.contains_closure(p, 1e-9))
        throw DomainViolationError("evaluate: point outside the closed domain");
    if (p.is_infinite() && domain_.kind == DomainKind::disk)
        throw DomainViolationError("evaluate: infinity is not a disk closure point");

    bool interior = p.is_finite() && domain_.contains(p);
    if (interior) {
        try {
            Complex v = evaluate_interior(p.value());
            if (!finite(v)) throw DomainViolationError("evaluate: overflow");
            return RSpherePoint(v);
        } catch (const DomainViolationError&) {
            if (domain_.kind == DomainKind::disk) throw;
            return RSpherePoint::infinity(); // overflow/pole on H or Omega
        }
    }

    // closure points, by body
    return std::visit(
        [&](const auto& b) -> RSpherePoint {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return b.value;
            } else if constexpr (std::is_same_v<T, Affine>) {
                if (p.is_infinite())
                    return b.a == Complex(0.0) ? RSpherePoint(b.b) : RSpherePoint::infinity();
                return RSpherePoint(b.a * p.value() + b.b);
            } else if constexpr (std::is_same_v<T, Moebius>) {
                if (p.is_infinite())
                    return b.c == Complex(0.0)
                               ? (b.a == Complex(0.0) ? RSpherePoint(b.b / b.d) : RSpherePoint::infinity())
                               : RSpherePoint(b.a / b.c);
                Complex den = b.c * p.value() + b.d;
                if (den == Complex(0.0)) return RSpherePoint::infinity();
                return RSpherePoint((b.a * p.value() + b.b) / den);
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                if (p.is_infinite())
                    return b.coeffs.size() <= 1 ? RSpherePoint(b.coeffs[0]) : RSpherePoint::infinity();
                Complex v = 0.0;
                for (auto it = b.coeffs.rbegin(); it != b.coeffs.rend(); ++it) v = v * p.value() + *it;
                return RSpherePoint(v);
            } else if constexpr (std::is_same_v<T, Nevanlinna>) {
                if (p.is_infinite()) {
                    if (b.data->alpha > 0.0) return RSpherePoint::infinity();
                    return RSpherePoint(b.data->beta - b.data->sigma.moment(1).real());
                }
                return ray_limit([&](Complex z) { return b.data->psi(z); }, p.value(),
                                 inward_direction(domain_, p.value()));
            } else if constexpr (std::is_same_v<T, EtaRatio>) {
                if (p.is_infinite()) return RSpherePoint(b.data->beta());
                return ray_limit([&](Complex z) { return b.data->f(z); }, p.value(),
                                 inward_direction(domain_, p.value()));
            } else if constexpr (std::is_same_v<T, EtaRatioCircle>) {
                return ray_limit([&](Complex z) { return eta_over_lambda(*b.mu, z); }, p.value(),
                                 inward_direction(domain_, p.value()));
            } else if constexpr (std::is_same_v<T, FShift>) {
                if (p.is_infinite())
                    return RSpherePoint(-b.mu->moment(1).real());
                return ray_limit(
                    [&](Complex z) { return 1.0 / cauchy_transform(*b.mu, z) - z; }, p.value(),
                    inward_direction(domain_, p.value()));
            } else if constexpr (std::is_same_v<T, Composite>) {
                RSpherePoint v = p;
                for (const SelfMap& link : b.chain) v = link.evaluate(v);
                return v;
            } else if constexpr (std::is_same_v<T, ScaledRotation>) {
                return RSpherePoint(b.inner->evaluate(RSpherePoint(b.mu * p.value())).value() / b.mu);
            } else if constexpr (std::is_same_v<T, PosLineFamilyMap>) {
                if (p.is_infinite()) {
                    // phi_z(inf) = z f1(z f2(inf)) with f2(inf) = beta_2; f1 is finite at 0
                    Complex inner = b.z * b.f2->beta();
                    return RSpherePoint(b.z * b.f1->f(inner));
                }
                return ray_limit(
                    [&](Complex lam) { return b.z * b.f1->f(b.z * b.f2->f(lam)); }, p.value(),
                    inward_direction(domain_, p.value()));
            } else if constexpr (std::is_same_v<T, WedgeConj>) {
                if (p.is_infinite()) {
                    RSpherePoint w = b.inner->evaluate(RSpherePoint::infinity());
                    return wedge_map_inv_closure(w, b.theta);
                }
                return ray_limit([&](Complex z) { return evaluate_interior(z); }, p.value(),
                                 inward_direction(domain_, p.value()));
            } else if constexpr (std::is_same_v<T, ConstOverF>) {
                if (b.gamma.is_infinite()) return RSpherePoint::infinity();
                if (p.is_infinite()) {
                    double beta2 = b.f2->beta();
                    if (beta2 == 0.0) return RSpherePoint::infinity();
                    return RSpherePoint(b.gamma.value() / beta2);
                }
                return ray_limit([&](Complex z) { return b.gamma.value() / b.f2->f(z); }, p.value(),
                                 inward_direction(domain_, p.value()));
            }
        },
        body_);
}

// ---------------------------------------------------------------------------
// Structure analysis
// ---------------------------------------------------------------------------

std::optional<std::array<Complex, 4>> SelfMap::as_moebius() const {
    return std::visit(
        [&](const auto& b) -> std::optional<std::array<Complex, 4>> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Affine>) {
                if (b.a == Complex(0.0)) return std::nullopt; // constant
                return std::array<Complex, 4>{b.a, b.b, 0.0, 1.0};
            } else if constexpr (std::is_same_v<T, Moebius>) {
                std::array<Complex, 4> m{b.a, b.b, b.c, b.d};
                if (std::abs(mat_det(m)) <
                    1e-14 * std::max(1.0, std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3])))
                    return std::nullopt; // degenerate: constant
                return mat_normalized(m);
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                if (b.coeffs.size() == 2 && b.coeffs[1] != Complex(0.0))
                    return std::array<Complex, 4>{b.coeffs[1], b.coeffs[0], 0.0, 1.0};
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Nevanlinna>) {
                if (b.data->sigma.total_mass() == 0.0 && b.data->alpha > 0.0)
                    return std::array<Complex, 4>{b.data->alpha, b.data->beta, 0.0, 1.0};
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Composite>) {
                std::array<Complex, 4> m{1.0, 0.0, 0.0, 1.0};
                for (const SelfMap& link : b.chain) {
                    auto lm = link.as_moebius();
                    if (!lm) return std::nullopt;
                    m = mat_normalized(mat_mul(*lm, m));
                }
                return m;
            } else if constexpr (std::is_same_v<T, ScaledRotation>) {
                auto im = b.inner->as_moebius();
                if (!im) return std::nullopt;
                // (1/mu) inner(mu z)
                std::array<Complex, 4> left{1.0 / b.mu, 0.0, 0.0, 1.0};
                std::array<Complex, 4> right{b.mu, 0.0, 0.0, 1.0};
                return mat_normalized(mat_mul(left, mat_mul(*im, right)));
            } else {
                return std::nullopt;
            }
        },
        body_);
}

std::optional<RSpherePoint> SelfMap::as_constant() const {
    return std::visit(
        [&](const auto& b) -> std::optional<RSpherePoint> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return b.value;
            } else if constexpr (std::is_same_v<T, Affine>) {
                if (b.a == Complex(0.0)) return RSpherePoint(b.b);
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Moebius>) {
                std::array<Complex, 4> m{b.a, b.b, b.c, b.d};
                double sc = std::max(1.0, std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]));
                if (std::abs(mat_det(m)) >= 1e-14 * sc) return std::nullopt;
                if (b.c != Complex(0.0)) return RSpherePoint(b.a / b.c);
                if (b.d != Complex(0.0)) return RSpherePoint(b.b / b.d);
                return RSpherePoint::infinity();
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                if (b.coeffs.size() == 1) return RSpherePoint(b.coeffs[0]);
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Nevanlinna>) {
                if (b.data->alpha == 0.0 && b.data->sigma.total_mass() == 0.0)
                    return RSpherePoint(b.data->beta);
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, EtaRatio>) {
                if (b.data->is_constant()) return RSpherePoint(b.data->beta());
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Composite>) {
                // a constant link freezes the remainder of the chain
                for (std::size_t i = 0; i < b.chain.size(); ++i) {
                    if (auto c = b.chain[i].as_constant()) {
                        RSpherePoint v = *c;
                        for (std::size_t j = i + 1; j < b.chain.size(); ++j)
                            v = b.chain[j].evaluate(v);
                        return v;
                    }
                }
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, ScaledRotation>) {
                if (auto c = b.inner->as_constant()) {
                    if (c->is_infinite()) return c;
                    return RSpherePoint(c->value() / b.mu);
                }
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, PosLineFamilyMap>) {
                if (b.z == Complex(0.0)) return RSpherePoint(Complex(0.0));
                if (b.f2->is_constant())
                    return RSpherePoint(b.z * b.f1->f(b.z * b.f2->beta()));
                if (b.f1->is_constant()) return RSpherePoint(b.z * b.f1->beta());
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, WedgeConj>) {
                if (auto c = b.inner->as_constant())
                    return wedge_map_inv_closure(*c, b.theta);
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, ConstOverF>) {
                if (b.gamma.is_infinite()) return RSpherePoint::infinity();
                if (b.gamma.value() == Complex(0.0)) return RSpherePoint(Complex(0.0));
                if (b.f2->is_constant()) {
                    double beta2 = b.f2->beta();
                    if (beta2 == 0.0) return RSpherePoint::infinity();
                    return RSpherePoint(b.gamma.value() / beta2);
                }
                return std::nullopt;
            } else {
                return std::nullopt;
            }
        },
        body_);
}

bool SelfMap::is_identity() const {
    if (const auto* nv = std::get_if<Nevanlinna>(&body_))
        return nv->data->is_identity();
    if (as_constant()) return false;
    if (auto m = as_moebius()) {
        const auto& mm = *m;
        double off = std::abs(mm[1]) + std::abs(mm[2]) + std::abs(mm[0] - mm[3]);
        return off <= 1e-12;
    }
    // five-point numerical comparison on interior samples
    static const Complex disk_pts[] = {{0.1, 0.0}, {-0.2, 0.3}, {0.0, 0.5}, {-0.6, 0.0}, {0.25, -0.25}};
    static const Complex hp_pts[] = {{0.0, 1.0}, {1.0, 1.0}, {-2.0, 0.5}, {0.0, 3.0}, {-0.3, 2.0}};
    static const Complex slit_pts[] = {{-1.0, 0.0}, {0.0, 1.0}, {-2.0, 0.5}, {-0.5, -0.5}, {1.0, 1.0}};
    const Complex* pts = domain_.kind == DomainKind::disk
                             ? disk_pts
                             : (domain_.kind == DomainKind::half_plane ? hp_pts : slit_pts);
    for (int i = 0; i < 5; ++i) {
        Complex v = evaluate_interior(pts[i]);
        if (std::abs(v - pts[i]) > 1e-12 * std::max(1.0, std::abs(pts[i]))) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Map families
// ---------------------------------------------------------------------------

MapFamily MapFamily::disk_multiplicative(SelfMap phi) {
    if (phi.domain().kind != DomainKind::disk)
        throw DomainViolationError("MapFamily: disk-multiplicative needs a disk map");
    MapFamily f;
    f.kind_ = Kind::disk_multiplicative;
    f.map1_ = std::make_shared<const SelfMap>(std::move(phi));
    return f;
}

MapFamily MapFamily::circle_two_var(SelfMap phi1, SelfMap phi2) {
    if (phi1.domain().kind != DomainKind::disk || phi2.domain().kind != DomainKind::disk)
        throw DomainViolationError("MapFamily: circle family needs disk maps");
    MapFamily f;
    f.kind_ = Kind::circle_two_var;
    f.map1_ = std::make_shared<const SelfMap>(std::move(phi1));
    f.map2_ = std::make_shared<const SelfMap>(std::move(phi2));
    return f;
}

MapFamily MapFamily::halfplane_additive(SelfMap psi1, SelfMap psi2) {
    if (psi1.domain().kind != DomainKind::half_plane || psi2.domain().kind != DomainKind::half_plane)
        throw DomainViolationError("MapFamily: half-plane family needs half-plane maps");
    MapFamily f;
    f.kind_ = Kind::halfplane_additive_two_var;
    f.map1_ = std::make_shared<const SelfMap>(std::move(psi1));
    f.map2_ = std::make_shared<const SelfMap>(std::move(psi2));
    return f;
}

MapFamily MapFamily::positive_line(ClassFData f1, ClassFData f2) {
    MapFamily f;
    f.kind_ = Kind::positive_line;
    f.f1_ = std::make_shared<const ClassFData>(std::move(f1));
    f.f2_ = std::make_shared<const ClassFData>(std::move(f2));
    return f;
}

SelfMap MapFamily::at(Complex z) const {
    switch (kind_) {
        case Kind::disk_multiplicative:
            return SelfMap::compose({*map1_, SelfMap::affine(disk_domain(), z, 0.0)});
        case Kind::positive_line:
            return SelfMap(slit_plane_domain(), SelfMap::PosLineFamilyMap{f1_, f2_, z});
        default:
            return at(z, z);
    }
}

SelfMap MapFamily::at(Complex z1, Complex z2) const {
    switch (kind_) {
        case Kind::circle_two_var:
            // phi_{z1,z2} = z1 phi1(z2 phi2(lambda))
            return SelfMap::compose({*map2_, SelfMap::affine(disk_domain(), z2, 0.0), *map1_,
                                     SelfMap::affine(disk_domain(), z1, 0.0)});
        case Kind::halfplane_additive_two_var:
            // phi_{z1,z2} = z1 + psi1(z2 + psi2(lambda))
            return SelfMap::compose({*map2_, SelfMap::affine(half_plane_domain(), 1.0, z2), *map1_,
                                     SelfMap::affine(half_plane_domain(), 1.0, z1)});
        case Kind::disk_multiplicative:
        case Kind::positive_line:
            if (z1 == z2) return at(z1);
            throw DomainViolationError("MapFamily: one-parameter family");
    }
    throw DomainViolationError("MapFamily: bad kind");
}

FamilyBoundaryLimits family_boundary_limits(const MapFamily& fam) {
    if (fam.kind() != MapFamily::Kind::positive_line)
        throw DomainViolationError("family_boundary_limits: positive-line family required");
    RSpherePoint gamma = fam.f1().eta_limit_neg_infinity();
    SelfMap zero = SelfMap::constant(slit_plane_domain(), RSpherePoint(Complex(0.0)));
    if (gamma.is_infinite()) {
        return FamilyBoundaryLimits{zero, SelfMap::constant(slit_plane_domain(), RSpherePoint::infinity()),
                                    gamma};
    }
    SelfMap inf_map(slit_plane_domain(),
                    SelfMap::ConstOverF{gamma, std::make_shared<const ClassFData>(fam.f2())});
    return FamilyBoundaryLimits{zero, std::move(inf_map), gamma};
}

void check_growth_condition(const SelfMap& psi) {
    if (psi.domain().kind != DomainKind::half_plane)
        throw DomainViolationError("check_growth_condition: half-plane map required");
    double prev = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (double y : {1e2, 1e4, 1e6}) {
        Complex iy(0.0, y);
        Complex v = psi.evaluate_interior(iy);
        last = std::abs(v / iy);
        if (last > prev * (1.0 + 1e-6))
            throw GrowthConditionError("psi(iy)/iy is not decreasing along the vertical ray");
        prev = last;
    }
    if (!(last < 1e-3))
        throw GrowthConditionError("psi(iy)/iy does not decay below 1e-3 by y = 1e6");
}

RSpherePoint psi_at_infinity(const SelfMap& psi) {
    if (const auto* nv = std::get_if<SelfMap::Nevanlinna>(&psi.body())) {
        if (nv->data->alpha > 0.0) return RSpherePoint::infinity();
        return RSpherePoint(nv->data->beta - nv->data->sigma.moment(1).real());
    }
    if (const auto* fs = std::get_if<SelfMap::FShift>(&psi.body()))
        return RSpherePoint(-fs->mu->moment(1).real());
    if (auto m = psi.as_moebius()) {
        const auto& mm = *m;
        if (mm[2] != Complex(0.0)) return RSpherePoint(mm[0] / mm[2]);
        if (mm[0] != Complex(0.0)) return RSpherePoint::infinity();
        return RSpherePoint(mm[1] / mm[3]);
    }
    if (auto c = psi.as_constant()) return *c;
    // vertical-ray samples with Richardson in 1/y
    std::vector<double> hs;
    std::vector<Complex> vs;
    for (double y : {1e6, 1e7, 1e8}) {
        hs.push_back(1.0 / y);
        vs.push_back(psi.evaluate_interior(Complex(0.0, y)));
    }
    if (std::abs(vs[2]) > 2.0 * std::abs(vs[0]) + 1.0) return RSpherePoint::infinity();
    double defect = 0.0;
    Complex lim = extrapolate_to_zero(hs, vs, &defect);
    if (defect > 1e-6 * std::max(1.0, std::abs(lim)))
        throw ExtrapolationError("psi_at_infinity: vertical-ray limit did not settle");
    return RSpherePoint(lim);
}

} // namespace dw
