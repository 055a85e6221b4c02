#include "subordination.hpp"

#include <cmath>

#include "measure_spec.hpp"
#include "numerics.hpp"

namespace dw {

namespace {

DWOptions dw_opts(const SubordinationOptions& o, std::optional<Complex> warm = std::nullopt) {
    DWOptions d;
    d.tol = o.tol;
    d.max_iter = o.max_iter;
    d.warm_start = warm;
    return d;
}

double point_gap(const RSpherePoint& a, const RSpherePoint& b) {
    if (a.is_infinite() || b.is_infinite()) return sphere_distance(a, b);
    return std::abs(a.value() - b.value());
}

// residual of |x - y| treating both-infinite as exact agreement
double defect(const RSpherePoint& x, const RSpherePoint& y) { return point_gap(x, y); }

// evaluate phi at a closure point, tolerating ray-limit failures
RSpherePoint eval_closure(const SelfMap& m, const RSpherePoint& p) { return m.evaluate(p); }

} // namespace

const char* subordination_setting_name(SubordinationSetting s) {
    switch (s) {
        case SubordinationSetting::disk_one_phi: return "disk-one-phi";
        case SubordinationSetting::circle_two_var: return "circle-two-var";
        case SubordinationSetting::circle_one_var: return "circle-one-var";
        case SubordinationSetting::halfplane_two_var: return "halfplane-two-var";
        case SubordinationSetting::halfplane_one_var: return "halfplane-one-var";
        case SubordinationSetting::positive_line: return "positive-line";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Disk, one phi
// ---------------------------------------------------------------------------

namespace {

// phi(lambda) = lambda/z0 for unimodular z0: the family phi_z is a rotation
// scaling for every z, and omega == 0 throughout (also at the identity
// parameter z = z0).
bool is_unimodular_rotation(const SelfMap& phi) {
    auto m = phi.as_moebius();
    if (!m) return false;
    const auto& mm = *m;
    if (std::abs(mm[1]) > 1e-14 || std::abs(mm[2]) > 1e-14) return false;
    return std::abs(std::abs(mm[0] / mm[3]) - 1.0) <= 1e-12;
}

} // namespace

SubordinationResult subordinate_disk(const SelfMap& phi, std::span<const RSpherePoint> z_grid,
                                     const SubordinationOptions& opts) {
    if (phi.domain().kind != DomainKind::disk)
        throw DomainViolationError("subordinate_disk: disk map required");
    SubordinationResult out;
    out.setting = SubordinationSetting::disk_one_phi;
    bool rotation_family = is_unimodular_rotation(phi);
    MapFamily fam = MapFamily::disk_multiplicative(phi);

    std::optional<Complex> warm;
    for (const RSpherePoint& zp : z_grid) {
        SubordinationPoint pt;
        pt.z1 = pt.z2 = zp;
        Complex z = zp.value(); // no infinity in the closed disk
        try {
            if (rotation_family || z == Complex(0.0)) {
                pt.omega1 = RSpherePoint(Complex(0.0));
                pt.omega2 = pt.omega1;
                pt.residual = 0.0;
            } else {
                SelfMap phiz = fam.at(z);
                DWResult r = compute_denjoy_wolff(phiz, dw_opts(opts, warm));
                pt.omega1 = r.point;
                pt.omega2 = r.point;
                pt.iterations = r.iterations;
                // residual |omega - z phi(omega)|
                RSpherePoint img = eval_closure(phi, pt.omega1);
                pt.residual = defect(pt.omega1, img.is_infinite() ? img : RSpherePoint(z * img.value()));
                if (pt.omega1.is_finite()) warm = pt.omega1.value();
            }
        } catch (const Error& e) {
            pt.error = e.what();
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Circle, two variables (and the diagonal)
// ---------------------------------------------------------------------------

namespace {

SubordinationPoint circle_point(const MapFamily& fam, const SelfMap& phi1, const SelfMap& phi2,
                                Complex z1, Complex z2, std::optional<Complex>& warm,
                                const SubordinationOptions& opts) {
    SubordinationPoint pt;
    pt.z1 = RSpherePoint(z1);
    pt.z2 = RSpherePoint(z2);
    if (z1 == Complex(0.0) && z2 == Complex(0.0)) {
        pt.omega1 = pt.omega2 = RSpherePoint(Complex(0.0)); // normalization omega(0,0) = 0
        return pt;
    }
    try {
        SelfMap map = fam.at(z1, z2);
        RSpherePoint omega2;
        long iters = 0;
        if (map.is_identity()) {
            // identity parameter (automorphism degeneracy): radial limit of the
            // Denjoy-Wolff points, each solved by the exact Moebius path
            std::vector<double> hs;
            std::vector<Complex> vs;
            for (double eps : {1e-5, 1e-6, 1e-7}) {
                SelfMap near_map = fam.at(z1 * (1.0 - eps), z2 * (1.0 - eps));
                DWResult r = compute_denjoy_wolff(near_map, dw_opts(opts));
                hs.push_back(eps);
                vs.push_back(r.point.value());
            }
            omega2 = RSpherePoint(extrapolate_to_zero(hs, vs));
        } else {
            DWResult r = compute_denjoy_wolff(map, dw_opts(opts, warm));
            omega2 = r.point;
            iters = r.iterations;
        }
        pt.omega2 = omega2;
        pt.iterations = iters;
        // omega1 = z2 phi2(omega2)
        RSpherePoint img2 = eval_closure(phi2, omega2);
        pt.omega1 = RSpherePoint(z2 * img2.value());
        // residual: omega2 = z1 phi1(omega1)
        RSpherePoint img1 = eval_closure(phi1, pt.omega1);
        pt.residual = defect(pt.omega2, RSpherePoint(z1 * img1.value()));
        if (pt.omega2.is_finite()) warm = pt.omega2.value();
    } catch (const Error& e) {
        pt.error = e.what();
    }
    return pt;
}

} // namespace

SubordinationResult subordinate_circle_two_var(const SelfMap& phi1, const SelfMap& phi2,
                                               std::span<const std::pair<RSpherePoint, RSpherePoint>> grid,
                                               const SubordinationOptions& opts) {
    MapFamily fam = MapFamily::circle_two_var(phi1, phi2);
    SubordinationResult out;
    out.setting = SubordinationSetting::circle_two_var;
    std::optional<Complex> warm;
    for (const auto& [z1, z2] : grid)
        out.points.push_back(circle_point(fam, phi1, phi2, z1.value(), z2.value(), warm, opts));
    return out;
}

SubordinationResult subordinate_circle_one_var(const SelfMap& phi1, const SelfMap& phi2,
                                               std::span<const RSpherePoint> z_grid,
                                               const SubordinationOptions& opts) {
    MapFamily fam = MapFamily::circle_two_var(phi1, phi2);
    SubordinationResult out;
    out.setting = SubordinationSetting::circle_one_var;
    std::optional<Complex> warm;
    for (const RSpherePoint& zp : z_grid) {
        Complex z = zp.value();
        SubordinationPoint pt = circle_point(fam, phi1, phi2, z, z, warm, opts);
        if (pt.error.empty() && z != Complex(0.0)) {
            // three-way identity: omega1 phi1(omega1) = omega2 phi2(omega2) = omega1 omega2 / z
            try {
                Complex w1 = pt.omega1.value(), w2 = pt.omega2.value();
                Complex lhs = w1 * eval_closure(phi1, pt.omega1).value();
                Complex mid = w2 * eval_closure(phi2, pt.omega2).value();
                Complex rhs = w1 * w2 / z;
                pt.residual = std::max({pt.residual, std::abs(lhs - mid), std::abs(lhs - rhs)});
            } catch (const Error& e) {
                pt.error = e.what();
            }
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Half-plane, two variables (and the diagonal)
// ---------------------------------------------------------------------------

namespace {

SubordinationPoint halfplane_point(const MapFamily& fam, const SelfMap& psi1, const SelfMap& psi2,
                                   const RSpherePoint& z1p, const RSpherePoint& z2p,
                                   std::optional<Complex>& warm, const SubordinationOptions& opts) {
    SubordinationPoint pt;
    pt.z1 = z1p;
    pt.z2 = z2p;
    try {
        if (z1p.is_infinite() || z2p.is_infinite()) {
            // continuous-extension rows at infinite parameters
            if (z1p.is_infinite() && z2p.is_infinite()) {
                pt.omega1 = pt.omega2 = RSpherePoint::infinity();
                return pt;
            }
            if (z1p.is_infinite()) {
                // phi_{z1,z2} -> inf pointwise, so omega2 -> inf; omega1 -> z2 + psi2(inf)
                pt.omega2 = RSpherePoint::infinity();
                RSpherePoint p2 = psi_at_infinity(psi2);
                if (p2.is_infinite())
                    pt.omega1 = RSpherePoint::infinity();
                else
                    pt.omega1 = RSpherePoint(z2p.value() + p2.value());
            } else {
                // inner coordinate blows up: phi -> z1 + psi1(inf) constant
                pt.omega1 = RSpherePoint::infinity();
                RSpherePoint p1 = psi_at_infinity(psi1);
                if (p1.is_infinite())
                    pt.omega2 = RSpherePoint::infinity();
                else
                    pt.omega2 = RSpherePoint(z1p.value() + p1.value());
            }
            return pt;
        }

        Complex z1 = z1p.value(), z2 = z2p.value();
        SelfMap map = fam.at(z1, z2);
        RSpherePoint omega2;
        long iters = 0;
        if (map.is_identity()) {
            // fractional-linear degeneracy at one real parameter pair
            std::vector<double> hs;
            std::vector<Complex> vs;
            for (double eps : {1e-5, 1e-6, 1e-7}) {
                SelfMap near_map = fam.at(z1 + Complex(0.0, eps), z2 + Complex(0.0, eps));
                DWResult r = compute_denjoy_wolff(near_map, dw_opts(opts));
                hs.push_back(eps);
                vs.push_back(r.point.is_infinite() ? Complex(0, 1e30) : r.point.value());
            }
            omega2 = RSpherePoint(extrapolate_to_zero(hs, vs));
        } else {
            DWResult r = compute_denjoy_wolff(map, dw_opts(opts, warm));
            omega2 = r.point;
            iters = r.iterations;
        }
        pt.omega2 = omega2;
        pt.iterations = iters;
        if (omega2.is_infinite()) {
            pt.omega1 = RSpherePoint::infinity();
            return pt;
        }
        RSpherePoint img2 = eval_closure(psi2, omega2);
        if (img2.is_infinite()) {
            pt.omega1 = RSpherePoint::infinity();
        } else {
            pt.omega1 = RSpherePoint(z2 + img2.value());
            RSpherePoint img1 = eval_closure(psi1, pt.omega1);
            if (img1.is_finite())
                pt.residual = defect(pt.omega2, RSpherePoint(z1 + img1.value()));
        }
        if (pt.omega2.is_finite()) warm = cayley(pt.omega2).value();
    } catch (const Error& e) {
        pt.error = e.what();
    }
    return pt;
}

} // namespace

SubordinationResult subordinate_halfplane_two_var(const SelfMap& psi1, const SelfMap& psi2,
                                                  std::span<const std::pair<RSpherePoint, RSpherePoint>> grid,
                                                  const SubordinationOptions& opts) {
    check_growth_condition(psi1);
    check_growth_condition(psi2);
    MapFamily fam = MapFamily::halfplane_additive(psi1, psi2);
    SubordinationResult out;
    out.setting = SubordinationSetting::halfplane_two_var;
    std::optional<Complex> warm;
    for (const auto& [z1, z2] : grid)
        out.points.push_back(halfplane_point(fam, psi1, psi2, z1, z2, warm, opts));
    return out;
}

SubordinationResult subordinate_halfplane_one_var(const SelfMap& psi1, const SelfMap& psi2,
                                                  std::span<const RSpherePoint> z_grid,
                                                  const SubordinationOptions& opts) {
    check_growth_condition(psi1);
    check_growth_condition(psi2);
    MapFamily fam = MapFamily::halfplane_additive(psi1, psi2);
    SubordinationResult out;
    out.setting = SubordinationSetting::halfplane_one_var;
    std::optional<Complex> warm;
    for (const RSpherePoint& zp : z_grid) {
        SubordinationPoint pt = halfplane_point(fam, psi1, psi2, zp, zp, warm, opts);
        if (pt.error.empty() && pt.omega1.is_finite() && pt.omega2.is_finite() && zp.is_finite()) {
            // one-variable identity: omega1 + psi1(omega1) = omega1 + omega2 - z
            try {
                Complex w1 = pt.omega1.value(), w2 = pt.omega2.value();
                RSpherePoint img1 = eval_closure(psi1, pt.omega1);
                if (img1.is_finite()) {
                    double r = std::abs(w1 + img1.value() - (w1 + w2 - zp.value()));
                    pt.residual = std::max(pt.residual, r);
                }
            } catch (const Error& e) {
                pt.error = e.what();
            }
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Positive line
// ---------------------------------------------------------------------------

namespace {

struct PosSolve {
    Complex omega;
    long iterations = 0;
};

// Fixed point of phi_z(w) = z f1(z f2(w)) inside the wedge G_{arg z}.
// The wedge-conjugated Denjoy-Wolff iteration globalizes (it converges from
// any interior start); a damped Newton step on the slit-plane equation
// finishes the job, which matters near the wedge edge where the plain
// iteration multiplier approaches one.
PosSolve solve_positive_point(const ClassFData& d1, const ClassFData& d2, Complex z,
                              std::optional<Complex> warm, const SubordinationOptions& opts) {
    double theta = std::arg(z);
    auto phi = [&](Complex w) { return z * d1.f(z * d2.f(w)); };
    auto phi_deriv = [&](Complex w) {
        Complex inner = z * d2.f(w);
        return z * d1.f_derivative(inner) * z * d2.f_derivative(w);
    };
    auto in_closed_wedge = [&](Complex w) {
        if (w == Complex(0.0)) return false;
        double a = std::arg(w);
        return a >= theta - 1e-9 && a <= M_PI + 1e-9;
    };

    PosSolve out;
    Complex omega = warm && in_closed_wedge(*warm) ? *warm
                                                   : wedge_map_closure(RSpherePoint(Complex(0, 1)), theta).value();
    // plain Denjoy-Wolff iterations to reach the Newton basin
    double delta = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 400 && delta > 1e-3; ++k) {
        Complex next = phi(omega);
        ++out.iterations;
        delta = std::abs(next - omega);
        omega = next;
        if (delta <= opts.tol * std::max(1.0, std::abs(omega))) {
            out.omega = omega;
            return out;
        }
    }
    // damped Newton on g(w) = w - phi_z(w), confined to the closed wedge;
    // keep polishing below the requested tolerance while the residual still
    // improves, down to the evaluation noise floor
    bool reached_tol = false;
    for (int k = 0; k < 200; ++k) {
        Complex g = omega - phi(omega);
        ++out.iterations;
        double res = std::abs(g);
        if (res <= opts.tol * std::max(1.0, std::abs(omega))) reached_tol = true;
        if (res <= 1e-15 * std::max(1.0, std::abs(omega))) break;
        Complex gp = 1.0 - phi_deriv(omega);
        bool moved = false;
        if (std::abs(gp) > 1e-16) {
            Complex step = -g / gp;
            double s = 1.0;
            for (int halving = 0; halving < 50 && !moved; ++halving, s *= 0.5) {
                Complex cand = omega + s * step;
                if (!in_closed_wedge(cand)) continue;
                try {
                    if (std::abs(cand - phi(cand)) < res) {
                        omega = cand;
                        moved = true;
                    }
                } catch (const Error&) {
                    // candidate touched a kernel singularity: keep damping
                }
            }
        }
        if (!moved) {
            if (reached_tol) break; // at the noise floor
            omega = phi(omega);     // guaranteed-contraction fallback
        }
    }
    Complex g = omega - phi(omega);
    if (std::abs(g) > 1e-9 * std::max(1.0, std::abs(omega)))
        throw NoConvergenceError("positive-line fixed point did not converge", out.iterations);
    if (std::arg(omega) < theta - 1e-8)
        throw WedgeViolationError("positive-line fixed point left the invariant wedge");
    out.omega = omega;
    return out;
}

SubordinationPoint positive_point(const MapFamily& fam, const ClassFData& d1, const ClassFData& d2,
                                  const RSpherePoint& zp, std::optional<Complex>& warm_omega,
                                  const SubordinationOptions& opts) {
    SubordinationPoint pt;
    pt.z1 = pt.z2 = zp;
    try {
        if (zp.is_infinite()) {
            pt.omega1 = RSpherePoint::infinity(); // omega(inf) = inf
            pt.omega2 = RSpherePoint::infinity();
            return pt;
        }
        Complex z = zp.value();
        if (z == Complex(0.0)) {
            pt.omega1 = pt.omega2 = RSpherePoint(Complex(0.0)); // omega(0) = 0
            return pt;
        }
        double theta = std::arg(z);
        if (theta < 0.0 || theta >= M_PI)
            throw DomainViolationError("subordinate_positive_line: parameter must lie in H u (0, inf)");

        SelfMap phi_z = fam.at(z);
        RSpherePoint omega;
        long iters = 0;
        if (auto c = phi_z.as_constant()) {
            omega = *c; // constant family map: the Denjoy-Wolff point is the constant
        } else if (phi_z.is_identity()) {
            // identity parameter (z real): approach through the upper half-plane
            std::vector<double> hs;
            std::vector<Complex> vs;
            for (double eps : {1e-5, 1e-6, 1e-7}) {
                Complex znear = z * std::exp(Complex(0.0, eps));
                PosSolve ps = solve_positive_point(d1, d2, znear, std::nullopt, opts);
                hs.push_back(eps);
                vs.push_back(ps.omega);
            }
            omega = RSpherePoint(extrapolate_to_zero(hs, vs));
        } else {
            PosSolve ps = solve_positive_point(d1, d2, z, warm_omega, opts);
            iters = ps.iterations;
            omega = RSpherePoint(ps.omega);
        }
        pt.omega1 = omega;
        pt.iterations = iters;
        if (omega.is_infinite()) {
            pt.omega2 = RSpherePoint::infinity();
            return pt;
        }
        Complex om = omega.value();
        Complex om2 = z * d2.f(om);
        pt.omega2 = RSpherePoint(om2);
        pt.residual = std::abs(om - z * d1.f(om2)); // defect of omega = z f1(z f2(omega))
        warm_omega = om;
    } catch (const Error& e) {
        pt.error = e.what();
    }
    return pt;
}

} // namespace

SubordinationResult subordinate_positive_line(const ClassFData& d1, const ClassFData& d2,
                                              std::span<const RSpherePoint> grid,
                                              const SubordinationOptions& opts) {
    MapFamily fam = MapFamily::positive_line(d1, d2);
    SubordinationResult out;
    out.setting = SubordinationSetting::positive_line;
    std::optional<Complex> warm;
    for (const RSpherePoint& zp : grid)
        out.points.push_back(positive_point(fam, d1, d2, zp, warm, opts));
    return out;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

CsvWriter subordination_csv(const SubordinationResult& r) {
    CsvWriter w;
    w.comment(std::string("schema = subordination v1, setting = ") +
              subordination_setting_name(r.setting));
    w.header({"re_z1", "im_z1", "re_z2", "im_z2", "re_omega1", "im_omega1", "re_omega2",
              "im_omega2", "residual", "iterations", "status"});
    auto put = [](std::vector<std::string>& cells, const RSpherePoint& p) {
        if (p.is_infinite()) {
            cells.push_back("inf");
            cells.push_back("inf");
        } else {
            cells.push_back(format_double(p.value().real()));
            cells.push_back(format_double(p.value().imag()));
        }
    };
    for (const auto& pt : r.points) {
        std::vector<std::string> cells;
        put(cells, pt.z1);
        put(cells, pt.z2);
        if (pt.no_value) {
            cells.insert(cells.end(), {"nan", "nan", "nan", "nan"});
        } else {
            put(cells, pt.omega1);
            put(cells, pt.omega2);
        }
        cells.push_back(format_double(pt.residual));
        cells.push_back(std::to_string(pt.iterations));
        cells.push_back(pt.no_value ? "no-value" : (pt.error.empty() ? "ok" : "error"));
        w.row(cells);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Warm-started point engines
// ---------------------------------------------------------------------------

Complex omega_halfplane_point(const SelfMap& psi1, const SelfMap& psi2, Complex z,
                              Complex* omega2_out, OmegaState& state,
                              const SubordinationOptions& opts) {
    // phi_{z,z}(lambda) = z + psi1(z + psi2(lambda)); omega2 = lambda_phi
    SelfMap map = SelfMap::compose({psi2, SelfMap::affine(half_plane_domain(), 1.0, z), psi1,
                                    SelfMap::affine(half_plane_domain(), 1.0, z)});
    DWResult r = compute_denjoy_wolff(map, dw_opts(opts, state.warm));
    state.iterations += r.iterations;
    if (r.point.is_infinite())
        throw NoConvergenceError("omega_halfplane_point: subordination value at infinity", r.iterations);
    Complex omega2 = r.point.value();
    state.warm = cayley(RSpherePoint(omega2)).value();
    RSpherePoint img2 = psi2.evaluate(RSpherePoint(omega2));
    if (img2.is_infinite())
        throw NoConvergenceError("omega_halfplane_point: psi2(omega2) at infinity", r.iterations);
    Complex omega1 = z + img2.value();
    if (omega2_out) *omega2_out = omega2;
    return omega1;
}

Complex omega_circle_point(const SelfMap& phi1, const SelfMap& phi2, Complex z,
                           Complex* omega2_out, OmegaState& state,
                           const SubordinationOptions& opts) {
    SelfMap map = SelfMap::compose({phi2, SelfMap::affine(disk_domain(), z, 0.0), phi1,
                                    SelfMap::affine(disk_domain(), z, 0.0)});
    Complex omega2;
    if (z == Complex(0.0)) {
        omega2 = 0.0;
    } else {
        DWResult r = compute_denjoy_wolff(map, dw_opts(opts, state.warm));
        state.iterations += r.iterations;
        omega2 = r.point.value();
        state.warm = omega2;
    }
    Complex omega1 = z * phi2.evaluate(RSpherePoint(omega2)).value();
    if (omega2_out) *omega2_out = omega2;
    return omega1;
}

Complex omega_positive_point(const ClassFData& d1, const ClassFData& d2, Complex lambda,
                             Complex* omega2_out, OmegaState& state,
                             const SubordinationOptions& opts) {
    double theta = std::arg(lambda);
    if (!(theta > 0.0 && theta < M_PI))
        throw DomainViolationError("omega_positive_point: lambda must lie in H");
    Complex omega;
    if (d1.is_constant()) {
        omega = lambda * d1.beta(); // phi_z is constant in w
    } else {
        PosSolve ps = solve_positive_point(d1, d2, lambda, state.warm, opts);
        state.iterations += ps.iterations;
        omega = ps.omega;
    }
    state.warm = omega;
    if (omega2_out) *omega2_out = lambda * d2.f(omega);
    return omega;
}

} // namespace dw
