#include "denjoy_wolff.hpp"

#include <algorithm>
#include <cmath>

#include "measure_spec.hpp"
#include "numerics.hpp"

namespace dw {

namespace {

constexpr double kBoundaryDetect = 1e-9; // |w| > 1 - this counts as boundary
constexpr double kRotationTol = 1e-8;    // | |phi'| - 1 | below this is a rotation

// Disk-coordinate view of a disk or half-plane self-map.
class DiskIterate {
public:
    explicit DiskIterate(const SelfMap& m)
        : m_(&m), conj_(m.domain().kind == DomainKind::half_plane) {
        if (m.domain().kind == DomainKind::slit_plane)
            throw DomainViolationError("denjoy_wolff: conjugate slit-plane maps to H first");
    }

    Complex eval(Complex w) const {
        if (!conj_) {
            Complex v = m_->evaluate_interior(w);
            double r = std::abs(v);
            return r > 1.0 ? v / r : v;
        }
        Complex z = cayley_inv(RSpherePoint(w)).value();
        Complex v;
        try {
            v = m_->evaluate_interior(z);
        } catch (const DomainViolationError&) {
            return Complex(1.0, 0.0); // pole/overflow: the image is at infinity
        }
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return Complex(1.0, 0.0);
        Complex u = cayley(RSpherePoint(v)).value();
        double r = std::abs(u);
        return r > 1.0 ? u / r : u;
    }

    Complex deriv(Complex w) const {
        if (!conj_) return m_->derivative(w);
        Complex z = cayley_inv(RSpherePoint(w)).value();
        Complex mp = m_->derivative(z);
        Complex v = m_->evaluate_interior(z);
        Complex i(0.0, 1.0);
        Complex du = 2.0 * i / ((v + i) * (v + i));       // cayley'(m(z))
        Complex dinv = 2.0 * i / ((1.0 - w) * (1.0 - w)); // cayley_inv'(w)
        return du * mp * dinv;
    }

    bool conjugated() const { return conj_; }

    RSpherePoint to_native(const RSpherePoint& w) const { return conj_ ? cayley_inv(w) : w; }
    RSpherePoint to_disk(const RSpherePoint& p) const { return conj_ ? cayley(p) : p; }

private:
    const SelfMap* m_;
    bool conj_;
};

double wrapped_angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * M_PI);
    return std::min(d, 2.0 * M_PI - d);
}

DWResult classify_interior_root(const DiskIterate& it, Complex w, long iterations) {
    // Newton polish; the doubled step covers the parabolic double-root regime
    double res = std::abs(it.eval(w) - w);
    for (int k = 0; k < 12; ++k) {
        Complex f = it.eval(w) - w;
        res = std::abs(f);
        if (res < 1e-15) break;
        Complex fp = it.deriv(w) - 1.0;
        if (std::abs(fp) < 1e-14) break;
        Complex step = -f / fp;
        Complex best = w;
        double best_res = res;
        for (double s : {1.0, 2.0}) {
            Complex cand = w + s * step;
            if (std::abs(cand) > 1.0) cand /= std::abs(cand) * (1.0 + 1e-15);
            double r = std::abs(it.eval(cand) - cand);
            if (r < best_res) {
                best = cand;
                best_res = r;
            }
        }
        if (best == w) break;
        w = best;
        res = best_res;
    }
    double mult = std::abs(it.deriv(w));
    DWResult r;
    r.iterations = iterations;
    r.residual = std::abs(it.eval(w) - w);
    if (std::abs(w) >= 1.0 - kBoundaryDetect) {
        Complex p = w / std::abs(w);
        r.point = it.to_native(RSpherePoint(p));
        r.dw_case = DWCase::boundary_attracting;
        r.jc_derivative = std::min(mult, 1.0);
        return r;
    }
    r.point = it.to_native(RSpherePoint(w));
    r.dw_case = (std::abs(mult - 1.0) <= kRotationTol) ? DWCase::interior_rotation
                                                       : DWCase::interior_attracting;
    r.jc_derivative = mult;
    return r;
}

// Fixed points of the disk-coordinate Moebius matrix, solved exactly.
DWResult moebius_fixed_point(const DiskIterate& it, std::array<Complex, 4> m) {
    Complex a = m[0], b = m[1], c = m[2], d = m[3];
    // c w^2 + (d - a) w - b = 0
    std::vector<Complex> roots;
    double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (std::abs(c) < 1e-15 * scale) {
        if (std::abs(d - a) > 1e-15 * scale) roots.push_back(b / (d - a));
    } else {
        Complex B = d - a;
        Complex disc = std::sqrt(B * B + 4.0 * c * b);
        Complex q = (std::abs(B + disc) >= std::abs(B - disc)) ? -(B + disc) / 2.0 : -(B - disc) / 2.0;
        Complex r1 = q / c;
        roots.push_back(r1);
        if (std::abs(q) > 0.0) roots.push_back(-b / q);
    }
    Complex det = a * d - b * c;
    auto multiplier = [&](Complex w) {
        Complex den = c * w + d;
        return det / (den * den);
    };

    const Complex* best = nullptr;
    double best_mult = std::numeric_limits<double>::infinity();
    bool best_interior = false;
    for (const Complex& w : roots) {
        double r = std::abs(w);
        double mult = std::abs(multiplier(w));
        bool interior = r < 1.0 - kBoundaryDetect;
        if (r > 1.0 + 1e-7) continue; // exterior mirror fixed point
        if (interior && mult <= 1.0 + kRotationTol) {
            best = &w;
            best_mult = mult;
            best_interior = true;
            break;
        }
        if (!best_interior && mult < best_mult) {
            best = &w;
            best_mult = mult;
        }
    }
    if (!best)
        throw NoFixedPointError("moebius fixed point: no Denjoy-Wolff candidate in the closed disk");

    DWResult r;
    r.iterations = 0;
    if (best_interior) {
        Complex w = *best;
        r.point = it.to_native(RSpherePoint(w));
        r.dw_case = (std::abs(best_mult - 1.0) <= kRotationTol) ? DWCase::interior_rotation
                                                                : DWCase::interior_attracting;
        r.jc_derivative = best_mult;
        r.residual = std::abs(it.eval(w) - w);
        return r;
    }
    Complex p = *best / std::abs(*best);
    r.point = it.to_native(RSpherePoint(p));
    r.dw_case = DWCase::boundary_attracting;
    r.jc_derivative = std::min(best_mult, 1.0);
    Complex near = p * (1.0 - 1e-9);
    r.residual = std::abs(it.eval(near) - near);
    return r;
}

DWResult constant_map_result(const DiskIterate& it, const SelfMap& m, const RSpherePoint& value) {
    DWResult r;
    r.iterations = 0;
    r.residual = 0.0;
    RSpherePoint w = it.to_disk(value);
    double mod = w.is_infinite() ? 1.0 : std::abs(w.value());
    if (mod >= 1.0 - kBoundaryDetect) {
        r.point = value;
        r.dw_case = DWCase::boundary_constant;
        r.jc_derivative = 0.0;
    } else {
        r.point = value;
        r.dw_case = DWCase::interior_attracting;
        r.jc_derivative = std::abs(m.derivative(value.value())); // 0 for a true constant
    }
    return r;
}

} // namespace

const char* dw_case_name(DWCase c) {
    switch (c) {
        case DWCase::identity: return "identity";
        case DWCase::boundary_constant: return "boundary-constant";
        case DWCase::interior_rotation: return "interior-rotation";
        case DWCase::interior_attracting: return "interior-attracting";
        case DWCase::boundary_attracting: return "boundary-attracting";
    }
    return "?";
}

DWResult denjoy_wolff(const SelfMap& m, const DWOptions& opts) {
    if (m.is_identity())
        throw IdentityMapError("denjoy_wolff: the identity map has no Denjoy-Wolff point");
    if (!(opts.tol > 0.0))
        throw DomainViolationError("denjoy_wolff: tolerance must be positive");

    // alpha >= 1 Nevanlinna data fixes infinity directly
    if (const auto* nv = std::get_if<SelfMap::Nevanlinna>(&m.body())) {
        if (nv->data->alpha >= 1.0) {
            DWResult r;
            r.point = RSpherePoint::infinity();
            r.dw_case = DWCase::boundary_attracting;
            r.jc_derivative = 1.0 / nv->data->alpha;
            return r;
        }
    }

    DiskIterate it(m);
    if (auto c = m.as_constant()) return constant_map_result(it, m, *c);
    if (auto mat = m.as_moebius()) {
        std::array<Complex, 4> dm = *mat;
        if (it.conjugated()) {
            // conjugate to disk coordinates: U M U^{-1}, U = [1 -i; 1 i]
            static const std::array<Complex, 4> U{1.0, Complex(0, -1), 1.0, Complex(0, 1)};
            static const std::array<Complex, 4> V{Complex(0, 1), Complex(0, 1), -1.0, 1.0}; // U^{-1} up to scale
            auto mul = [](const std::array<Complex, 4>& x, const std::array<Complex, 4>& y) {
                return std::array<Complex, 4>{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                                              x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
            };
            dm = mul(U, mul(dm, V));
        }
        return moebius_fixed_point(it, dm);
    }

    Complex w = opts.warm_start.value_or(Complex(0.0, 0.0));
    if (std::abs(w) > 1.0 - 1e-12) w *= (1.0 - 1e-9) / std::abs(w);

    int boundary_streak = 0;
    double prev_arg = 0.0;
    double delta = std::numeric_limits<double>::infinity();
    double delta_window = std::numeric_limits<double>::infinity(); // delta 1000 steps ago
    long k = 0;
    for (k = 1; k <= opts.max_iter; ++k) {
        Complex w1 = it.eval(w);
        delta = std::abs(w1 - w);

        if (delta <= opts.tol * std::max(1.0, std::abs(w1)))
            return classify_interior_root(it, w1, k);

        // boundary-attracting detection: modulus pinned at 1, argument frozen
        double r = std::abs(w1);
        double ang = std::arg(w1);
        if (r > 1.0 - kBoundaryDetect && k > 1 && wrapped_angle_gap(ang, prev_arg) < 1e-9) {
            if (++boundary_streak >= 10) {
                DWResult res;
                res.point = it.to_native(RSpherePoint(w1 / r));
                res.dw_case = DWCase::boundary_attracting;
                res.iterations = k;
                res.residual = delta;
                try {
                    res.jc_derivative = jc_derivative(m, res.point);
                } catch (const Error&) {
                    res.jc_derivative = std::nullopt;
                }
                return res;
            }
        } else {
            boundary_streak = 0;
        }
        prev_arg = ang;

        // Newton acceleration once contraction is visible
        if (k > 4 && delta < 1e-2) {
            Complex fp = it.deriv(w) - 1.0;
            if (std::abs(fp) > 1e-14) {
                Complex cand = w - (w1 - w) / fp;
                if (std::abs(cand) < 1.0) {
                    double fres = std::abs(it.eval(cand) - cand);
                    if (fres < 0.5 * delta) {
                        w = cand;
                        if (fres <= opts.tol) return classify_interior_root(it, cand, k);
                        continue;
                    }
                }
            }
        }
        w = w1;

        // stagnation guard: no decay over a long window means rotation-like dynamics
        if (k % 1000 == 0) {
            if (k >= 2000 && delta > 0.99 * delta_window && delta > 100.0 * opts.tol &&
                boundary_streak == 0 && std::abs(w) < 1.0 - 1e-6)
                break;
            delta_window = delta;
        }
    }
    throw NoConvergenceError("denjoy_wolff: iteration did not converge (rotation or parabolic case)",
                             k);
}

DWResult rotation_resolve(const SelfMap& m, double tol) {
    if (m.is_identity())
        throw IdentityMapError("rotation_resolve: the identity map has no Denjoy-Wolff point");
    DiskIterate it(m);

    static const double starts[] = {-0.64, -0.32, 0.0, 0.32, 0.64};
    std::vector<std::pair<Complex, double>> roots; // (location, |phi'|)
    for (double x : starts) {
        for (double y : starts) {
            Complex w(x, y);
            bool ok = false;
            for (int iter = 0; iter < 80; ++iter) {
                Complex f = it.eval(w) - w;
                if (std::abs(f) < 1e-13) {
                    ok = true;
                    break;
                }
                Complex fp = it.deriv(w) - 1.0;
                if (std::abs(fp) < 1e-16) break;
                Complex step = -f / fp;
                // damp: stay inside the closed disk and decrease |f|
                double s = 1.0;
                bool moved = false;
                for (int halving = 0; halving < 40; ++halving) {
                    Complex cand = w + s * step;
                    if (std::abs(cand) <= 1.0 - 1e-12) {
                        if (std::abs(it.eval(cand) - cand) < std::abs(f)) {
                            w = cand;
                            moved = true;
                            break;
                        }
                    }
                    s *= 0.5;
                }
                if (!moved) break;
            }
            if (!ok) continue;
            bool dup = false;
            for (auto& [r0, mu0] : roots)
                if (std::abs(r0 - w) < 1e-8) dup = true;
            if (!dup) roots.emplace_back(w, std::abs(it.deriv(w)));
        }
    }

    const std::pair<Complex, double>* interior = nullptr;
    const std::pair<Complex, double>* boundary = nullptr;
    for (const auto& rt : roots) {
        if (std::abs(rt.first) < 1.0 - kBoundaryDetect) {
            if (rt.second <= 1.0 + kRotationTol && (!interior || rt.second < interior->second))
                interior = &rt;
        } else if (rt.second <= 1.0 + 1e-6) {
            if (!boundary || rt.second < boundary->second) boundary = &rt;
        }
    }
    if (interior) {
        Complex w = interior->first;
        DWResult r;
        r.point = it.to_native(RSpherePoint(w));
        r.dw_case = (std::abs(interior->second - 1.0) <= kRotationTol) ? DWCase::interior_rotation
                                                                       : DWCase::interior_attracting;
        r.jc_derivative = interior->second;
        r.residual = std::abs(it.eval(w) - w);
        r.iterations = 0;
        (void)tol;
        return r;
    }
    if (boundary) {
        Complex p = boundary->first / std::abs(boundary->first);
        DWResult r;
        r.point = it.to_native(RSpherePoint(p));
        r.dw_case = DWCase::boundary_attracting;
        r.jc_derivative = std::min(boundary->second, 1.0);
        Complex near = p * (1.0 - 1e-9);
        r.residual = std::abs(it.eval(near) - near);
        r.iterations = 0;
        return r;
    }
    throw NoFixedPointError("rotation_resolve: Newton found no fixed point in the closed disk");
}

namespace {

// Slow parabolic boundary dynamics: Cesaro-averaged late iterates stabilize
// the argument of the Denjoy-Wolff point.
DWResult cesaro_fallback(const SelfMap& m, const DWOptions& opts) {
    DiskIterate it(m);
    constexpr int kWindow = 64;
    std::vector<Complex> window(kWindow, Complex(0.0, 0.0));
    Complex w = 0.0;
    long total = std::min<long>(opts.max_iter, 200000);
    for (long k = 0; k < total; ++k) {
        w = it.eval(w);
        window[k % kWindow] = w;
    }
    Complex avg = 0.0;
    for (const Complex& v : window) avg += v;
    avg /= double(kWindow);
    if (std::abs(avg) < 1e-12)
        throw NoFixedPointError("cesaro fallback: averaged iterates collapse to the origin");
    Complex p = avg / std::abs(avg);
    DWResult r;
    r.point = it.to_native(RSpherePoint(p));
    r.dw_case = DWCase::boundary_attracting;
    r.iterations = total;
    double spread = 0.0;
    for (const Complex& v : window) spread = std::max(spread, std::abs(v - avg));
    r.residual = spread;
    try {
        r.jc_derivative = jc_derivative(m, r.point);
    } catch (const Error&) {
        r.jc_derivative = std::nullopt;
    }
    return r;
}

} // namespace

DWResult compute_denjoy_wolff(const SelfMap& m, const DWOptions& opts) {
    try {
        return denjoy_wolff(m, opts);
    } catch (const NoConvergenceError&) {
    }
    try {
        return rotation_resolve(m, opts.tol);
    } catch (const NoFixedPointError&) {
    }
    return cesaro_fallback(m, opts);
}

double jc_derivative(const SelfMap& m, const RSpherePoint& boundary_point,
                     std::span<const double> radii) {
    if (const auto* nv = std::get_if<SelfMap::Nevanlinna>(&m.body())) {
        if (boundary_point.is_infinite() && nv->data->alpha >= 1.0)
            return 1.0 / nv->data->alpha;
    }
    DiskIterate it(m);
    RSpherePoint wp = it.to_disk(boundary_point);
    Complex p = wp.value();
    double r0 = std::abs(p);
    if (std::abs(r0 - 1.0) > 1e-6)
        throw DomainViolationError("jc_derivative: point is not on the boundary");
    p /= r0;

    static const double default_radii[] = {1.0 - 1e-1, 1.0 - 1e-2, 1.0 - 1e-3, 1.0 - 1e-4,
                                           1.0 - 1e-5, 1.0 - 1e-6, 1.0 - 1e-7};
    std::span<const double> rs = radii.empty() ? std::span<const double>(default_radii) : radii;

    std::vector<double> hs, qs;
    int high = 0;
    for (double r : rs) {
        double q = (1.0 - std::abs(it.eval(r * p))) / (1.0 - r);
        hs.push_back(1.0 - r);
        qs.push_back(q);
        high = (q > 1.0 + 1e-6) ? high + 1 : 0;
    }
    if (high >= 3)
        throw DivergentQuotientError(
            "jc_derivative: radial quotients persistently exceed one (not the Denjoy-Wolff point)");
    // extrapolate over the last three radii (smallest h)
    std::size_t n = hs.size();
    std::size_t take = std::min<std::size_t>(3, n);
    std::vector<double> h2(hs.end() - take, hs.end()), q2(qs.end() - take, qs.end());
    double est = extrapolate_to_zero(h2, q2);
    return std::max(0.0, est);
}

std::vector<Theorem1Row> theorem1_harness(const std::function<SelfMap(long)>& family,
                                          const SelfMap& limit, std::span<const long> ns,
                                          const DWOptions& opts) {
    DWResult lim = compute_denjoy_wolff(limit, opts);
    std::vector<Theorem1Row> rows;
    rows.reserve(ns.size());
    for (long n : ns) {
        SelfMap mn = family(n);
        DWResult r = compute_denjoy_wolff(mn, opts);
        Theorem1Row row;
        row.n = n;
        row.point = r.point;
        row.iterations = r.iterations;
        if (r.point.is_infinite() || lim.point.is_infinite())
            row.distance = sphere_distance(r.point, lim.point);
        else
            row.distance = std::abs(r.point.value() - lim.point.value());
        rows.push_back(row);
    }
    return rows;
}

CsvWriter theorem1_csv(const std::vector<Theorem1Row>& rows) {
    CsvWriter w;
    w.comment("schema = theorem1 v1");
    w.header({"n", "re_lambda", "im_lambda", "distance", "iterations"});
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        cells.push_back(std::to_string(r.n));
        if (r.point.is_infinite()) {
            cells.push_back("inf");
            cells.push_back("inf");
        } else {
            cells.push_back(format_double(r.point.value().real()));
            cells.push_back(format_double(r.point.value().imag()));
        }
        cells.push_back(format_double(r.distance));
        cells.push_back(std::to_string(r.iterations));
        w.row(cells);
    }
    return w;
}

} // namespace dw
