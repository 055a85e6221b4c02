#include "measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "numerics.hpp"

namespace dw {

namespace {

constexpr double kSupportTol = 1e-13;
constexpr int kMomentOrder = 44;

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

// ---------------------------------------------------------------------------
// Evaluation tables
// ---------------------------------------------------------------------------

namespace {

// dL = log(1 + q) and rem = dL - q for complex q. The remainder is computed
// by series for small |q| so that the per-cell Cauchy sums stay conditioned
// on steep thin cells (large density slope times small log difference).
void dlog_pair(Complex q, Complex& dL, Complex& rem) {
    if (std::abs(q) >= 0.1) {
        dL = std::log(1.0 + q);
        rem = dL - q;
        return;
    }
    Complex sum = 0.0, p = q * q;
    for (int k = 2; k <= 18; ++k) {
        sum += p / double(k) * ((k % 2) ? 1.0 : -1.0);
        p *= q;
    }
    rem = sum;
    dL = q + sum;
}

} // namespace

// Per-cell linear coefficients rho(t) = a_k + b_k t on [t_k, t_{k+1}] and
// density moments for the far-field expansion. Real supports only; circle
// measures keep the angle cells and complex moments.
struct MeasureRep::Tables {
    // real-line / positive-line
    std::vector<double> a, b;       // per cell
    std::vector<double> moments;    // density moments int t^j rho dt, j = 0..kMomentOrder
    std::vector<double> neg_moments; // int rho / t^j, j = 1..8 (positive-line only)
    double radius = 0.0;            // max |t| over density grid and finite atoms
    double switch_radius = 0.0;     // |w| beyond which the moment expansion is used

    // circle
    std::vector<Complex> cmoments;  // int e^{iks} rho ds + atom part, k = 1..kMomentOrder

    // ---- real-support sums over the density ----
    // per cell, with d = w - t, q = h/d1, dL = log(d0) - log(d1) = log1p(q)
    // and rem = dL - q:
    //   int (a + b t)/(w - t) dt   = h rho(t1)/d1 + (a + b w) rem
    //   int (a + b t)/(w - t)^2 dt = h rho(t0)/(d0 d1) - b rem
    // (algebraically identical to the textbook forms, but free of the
    // -bh vs (a + bw) dL cancellation that ruins steep edge cells)

    // int rho/(w - t) dt
    Complex cauchy(const std::vector<double>& t, Complex w) const {
        if (std::abs(w) >= switch_radius) return cauchy_far(w);
        std::size_t n = t.size();
        Complex sum = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double h = t[k + 1] - t[k];
            Complex d1 = w - t[k + 1];
            Complex dL, rem;
            dlog_pair(h / d1, dL, rem);
            double rho1 = a[k] + b[k] * t[k + 1];
            sum += h * rho1 / d1 + (a[k] + b[k] * w) * rem;
        }
        return sum;
    }

    // int rho/(w - t)^2 dt
    Complex recip2(const std::vector<double>& t, Complex w) const {
        if (std::abs(w) >= switch_radius) return recip2_far(w);
        std::size_t n = t.size();
        Complex sum = 0.0;
        Complex d0 = w - t[0];
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double h = t[k + 1] - t[k];
            Complex d1 = w - t[k + 1];
            Complex dL, rem;
            dlog_pair(h / d1, dL, rem);
            double rho0 = a[k] + b[k] * t[k];
            sum += h * rho0 / (d0 * d1) - b[k] * rem;
            d0 = d1;
        }
        return sum;
    }

    // no early exit on small terms: symmetric measures have vanishing odd
    // moments, so a single negligible term says nothing about the tail
    Complex cauchy_far(Complex w) const {
        Complex inv = 1.0 / w, pw = inv, sum = 0.0;
        for (double mj : moments) {
            sum += mj * pw;
            pw *= inv;
        }
        return sum;
    }

    Complex recip2_far(Complex w) const {
        Complex inv = 1.0 / w, pw = inv * inv, sum = 0.0;
        for (std::size_t j = 0; j < moments.size(); ++j) {
            sum += double(j + 1) * moments[j] * pw;
            pw *= inv;
        }
        return sum;
    }
};

namespace {

std::shared_ptr<const MeasureRep::Tables> build_tables(SupportKind support,
                                                       const std::vector<Atom>& atoms,
                                                       const std::vector<double>& grid,
                                                       const std::vector<double>& values) {
    auto tb = std::make_shared<MeasureRep::Tables>();
    double radius = 1.0;
    for (const Atom& at : atoms)
        if (at.location.is_finite()) radius = std::max(radius, std::abs(at.location.value()));

    if (!grid.empty() && support != SupportKind::circle) {
        std::size_t n = grid.size();
        tb->a.resize(n - 1);
        tb->b.resize(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double h = grid[k + 1] - grid[k];
            tb->b[k] = (values[k + 1] - values[k]) / h;
            tb->a[k] = values[k] - tb->b[k] * grid[k];
        }
        radius = std::max({radius, std::abs(grid.front()), std::abs(grid.back())});

        tb->moments.assign(kMomentOrder + 1, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double t0 = grid[k], t1 = grid[k + 1];
            double p0 = t0, p1 = t1; // t^{j+1}
            for (int j = 0; j <= kMomentOrder; ++j) {
                double q0 = p0 * t0, q1 = p1 * t1;
                tb->moments[j] += tb->a[k] * (p1 - p0) / (j + 1) + tb->b[k] * (q1 - q0) / (j + 2);
                p0 = q0;
                p1 = q1;
            }
        }

        if (support == SupportKind::positive_line && grid.front() > 0.0) {
            tb->neg_moments.assign(9, 0.0); // index j = 1..8
            for (std::size_t k = 0; k + 1 < n; ++k) {
                double t0 = grid[k], t1 = grid[k + 1];
                for (int j = 1; j <= 8; ++j) {
                    double term;
                    if (j == 1)
                        term = tb->a[k] * std::log(t1 / t0) + tb->b[k] * (t1 - t0);
                    else if (j == 2)
                        term = tb->a[k] * (1.0 / t0 - 1.0 / t1) + tb->b[k] * std::log(t1 / t0);
                    else
                        term = tb->a[k] * (std::pow(t1, 1 - j) - std::pow(t0, 1 - j)) / (1 - j) +
                               tb->b[k] * (std::pow(t1, 2 - j) - std::pow(t0, 2 - j)) / (2 - j);
                    tb->neg_moments[j] += term;
                }
            }
        }
    }

    if (support == SupportKind::circle) {
        tb->cmoments.assign(kMomentOrder + 1, Complex(0.0, 0.0)); // index k, entry 0 unused
        if (!grid.empty()) {
            std::size_t n = grid.size();
            for (std::size_t c = 0; c + 1 < n; ++c) {
                double s0 = grid[c], s1 = grid[c + 1];
                double beta = (values[c + 1] - values[c]) / (s1 - s0);
                double alpha = values[c] - beta * s0;
                for (int k = 1; k <= kMomentOrder; ++k) {
                    // antiderivative of (alpha + beta s) e^{iks}
                    Complex ik(0.0, double(k));
                    auto F = [&](double s) {
                        return std::exp(ik * s) * ((alpha + beta * s) / ik + beta / double(k) / double(k));
                    };
                    tb->cmoments[k] += F(s1) - F(s0);
                }
            }
        }
        for (const Atom& at : atoms) {
            Complex t = at.location.value();
            Complex p = t;
            for (int k = 1; k <= kMomentOrder; ++k) {
                tb->cmoments[k] += at.mass * p;
                p *= t;
            }
        }
    }

    tb->radius = radius;
    tb->switch_radius = 4.0 * std::max(1.0, radius);
    return tb;
}

} // namespace

// ---------------------------------------------------------------------------
// MeasureRep
// ---------------------------------------------------------------------------

MeasureRep::MeasureRep(SupportKind support, std::vector<Atom> atoms,
                       std::vector<double> grid, std::vector<double> values)
    : support_(support), atoms_(std::move(atoms)), grid_(std::move(grid)),
      values_(std::move(values)) {
    if (grid_.size() == 1 || grid_.size() != values_.size())
        throw DomainViolationError("MeasureRep: grid/values size mismatch");
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
        if (!(grid_[i] < grid_[i + 1]))
            throw DomainViolationError("MeasureRep: grid must be strictly increasing");
    for (double v : values_)
        if (!(v >= 0.0) || std::isnan(v) || std::isinf(v))
            throw DomainViolationError("MeasureRep: density values must be finite and nonnegative");

    if (!grid_.empty()) {
        switch (support_) {
            case SupportKind::real_line:
                break;
            case SupportKind::positive_line:
                if (grid_.front() < 0.0)
                    throw DomainViolationError("MeasureRep: positive-line grid must start at >= 0");
                break;
            case SupportKind::circle:
                if (grid_.front() < -M_PI - 1e-12 || grid_.back() > M_PI + 1e-12)
                    throw DomainViolationError("MeasureRep: circle grid must hold angles in [-pi, pi]");
                break;
        }
    }

    // drop zero-mass atoms, validate the rest
    std::vector<Atom> kept;
    for (const Atom& at : atoms_) {
        if (std::isnan(at.mass) || at.mass < 0.0)
            throw DomainViolationError("MeasureRep: atom mass must be nonnegative");
        if (at.mass == 0.0) continue;
        if (at.location.is_infinite()) {
            if (support_ != SupportKind::real_line)
                throw DomainViolationError("MeasureRep: infinity atom allowed only on the real line");
        } else {
            Complex loc = at.location.value();
            switch (support_) {
                case SupportKind::real_line:
                    if (loc.imag() != 0.0)
                        throw DomainViolationError("MeasureRep: real-line atom must be real");
                    break;
                case SupportKind::positive_line:
                    if (loc.imag() != 0.0 || loc.real() < 0.0)
                        throw DomainViolationError("MeasureRep: positive-line atom must lie in [0, inf)");
                    break;
                case SupportKind::circle:
                    if (!near(std::abs(loc), 1.0, 1e-12))
                        throw DomainViolationError("MeasureRep: circle atom must be unimodular");
                    break;
            }
        }
        kept.push_back(at);
    }
    atoms_ = std::move(kept);
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        for (std::size_t j = i + 1; j < atoms_.size(); ++j)
            if (atoms_[i].location == atoms_[j].location)
                throw DomainViolationError("MeasureRep: atom locations must be distinct");

    for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
        density_mass_ += 0.5 * (values_[k] + values_[k + 1]) * (grid_[k + 1] - grid_[k]);
    total_mass_ = density_mass_ + atom_mass();
    tables_ = build_tables(support_, atoms_, grid_, values_);
}

MeasureRep MeasureRep::with_declared_mass(SupportKind support, std::vector<Atom> atoms,
                                          std::vector<double> grid, std::vector<double> values,
                                          double total_mass) {
    MeasureRep m(support, std::move(atoms), std::move(grid), std::move(values));
    if (!near(m.total_mass_, total_mass, kMassTol * std::max(1.0, total_mass)))
        throw DomainViolationError("MeasureRep: declared total mass inconsistent with atoms + density");
    return m;
}

MeasureRep MeasureRep::point_mass(SupportKind support, RSpherePoint location, double mass) {
    return MeasureRep(support, {Atom{location, mass}});
}

MeasureRep MeasureRep::zero(SupportKind support) { return MeasureRep(support, {}); }

double MeasureRep::atom_mass() const {
    double s = 0.0;
    for (const Atom& at : atoms_) s += at.mass;
    return s;
}

double MeasureRep::infinity_mass() const {
    for (const Atom& at : atoms_)
        if (at.location.is_infinite()) return at.mass;
    return 0.0;
}

bool MeasureRep::is_probability(double tol) const { return near(total_mass_, 1.0, tol); }

bool MeasureRep::is_point_mass() const {
    return !has_density() && atoms_.size() == 1 && atoms_[0].location.is_finite();
}

double MeasureRep::distance_to_support(Complex z) const {
    double d = std::numeric_limits<double>::infinity();
    for (const Atom& at : atoms_)
        if (at.location.is_finite()) d = std::min(d, std::abs(z - at.location.value()));
    if (has_density()) {
        if (support_ == SupportKind::circle) {
            double ang = std::arg(z);
            double lo = grid_.front(), hi = grid_.back();
            double best;
            if (ang >= lo && ang <= hi) {
                best = std::abs(std::abs(z) - 1.0);
            } else {
                Complex e0 = std::polar(1.0, lo), e1 = std::polar(1.0, hi);
                best = std::min(std::abs(z - e0), std::abs(z - e1));
            }
            d = std::min(d, best);
        } else {
            double x = z.real(), y = z.imag();
            double cx = std::clamp(x, grid_.front(), grid_.back());
            d = std::min(d, std::hypot(x - cx, y));
        }
    }
    return d;
}

MeasureRep MeasureRep::rescaled_to_probability() const {
    if (total_mass_ <= 0.0)
        throw DomainViolationError("rescaled_to_probability: zero measure");
    std::vector<Atom> at = atoms_;
    std::vector<double> vals = values_;
    for (Atom& a : at) a.mass /= total_mass_;
    for (double& v : vals) v /= total_mass_;
    return MeasureRep(support_, std::move(at), grid_, std::move(vals));
}

Complex MeasureRep::moment(int k) const {
    if (k < 0 || k > kMomentOrder)
        throw DomainViolationError("moment: order out of range");
    if (support_ == SupportKind::circle) {
        if (k == 0) return Complex(total_mass_, 0.0);
        return tables().cmoments[k];
    }
    double s = (k == 0) ? density_mass_ : (has_density() ? tables().moments[k] : 0.0);
    for (const Atom& at : atoms_)
        if (at.location.is_finite()) s += at.mass * std::pow(at.location.value().real(), k);
    return Complex(s, 0.0);
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

namespace {

// kernel value at a single support point (finite location)
Complex kernel_at(Kernel k, Complex t, Complex z) {
    switch (k) {
        case Kernel::nevanlinna:
            return (1.0 + t * z) / (t - z);
        case Kernel::cauchy:
            return 1.0 / (z - t);
        case Kernel::eta_psi:
            return t * z / (1.0 - t * z);
        case Kernel::class_f:
            return (1.0 + t * t) / (t * (t - z));
        case Kernel::imag_identity: {
            double y = z.imag();
            return (1.0 + t * t) / (t * t + y * y);
        }
    }
    return 0.0;
}

// kernel limit as t -> infinity (real-line supports)
Complex kernel_at_infinity(Kernel k, Complex z) {
    switch (k) {
        case Kernel::nevanlinna:
            return z;
        case Kernel::cauchy:
            return 0.0;
        case Kernel::eta_psi:
            return -1.0;
        case Kernel::class_f:
            return 1.0;
        case Kernel::imag_identity:
            return 1.0;
    }
    return 0.0;
}

Complex kernel_derivative_at(Kernel k, Complex t, Complex z) {
    switch (k) {
        case Kernel::nevanlinna: {
            Complex d = t - z;
            return (1.0 + t * t) / (d * d);
        }
        case Kernel::cauchy: {
            Complex d = z - t;
            return -1.0 / (d * d);
        }
        case Kernel::eta_psi: {
            Complex d = 1.0 - t * z;
            return t / (d * d);
        }
        case Kernel::class_f: {
            Complex d = t - z;
            return (1.0 + t * t) / (t * d * d);
        }
        case Kernel::imag_identity:
            throw DomainViolationError("integrate_kernel_derivative: imag-identity kernel");
    }
    return 0.0;
}

void check_kernel_supported(const MeasureRep& m, Kernel k) {
    switch (m.support()) {
        case SupportKind::real_line:
            if (k == Kernel::class_f)
                throw DomainViolationError("integrate_kernel: class-f kernel needs a positive-line measure");
            break;
        case SupportKind::positive_line:
            if (k == Kernel::nevanlinna || k == Kernel::imag_identity) return; // still well defined
            break;
        case SupportKind::circle:
            if (k != Kernel::eta_psi)
                throw DomainViolationError("integrate_kernel: only the eta-psi kernel applies on the circle");
            break;
    }
}

// singularity locations of the kernel in the t variable
void check_singularity(const MeasureRep& m, Kernel k, Complex z) {
    double tol = kSupportTol * std::max(1.0, std::abs(z));
    switch (k) {
        case Kernel::nevanlinna:
        case Kernel::cauchy:
        case Kernel::class_f:
            if (m.distance_to_support(z) <= tol)
                throw PointOnSupportError("integrate_kernel: evaluation point touches the support");
            break;
        case Kernel::eta_psi: {
            if (z == Complex(0.0, 0.0)) return; // kernel vanishes identically
            Complex w = 1.0 / z;
            if (m.distance_to_support(w) <= kSupportTol * std::max(1.0, std::abs(w)))
                throw PointOnSupportError("integrate_kernel: kernel pole 1/z touches the support");
            break;
        }
        case Kernel::imag_identity: {
            double y = z.imag();
            if (m.distance_to_support(Complex(0.0, y)) <= kSupportTol)
                throw PointOnSupportError("integrate_kernel: kernel poles +-iy touch the support");
            break;
        }
    }
}

// psi over a circle density by adaptive panels; `deriv` selects t/(1-tz)^2
Complex circle_density_integral(const MeasureRep& m, Complex z, bool deriv) {
    if (!m.has_density()) return 0.0;
    const auto& s = m.grid();
    const auto& v = m.values();
    // pole of the kernel at e^{is} = 1/z: angular position -arg z, radial offset log(1/|z|)
    double pole_ang = -std::arg(z);
    double pole_off = std::abs(std::log(std::abs(z)));
    auto pole_distance = [&](double a0, double b0) {
        double best = std::numeric_limits<double>::infinity();
        for (int shift = -1; shift <= 1; ++shift) {
            double p = pole_ang + 2.0 * M_PI * shift;
            double dx = (p < a0) ? a0 - p : (p > b0 ? p - b0 : 0.0);
            best = std::min(best, std::hypot(dx, pole_off));
        }
        return best;
    };
    Complex total = 0.0;
    for (std::size_t c = 0; c + 1 < s.size(); ++c) {
        double s0 = s[c], s1 = s[c + 1];
        double beta = (v[c + 1] - v[c]) / (s1 - s0);
        double alpha = v[c] - beta * s0;
        auto f = [&](double ang) {
            Complex t = std::polar(1.0, ang);
            Complex den = 1.0 - t * z;
            Complex kv = deriv ? t / (den * den) : t * z / den;
            return (alpha + beta * ang) * kv;
        };
        total += integrate_adaptive(f, s0, s1, pole_distance);
    }
    return total;
}

// small-|z| power series of psi over the full measure: sum_k M_k z^k
Complex psi_series(const MeasureRep& m, Complex z, bool deriv) {
    Complex sum = 0.0, p = deriv ? Complex(1.0, 0.0) : z;
    for (int k = 1; k <= kMomentOrder; ++k) {
        Complex mk = m.moment(k);
        sum += deriv ? double(k) * mk * p : mk * p;
        p *= z;
    }
    return sum;
}

} // namespace

Complex integrate_kernel(const MeasureRep& m, Kernel k, Complex point) {
    check_kernel_supported(m, k);
    check_singularity(m, k, point);
    Complex z = point;

    Complex total = 0.0;
    for (const Atom& at : m.atoms()) {
        if (at.location.is_infinite())
            total += at.mass * kernel_at_infinity(k, z);
        else
            total += at.mass * kernel_at(k, at.location.value(), z);
    }
    if (!m.has_density()) return total;

    if (m.support() == SupportKind::circle) {
        // eta_psi only (checked above)
        return total + circle_density_integral(m, z, false);
    }

    const auto& tb = m.tables();
    const auto& grid = m.grid();
    double I0 = m.density_mass();
    switch (k) {
        case Kernel::cauchy:
            total += tb.cauchy(grid, z);
            break;
        case Kernel::nevanlinna:
            // (1+tz)/(t-z) = z + (1+z^2)/(t-z)
            total += z * I0 - (1.0 + z * z) * tb.cauchy(grid, z);
            break;
        case Kernel::eta_psi: {
            if (z == Complex(0.0, 0.0)) break;
            Complex w = 1.0 / z;
            if (std::abs(w) >= tb.switch_radius) {
                // stable small-z form, density part only: sum_k (int t^k rho) z^k
                Complex sum = 0.0, p = z;
                for (int j = 1; j <= kMomentOrder; ++j) {
                    sum += tb.moments[j] * p;
                    p *= z;
                }
                total += sum;
            } else {
                // t z/(1-t z) = -1 + (1/z) * 1/(w - t), w = 1/z
                total += -I0 + (1.0 / z) * tb.cauchy(grid, w);
            }
            break;
        }
        case Kernel::class_f: {
            if (tb.neg_moments.empty())
                throw DomainViolationError("integrate_kernel: class-f kernel needs a density grid bounded away from 0");
            double tmin = grid.front();
            if (std::abs(z) <= std::min(1e-6, 0.25 * tmin)) {
                // kernel = sum_j z^j (1+t^2)/t^{j+2}; needs int rho/t^j tables
                Complex sum = 0.0, p = 1.0;
                for (int j = 0; j <= 6; ++j) {
                    double c = tb.neg_moments[j + 2] + ((j == 0) ? I0 : tb.neg_moments[j]);
                    sum += c * p;
                    p *= z;
                }
                total += sum;
            } else {
                // 1 - (1/z)/t + ((1+z^2)/z)/(t-z)
                total += I0 - tb.neg_moments[1] / z - ((1.0 + z * z) / z) * tb.cauchy(grid, z);
            }
            break;
        }
        case Kernel::imag_identity: {
            double y = z.imag();
            // 1 + (1-y^2)/(t^2+y^2); int rho/(t^2+y^2) = -Im C(iy)/y
            Complex ciy = tb.cauchy(grid, Complex(0.0, y));
            total += I0 + (1.0 - y * y) * (-ciy.imag() / y);
            break;
        }
    }
    return total;
}

Complex integrate_kernel_derivative(const MeasureRep& m, Kernel k, Complex point) {
    check_kernel_supported(m, k);
    check_singularity(m, k, point);
    Complex z = point;

    Complex total = 0.0;
    for (const Atom& at : m.atoms()) {
        if (at.location.is_infinite()) {
            if (k == Kernel::nevanlinna) total += at.mass; // d/dz of z
        } else {
            total += at.mass * kernel_derivative_at(k, at.location.value(), z);
        }
    }
    if (!m.has_density()) return total;

    if (m.support() == SupportKind::circle)
        return total + circle_density_integral(m, z, true);

    const auto& tb = m.tables();
    const auto& grid = m.grid();
    double I0 = m.density_mass();
    switch (k) {
        case Kernel::cauchy:
            total += -tb.recip2(grid, z);
            break;
        case Kernel::nevanlinna:
            // (1+t^2)/(t-z)^2 = 1 + 2z/(t-z) + (1+z^2)/(t-z)^2
            total += I0 - 2.0 * z * tb.cauchy(grid, z) + (1.0 + z * z) * tb.recip2(grid, z);
            break;
        case Kernel::eta_psi: {
            if (z == Complex(0.0, 0.0)) {
                total += tb.moments.size() > 1 ? tb.moments[1] : 0.0;
                break;
            }
            Complex w = 1.0 / z;
            if (std::abs(w) >= tb.switch_radius) {
                Complex sum = 0.0, p = 1.0;
                for (int j = 1; j <= kMomentOrder; ++j) {
                    sum += double(j) * tb.moments[j] * p;
                    p *= z;
                }
                total += sum;
            } else {
                // psi'(z) = (1/z^2) [ -C(w) + w R2(w) ], w = 1/z
                total += (w * w) * (-tb.cauchy(grid, w) + w * tb.recip2(grid, w));
            }
            break;
        }
        case Kernel::class_f: {
            if (tb.neg_moments.empty())
                throw DomainViolationError("integrate_kernel: class-f kernel needs a density grid bounded away from 0");
            double tmin = grid.front();
            if (std::abs(z) <= std::min(1e-6, 0.25 * tmin)) {
                Complex sum = 0.0, p = 1.0;
                for (int j = 1; j <= 6; ++j) {
                    double c = tb.neg_moments[j + 2] + tb.neg_moments[j];
                    sum += double(j) * c * p;
                    p *= z;
                }
                total += sum;
            } else {
                // (1+t^2)/(t(t-z)^2) = (1/z^2)/t + ((z^2-1)/z^2)/(t-z) + ((1+z^2)/z)/(t-z)^2
                total += tb.neg_moments[1] / (z * z) -
                         ((z * z - 1.0) / (z * z)) * tb.cauchy(grid, z) +
                         ((1.0 + z * z) / z) * tb.recip2(grid, z);
            }
            break;
        }
        case Kernel::imag_identity:
            throw DomainViolationError("integrate_kernel_derivative: imag-identity kernel");
    }
    return total;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

Complex cauchy_transform(const MeasureRep& m, Complex z) {
    if (m.support() == SupportKind::circle)
        throw DomainViolationError("cauchy_transform: real-type support required");
    if (!m.is_probability())
        throw NotProbabilityError("cauchy_transform: total mass must be 1 within 1e-10");
    return integrate_kernel(m, Kernel::cauchy, z);
}

Complex cauchy_transform_derivative(const MeasureRep& m, Complex z) {
    if (!m.is_probability())
        throw NotProbabilityError("cauchy_transform: total mass must be 1 within 1e-10");
    return integrate_kernel_derivative(m, Kernel::cauchy, z);
}

Complex psi_transform(const MeasureRep& m, Complex z) {
    if (m.support() == SupportKind::real_line)
        throw DomainViolationError("psi_transform: circle or positive-line support required");
    if (m.support() == SupportKind::circle) {
        if (std::abs(z) >= 1.0)
            throw DomainViolationError("psi_transform: point must lie inside the disk");
        if (std::abs(z) <= 0.2) return psi_series(m, z, false);
    }
    return integrate_kernel(m, Kernel::eta_psi, z);
}

Complex psi_transform_derivative(const MeasureRep& m, Complex z) {
    if (m.support() == SupportKind::real_line)
        throw DomainViolationError("psi_transform: circle or positive-line support required");
    if (m.support() == SupportKind::circle) {
        if (std::abs(z) >= 1.0)
            throw DomainViolationError("psi_transform: point must lie inside the disk");
        if (std::abs(z) <= 0.2) return psi_series(m, z, true);
    }
    return integrate_kernel_derivative(m, Kernel::eta_psi, z);
}

Complex eta_transform(const MeasureRep& m, Complex z) {
    Complex p = psi_transform(m, z);
    Complex den = 1.0 + p;
    if (std::abs(den) < 1e-13 * std::max(1.0, std::abs(p)))
        throw DegenerateTransformError("eta_transform: 1 + psi vanishes");
    return p / den;
}

namespace {

// leading Taylor coefficients of eta(lambda)/lambda from the measure moments
std::array<Complex, 4> eta_ratio_series_coeffs(const MeasureRep& m) {
    Complex m1 = m.moment(1), m2 = m.moment(2), m3 = m.moment(3), m4 = m.moment(4);
    Complex e1 = m1;
    Complex e2 = m2 - m1 * m1;
    Complex e3 = m3 - 2.0 * m1 * m2 + m1 * m1 * m1;
    Complex e4 = m4 - 2.0 * m1 * m3 - m2 * m2 + 3.0 * m1 * m1 * m2 - m1 * m1 * m1 * m1;
    return {e1, e2, e3, e4};
}

} // namespace

Complex eta_over_lambda(const MeasureRep& m, Complex lambda) {
    if (std::abs(lambda) < 1e-4) {
        auto [e1, e2, e3, e4] = eta_ratio_series_coeffs(m);
        return e1 + lambda * (e2 + lambda * (e3 + lambda * e4));
    }
    return eta_transform(m, lambda) / lambda;
}

Complex eta_over_lambda_derivative(const MeasureRep& m, Complex lambda) {
    if (std::abs(lambda) < 1e-4) {
        auto [e1, e2, e3, e4] = eta_ratio_series_coeffs(m);
        (void)e1;
        return e2 + lambda * (2.0 * e3 + lambda * 3.0 * e4);
    }
    Complex p = psi_transform(m, lambda);
    Complex pp = psi_transform_derivative(m, lambda);
    Complex den = 1.0 + p;
    if (std::abs(den) < 1e-13 * std::max(1.0, std::abs(p)))
        throw DegenerateTransformError("eta_over_lambda_derivative: 1 + psi vanishes");
    Complex eta = p / den;
    Complex etap = pp / (den * den);
    return (etap * lambda - eta) / (lambda * lambda);
}

// ---------------------------------------------------------------------------
// NevanlinnaData
// ---------------------------------------------------------------------------

NevanlinnaData::NevanlinnaData(double a, double b, MeasureRep s)
    : alpha(a), beta(b), sigma(std::move(s)) {
    if (alpha < 0.0) throw DomainViolationError("NevanlinnaData: alpha must be nonnegative");
    if (sigma.support() != SupportKind::real_line)
        throw DomainViolationError("NevanlinnaData: sigma must live on the real line");
    if (sigma.infinity_mass() != 0.0)
        throw DomainViolationError("NevanlinnaData: the infinity mass is carried by alpha");
}

bool NevanlinnaData::is_identity() const {
    return alpha == 1.0 && beta == 0.0 && sigma.total_mass() == 0.0;
}

Complex NevanlinnaData::psi(Complex z) const {
    return alpha * z + beta + integrate_kernel(sigma, Kernel::nevanlinna, z);
}

Complex NevanlinnaData::psi_derivative(Complex z) const {
    return alpha + integrate_kernel_derivative(sigma, Kernel::nevanlinna, z);
}

// ---------------------------------------------------------------------------
// ClassFData
// ---------------------------------------------------------------------------

ClassFData::ClassFData(double beta, MeasureRep sigma, bool allow_degenerate) {
    if (beta < 0.0) throw DomainViolationError("ClassFData: beta must be nonnegative");
    if (sigma.support() != SupportKind::positive_line)
        throw DomainViolationError("ClassFData: sigma must live on [0, +inf)");
    if (sigma.is_zero()) {
        if (!allow_degenerate)
            throw DomainViolationError("ClassFData: sigma must be nonzero");
    } else {
        for (const Atom& at : sigma.atoms())
            if (at.location.value().real() <= 0.0)
                throw DomainViolationError("ClassFData: sigma atoms must lie in (0, +inf)");
        if (sigma.has_density() && sigma.grid().front() <= 0.0)
            throw DomainViolationError("ClassFData: sigma density grid must start above 0");
    }
    beta_ = beta;
    sigma_ = std::move(sigma);
}

ClassFData ClassFData::constant(double beta) {
    return ClassFData(beta, MeasureRep::zero(SupportKind::positive_line), true);
}

ClassFData ClassFData::from_measure(const MeasureRep& mu) {
    if (mu.support() != SupportKind::positive_line)
        throw DomainViolationError("ClassFData: measure must live on [0, +inf)");
    if (!mu.is_probability())
        throw NotProbabilityError("ClassFData::from_measure: probability measure required");
    ClassFData d;
    d.mu_ = mu;
    double m0 = 0.0;
    for (const Atom& at : mu.atoms())
        if (at.location.is_finite() && at.location.value() == Complex(0.0, 0.0)) m0 = at.mass;
    if (m0 > 0.0) {
        d.beta_ = 0.0;
    } else {
        // beta = lim f(x) as x -> -inf; Richardson over two deep samples,
        // f(x) = beta + c/x + O(1/x^2)
        double x1 = -1e7, x2 = -1e9;
        double f1 = (eta_transform(mu, x1) / x1).real();
        double f2 = (eta_transform(mu, x2) / x2).real();
        double h1 = -1.0 / x1, h2 = -1.0 / x2;
        d.beta_ = std::max(0.0, (f2 * h1 - f1 * h2) / (h1 - h2));
    }
    return d;
}

bool ClassFData::is_constant() const { return sigma_ && sigma_->is_zero(); }

ClassFData ClassFData::fit_atomic(const MeasureRep& mu) {
    if (mu.support() != SupportKind::positive_line || mu.has_density())
        throw DomainViolationError("fit_atomic: purely atomic positive-line measure required");
    if (!mu.is_probability())
        throw NotProbabilityError("fit_atomic: probability measure required");

    double m0 = 0.0;
    std::vector<std::pair<double, double>> pos; // (location, mass), nonzero locations
    for (const Atom& at : mu.atoms()) {
        double a = at.location.value().real();
        if (a == 0.0)
            m0 = at.mass;
        else
            pos.emplace_back(a, at.mass);
    }
    if (pos.empty())
        throw DomainViolationError("fit_atomic: measure must charge (0, +inf)");
    std::sort(pos.begin(), pos.end());

    double beta;
    if (m0 > 0.0) {
        beta = 0.0;
    } else {
        double s = 0.0;
        for (auto& [a, m] : pos) s += m / a;
        beta = 1.0 / s;
    }
    if (pos.size() == 1 && m0 == 0.0)
        return ClassFData::constant(pos[0].first); // a single point mass: f == a

    // f = N/D with N(z) = sum m_i a_i/(1-a_i z), D(z) = m0 + sum m_i/(1-a_i z);
    // sigma atoms sit at the zeros of D, one per gap between consecutive
    // reciprocals 1/a_i (descending), plus one beyond 1/a_min when m0 > 0.
    auto D = [&](double z) {
        double s = m0;
        for (auto& [a, m] : pos) s += m / (1.0 - a * z);
        return s;
    };
    auto Dp = [&](double z) {
        double s = 0.0;
        for (auto& [a, m] : pos) {
            double d = 1.0 - a * z;
            s += m * a / (d * d);
        }
        return s;
    };
    auto N = [&](double z) {
        double s = 0.0;
        for (auto& [a, m] : pos) s += m * a / (1.0 - a * z);
        return s;
    };

    std::vector<double> recip; // descending
    for (auto it = pos.begin(); it != pos.end(); ++it) recip.push_back(1.0 / it->first);
    std::sort(recip.begin(), recip.end(), std::greater<>());

    std::vector<Atom> sig_atoms;
    auto add_root = [&](double lo, double hi) {
        // D increases from -inf to +inf (or to m0 > 0) on (lo, hi): bisection then Newton
        double a0 = lo, b0 = hi;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a0 + b0);
            (D(mid) < 0.0 ? a0 : b0) = mid;
        }
        double root = 0.5 * (a0 + b0);
        for (int it = 0; it < 4; ++it) root -= D(root) / Dp(root);
        double mass = -N(root) * root / (Dp(root) * (1.0 + root * root));
        if (mass > 0.0) sig_atoms.push_back(Atom{RSpherePoint(root), mass});
    };
    for (std::size_t i = 0; i + 1 < recip.size(); ++i) {
        double hi = recip[i], lo = recip[i + 1];
        double pad = 1e-12 * (hi - lo);
        add_root(lo + pad, hi - pad);
    }
    if (m0 > 0.0) {
        double lo = recip.front() * (1.0 + 1e-12);
        double hi = recip.front();
        // expand until D(hi) > 0
        for (int it = 0; it < 200; ++it) {
            hi = hi * 2.0 + 1.0;
            if (D(hi) > 0.0) break;
        }
        add_root(lo, hi);
    }
    return ClassFData(beta, MeasureRep(SupportKind::positive_line, std::move(sig_atoms)));
}

Complex ClassFData::f(Complex lambda) const {
    if (mu_) return eta_over_lambda(*mu_, lambda);
    if (sigma_->is_zero()) return Complex(beta_, 0.0);
    return beta_ + integrate_kernel(*sigma_, Kernel::class_f, lambda);
}

Complex ClassFData::f_derivative(Complex lambda) const {
    if (mu_) return eta_over_lambda_derivative(*mu_, lambda);
    if (sigma_->is_zero()) return Complex(0.0, 0.0);
    return integrate_kernel_derivative(*sigma_, Kernel::class_f, lambda);
}

RSpherePoint ClassFData::eta_limit_neg_infinity() const {
    if (mu_) {
        double m0 = 0.0;
        for (const Atom& at : mu_->atoms())
            if (at.location.is_finite() && at.location.value() == Complex(0.0, 0.0)) m0 = at.mass;
        if (m0 > 0.0) return RSpherePoint(1.0 - 1.0 / m0);
        return RSpherePoint::infinity();
    }
    if (beta_ > 0.0) return RSpherePoint::infinity();
    if (sigma_->is_zero()) return RSpherePoint(0.0);
    // gamma = -int (1+t^2)/t dsigma = -(int 1/t dsigma + int t dsigma)
    double over_t = 0.0;
    if (sigma_->has_density()) over_t += sigma_->tables().neg_moments[1];
    for (const Atom& at : sigma_->atoms())
        over_t += at.mass / at.location.value().real();
    double first = sigma_->moment(1).real();
    return RSpherePoint(-(over_t + first));
}

Complex f_ratio(const ClassFData& d, Complex lambda) { return d.f(lambda); }

} // namespace dw
