#include "freeconv.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "measure_spec.hpp"
#include "numerics.hpp"

namespace dw {

namespace {

const std::vector<double> kDefaultEps = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
constexpr double kAtomCutoff = 1e-6;

std::span<const double> eps_or_default(std::span<const double> eps) {
    return eps.empty() ? std::span<const double>(kDefaultEps) : eps;
}

double piecewise_linear_at(const MeasureRep& m, double x) {
    const auto& g = m.grid();
    const auto& v = m.values();
    if (g.empty() || x <= g.front() || x >= g.back()) {
        // exact endpoints still count
        if (!g.empty() && (x == g.front() || x == g.back()))
            return v[x == g.front() ? 0 : v.size() - 1];
        return 0.0;
    }
    auto it = std::upper_bound(g.begin(), g.end(), x);
    std::size_t k = std::size_t(it - g.begin()) - 1;
    double t = (x - g[k]) / (g[k + 1] - g[k]);
    return v[k] + t * (v[k + 1] - v[k]);
}

void require_probability(const MeasureRep& m, const char* who) {
    if (!m.is_probability()) throw NotProbabilityError(std::string(who) + ": probability measure required");
}

} // namespace

double SpectralOutput::total_mass() const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < x_grid.size(); ++k)
        s += 0.5 * (density[k] + density[k + 1]) * (x_grid[k + 1] - x_grid[k]);
    for (const auto& a : atoms) s += a.mass;
    return s;
}

std::span<const double> default_eps_schedule() { return kDefaultEps; }

double stieltjes_invert(const std::function<Complex(Complex)>& G, double x,
                        std::span<const double> eps_schedule, double* defect) {
    auto eps = eps_or_default(eps_schedule);
    if (eps.size() < 2) throw DomainViolationError("stieltjes_invert: schedule needs >= 2 epsilons");
    for (std::size_t i = 0; i + 1 < eps.size(); ++i)
        if (!(eps[i] > eps[i + 1]) || !(eps[i + 1] >= 1e-9))
            throw DomainViolationError("stieltjes_invert: schedule must decrease and stay >= 1e-9");

    std::vector<double> hs, vs;
    for (double e : eps) {
        hs.push_back(e);
        vs.push_back(-G(Complex(x, e)).imag() / M_PI);
    }
    std::size_t take = std::min<std::size_t>(3, hs.size());
    std::vector<double> h3(hs.end() - take, hs.end()), v3(vs.end() - take, vs.end());
    double d = 0.0;
    double val = extrapolate_to_zero(h3, v3, &d);
    if (defect) *defect = d;
    double raw = vs.back();
    // a genuine density converges: the extrapolant stays near the finest
    // sample. Atoms blow up like 1/eps and sqrt edges bend hard; both leave
    // the extrapolant far from the raw value.
    if (std::abs(val - raw) > 0.3 * std::abs(raw) + 1e-3)
        throw ExtrapolationError("stieltjes_invert: extrapolation diverged (atom or support edge)");
    return val;
}

std::vector<SpectralAtom> detect_atoms(const std::function<Complex(Complex)>& G,
                                       std::span<const double> candidates,
                                       std::span<const double> eps_schedule) {
    auto eps = eps_or_default(eps_schedule);
    std::vector<SpectralAtom> out;
    for (double a : candidates) {
        // eps * (-Im G(a + i eps)) = mass + pi rho(a) eps + O(eps^2)
        std::vector<double> hs, vs;
        for (double e : eps) {
            hs.push_back(e);
            vs.push_back(e * (-G(Complex(a, e)).imag()));
        }
        std::size_t take = std::min<std::size_t>(3, hs.size());
        std::vector<double> h3(hs.end() - take, hs.end()), v3(vs.end() - take, vs.end());
        double mass = extrapolate_to_zero(h3, v3);
        if (mass >= kAtomCutoff) out.push_back(SpectralAtom{a, std::min(mass, 1.0)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Additive convolution
// ---------------------------------------------------------------------------

namespace {

MeasureRep translate_measure(const MeasureRep& m, double c) {
    std::vector<Atom> atoms;
    for (const Atom& a : m.atoms()) {
        if (a.location.is_infinite())
            atoms.push_back(a);
        else
            atoms.push_back(Atom{RSpherePoint(a.location.value() + c), a.mass});
    }
    std::vector<double> grid = m.grid();
    for (double& g : grid) g += c;
    return MeasureRep(SupportKind::real_line, std::move(atoms), std::move(grid), m.values());
}

SpectralOutput sample_measure(const MeasureRep& m, std::span<const double> x_grid,
                              std::span<const double> eps) {
    SpectralOutput out;
    out.x_grid.assign(x_grid.begin(), x_grid.end());
    out.eps_schedule.assign(eps.begin(), eps.end());
    for (double x : x_grid) {
        out.density.push_back(piecewise_linear_at(m, x));
        out.defect.push_back(0.0);
    }
    for (const Atom& a : m.atoms())
        if (a.location.is_finite())
            out.atoms.push_back(SpectralAtom{a.location.value().real(), a.mass});
    out.mass_defect = std::abs(out.total_mass() - 1.0);
    return out;
}

std::vector<double> atom_pair_candidates(const MeasureRep& mu1, const MeasureRep& mu2,
                                         bool multiplicative) {
    std::vector<double> cands;
    for (const Atom& a : mu1.atoms())
        for (const Atom& b : mu2.atoms()) {
            if (a.location.is_infinite() || b.location.is_infinite()) continue;
            double v = multiplicative ? a.location.value().real() * b.location.value().real()
                                      : a.location.value().real() + b.location.value().real();
            cands.push_back(v);
        }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-9; }),
                cands.end());
    return cands;
}

void finalize_output(SpectralOutput& out) {
    for (std::size_t i = 0; i < out.density.size(); ++i) {
        if (out.density[i] < 0.0) {
            out.defect[i] += -out.density[i]; // clamp defect recorded, never hidden
            out.density[i] = 0.0;
        }
    }
    out.mass_defect = std::abs(out.total_mass() - 1.0);
}

} // namespace

SpectralOutput free_additive_convolve(const MeasureRep& mu1, const MeasureRep& mu2,
                                      std::span<const double> x_grid,
                                      std::span<const double> eps_schedule) {
    require_probability(mu1, "free_additive_convolve");
    require_probability(mu2, "free_additive_convolve");
    if (mu1.support() == SupportKind::circle || mu2.support() == SupportKind::circle)
        throw DomainViolationError("free_additive_convolve: real-line measures required");
    auto eps = eps_or_default(eps_schedule);

    // point-mass inputs act by exact translation
    if (mu1.is_point_mass() || mu2.is_point_mass()) {
        const MeasureRep& delta = mu1.is_point_mass() ? mu1 : mu2;
        const MeasureRep& other = mu1.is_point_mass() ? mu2 : mu1;
        double c = delta.atoms()[0].location.value().real();
        return sample_measure(translate_measure(other, c), x_grid, eps);
    }

    SelfMap psi1 = SelfMap::f_shift(mu1);
    SelfMap psi2 = SelfMap::f_shift(mu2);
    check_growth_condition(psi1);
    check_growth_condition(psi2);

    SpectralOutput out;
    out.x_grid.assign(x_grid.begin(), x_grid.end());
    out.eps_schedule.assign(eps.begin(), eps.end());
    SubordinationOptions sopts;

    // atoms first: the continuous part is inverted with them subtracted
    auto cands = atom_pair_candidates(mu1, mu2, /*multiplicative=*/false);
    if (!cands.empty()) {
        OmegaState astate;
        auto G = [&](Complex z) {
            Complex omega2;
            Complex omega1 = omega_halfplane_point(psi1, psi2, z, &omega2, astate, sopts);
            return 1.0 / (omega1 + omega2 - z);
        };
        out.atoms = detect_atoms(G, cands, eps);
    }

    OmegaState state;
    auto G_cont = [&](Complex z) {
        Complex omega2;
        Complex omega1 = omega_halfplane_point(psi1, psi2, z, &omega2, state, sopts);
        Complex g = 1.0 / (omega1 + omega2 - z);
        for (const auto& at : out.atoms) g -= at.mass / (z - at.location);
        return g;
    };
    for (double x : x_grid) {
        double d = 0.0, val = 0.0;
        try {
            val = stieltjes_invert(G_cont, x, eps, &d);
        } catch (const Error&) {
            // keep the raw finest-eps value, flag the point
            try {
                val = -G_cont(Complex(x, eps.back())).imag() / M_PI;
            } catch (const Error&) {
                val = 0.0;
            }
            d = std::numeric_limits<double>::infinity();
        }
        out.density.push_back(val);
        out.defect.push_back(d);
    }
    finalize_output(out);
    return out;
}

std::pair<double, double> suggest_additive_support(const MeasureRep& mu1, const MeasureRep& mu2) {
    auto stats = [](const MeasureRep& m) {
        double mean = m.moment(1).real();
        double var = m.moment(2).real() - mean * mean;
        return std::pair<double, double>(mean, std::max(var, 0.0));
    };
    auto [m1, v1] = stats(mu1);
    auto [m2, v2] = stats(mu2);
    double mean = m1 + m2, sd = std::sqrt(v1 + v2);
    return {mean - 4.0 * sd, mean + 4.0 * sd};
}

// ---------------------------------------------------------------------------
// Multiplicative convolution on the circle
// ---------------------------------------------------------------------------

namespace {

bool is_haar_like(const MeasureRep& m) {
    for (int k = 1; k <= 8; ++k)
        if (std::abs(m.moment(k)) > 1e-12) return false;
    return true;
}

MeasureRep haar_measure() {
    std::vector<double> grid = {-M_PI, M_PI};
    std::vector<double> vals = {1.0 / (2.0 * M_PI), 1.0 / (2.0 * M_PI)};
    return MeasureRep(SupportKind::circle, {}, std::move(grid), std::move(vals));
}

MeasureRep rotate_circle_measure(const MeasureRep& m, Complex u) {
    // pushforward under t -> u t
    std::vector<Atom> atoms;
    for (const Atom& a : m.atoms()) atoms.push_back(Atom{RSpherePoint(u * a.location.value()), a.mass});
    if (!m.has_density()) return MeasureRep(SupportKind::circle, std::move(atoms));
    // shift the angle grid and re-wrap into [-pi, pi]
    double shift = std::arg(u);
    std::vector<std::pair<double, double>> pts;
    const auto& g = m.grid();
    const auto& v = m.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        double a = std::remainder(g[i] + shift, 2.0 * M_PI);
        pts.emplace_back(a, v[i]);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> grid, vals;
    for (auto& [a, val] : pts) {
        if (!grid.empty() && a <= grid.back()) continue; // drop seam duplicates
        grid.push_back(a);
        vals.push_back(val);
    }
    MeasureRep rotated(SupportKind::circle, std::move(atoms), std::move(grid), std::move(vals));
    // the wrap can split one cell at the seam; rescale the tiny defect
    if (std::abs(rotated.total_mass() - m.total_mass()) > 1e-9)
        return rotated.rescaled_to_probability();
    return rotated;
}

SpectralOutput angular_output_from_measure(const MeasureRep& m, std::span<const double> angle_grid,
                                           std::span<const double> eps) {
    SpectralOutput out;
    out.x_grid.assign(angle_grid.begin(), angle_grid.end());
    out.eps_schedule.assign(eps.begin(), eps.end());
    for (double a : angle_grid) {
        out.density.push_back(piecewise_linear_at(m, a));
        out.defect.push_back(0.0);
    }
    for (const Atom& a : m.atoms())
        out.atoms.push_back(SpectralAtom{std::arg(a.location.value()), a.mass});
    out.mass_defect = std::abs(out.total_mass() - 1.0);
    return out;
}

} // namespace

CircleConvolveOutput free_mult_convolve_circle(const MeasureRep& mu1, const MeasureRep& mu2,
                                               std::span<const Complex> z_grid,
                                               std::span<const double> angle_grid,
                                               std::span<const double> eps_schedule) {
    require_probability(mu1, "free_mult_convolve_circle");
    require_probability(mu2, "free_mult_convolve_circle");
    if (mu1.support() != SupportKind::circle || mu2.support() != SupportKind::circle)
        throw DomainViolationError("free_mult_convolve_circle: circle measures required");
    auto eps = eps_or_default(eps_schedule);

    CircleConvolveOutput out;
    out.z_grid.assign(z_grid.begin(), z_grid.end());

    // Haar absorbs: eta == 0 identically
    if (is_haar_like(mu1) || is_haar_like(mu2)) {
        out.eta.assign(out.z_grid.size(), Complex(0.0));
        out.angular = angular_output_from_measure(haar_measure(), angle_grid, eps);
        return out;
    }
    if (std::abs(mu1.moment(1)) <= 1e-12 || std::abs(mu2.moment(1)) <= 1e-12)
        throw ZeroMeanError("free_mult_convolve_circle: zero-mean input degenerates phi = eta/lambda");

    // point mass rotates the other factor exactly
    if (mu1.is_point_mass() || mu2.is_point_mass()) {
        const MeasureRep& delta = mu1.is_point_mass() ? mu1 : mu2;
        const MeasureRep& other = mu1.is_point_mass() ? mu2 : mu1;
        Complex u = delta.atoms()[0].location.value();
        MeasureRep rotated = rotate_circle_measure(other, u);
        for (Complex z : out.z_grid) out.eta.push_back(eta_over_lambda(rotated, z) * z);
        out.angular = angular_output_from_measure(rotated, angle_grid, eps);
        return out;
    }

    SelfMap phi1 = SelfMap::eta_ratio_circle(mu1);
    SelfMap phi2 = SelfMap::eta_ratio_circle(mu2);
    SubordinationOptions sopts;

    OmegaState zstate;
    for (Complex z : out.z_grid) {
        Complex omega2;
        Complex omega1 = omega_circle_point(phi1, phi2, z, &omega2, zstate, sopts);
        out.eta.push_back(omega1 * phi1.evaluate(RSpherePoint(omega1)).value());
    }

    SpectralOutput ang;
    ang.x_grid.assign(angle_grid.begin(), angle_grid.end());
    ang.eps_schedule.assign(eps.begin(), eps.end());
    for (double th : angle_grid) {
        OmegaState state;
        std::vector<double> hs, vs;
        for (double e : eps) {
            Complex z = (1.0 - e) * std::exp(Complex(0.0, -th));
            Complex omega2;
            Complex omega1 = omega_circle_point(phi1, phi2, z, &omega2, state, sopts);
            Complex eta = omega1 * phi1.evaluate(RSpherePoint(omega1)).value();
            Complex psi = eta / (1.0 - eta);
            hs.push_back(e);
            vs.push_back((1.0 + 2.0 * psi.real()) / (2.0 * M_PI));
        }
        std::size_t take = std::min<std::size_t>(3, hs.size());
        std::vector<double> h3(hs.end() - take, hs.end()), v3(vs.end() - take, vs.end());
        double d = 0.0;
        double val = extrapolate_to_zero(h3, v3, &d);
        ang.density.push_back(val);
        ang.defect.push_back(d);
    }

    // atom candidates: products of input atoms, located at summed angles
    std::vector<double> cand_angles;
    for (const Atom& a : mu1.atoms())
        for (const Atom& b : mu2.atoms())
            cand_angles.push_back(std::remainder(std::arg(a.location.value()) + std::arg(b.location.value()), 2.0 * M_PI));
    std::sort(cand_angles.begin(), cand_angles.end());
    cand_angles.erase(std::unique(cand_angles.begin(), cand_angles.end(),
                                  [](double x, double y) { return std::abs(x - y) < 1e-9; }),
                      cand_angles.end());
    for (double a : cand_angles) {
        OmegaState state;
        std::vector<double> hs, vs;
        for (double e : eps) {
            Complex z = (1.0 - e) * std::exp(Complex(0.0, -a));
            Complex omega2;
            Complex omega1 = omega_circle_point(phi1, phi2, z, &omega2, state, sopts);
            Complex eta = omega1 * phi1.evaluate(RSpherePoint(omega1)).value();
            Complex psi = eta / (1.0 - eta);
            double poisson = 1.0 + 2.0 * psi.real();
            double r = 1.0 - e;
            hs.push_back(e);
            vs.push_back(poisson * (1.0 - r) / (1.0 + r));
        }
        std::size_t take = std::min<std::size_t>(3, hs.size());
        std::vector<double> h3(hs.end() - take, hs.end()), v3(vs.end() - take, vs.end());
        double mass = extrapolate_to_zero(h3, v3);
        if (mass >= kAtomCutoff) ang.atoms.push_back(SpectralAtom{a, std::min(mass, 1.0)});
    }
    finalize_output(ang);
    out.angular = std::move(ang);
    return out;
}

// ---------------------------------------------------------------------------
// Multiplicative convolution on the positive line
// ---------------------------------------------------------------------------

namespace {

MeasureRep dilate_positive_measure(const MeasureRep& m, double c) {
    // pushforward under t -> c t, c > 0
    std::vector<Atom> atoms;
    for (const Atom& a : m.atoms())
        atoms.push_back(Atom{RSpherePoint(a.location.value() * c), a.mass});
    std::vector<double> grid = m.grid();
    std::vector<double> vals = m.values();
    for (double& g : grid) g *= c;
    for (double& v : vals) v /= c;
    return MeasureRep(SupportKind::positive_line, std::move(atoms), std::move(grid), std::move(vals));
}

ClassFData make_classf(const MeasureRep& mu) {
    if (mu.is_purely_atomic()) return ClassFData::fit_atomic(mu);
    return ClassFData::from_measure(mu);
}

} // namespace

SpectralOutput free_mult_convolve_positive(const MeasureRep& mu1, const MeasureRep& mu2,
                                           std::span<const double> x_grid,
                                           std::span<const double> eps_schedule) {
    require_probability(mu1, "free_mult_convolve_positive");
    require_probability(mu2, "free_mult_convolve_positive");
    if (mu1.support() != SupportKind::positive_line || mu2.support() != SupportKind::positive_line)
        throw DomainViolationError("free_mult_convolve_positive: positive-line measures required");
    auto is_delta0 = [](const MeasureRep& m) {
        return m.is_point_mass() && m.atoms()[0].location.value() == Complex(0.0);
    };
    if (is_delta0(mu1) || is_delta0(mu2))
        throw DomainViolationError("free_mult_convolve_positive: inputs must differ from delta_0");
    auto eps = eps_or_default(eps_schedule);

    // point mass dilates the other factor exactly
    if (mu1.is_point_mass() || mu2.is_point_mass()) {
        const MeasureRep& delta = mu1.is_point_mass() ? mu1 : mu2;
        const MeasureRep& other = mu1.is_point_mass() ? mu2 : mu1;
        double c = delta.atoms()[0].location.value().real();
        return sample_measure(dilate_positive_measure(other, c), x_grid, eps);
    }

    ClassFData d1 = make_classf(mu1);
    ClassFData d2 = make_classf(mu2);
    SubordinationOptions sopts;

    auto eta_box = [&](Complex lambda, OmegaState& state) {
        Complex omega2;
        Complex omega = omega_positive_point(d1, d2, lambda, &omega2, state, sopts);
        return omega * omega2 / lambda;
    };
    auto G_box = [&](Complex u, OmegaState& state) {
        Complex lambda = 1.0 / u;           // in the lower half-plane for u in H
        Complex lc = std::conj(lambda);     // reflect into H; eta(conj) = conj(eta)
        Complex eb = std::conj(eta_box(lc, state));
        return 1.0 / (u * (1.0 - eb));
    };

    SpectralOutput out;
    out.x_grid.assign(x_grid.begin(), x_grid.end());
    out.eps_schedule.assign(eps.begin(), eps.end());

    auto cands = atom_pair_candidates(mu1, mu2, /*multiplicative=*/true);
    std::erase_if(cands, [](double c) { return c <= 0.0; });
    if (!cands.empty()) {
        OmegaState astate;
        auto G = [&](Complex z) { return G_box(z, astate); };
        out.atoms = detect_atoms(G, cands, eps);
    }

    OmegaState state;
    auto G_cont = [&](Complex z) {
        Complex g = G_box(z, state);
        for (const auto& at : out.atoms) g -= at.mass / (z - at.location);
        return g;
    };
    for (double x : x_grid) {
        if (x <= 0.0) {
            out.density.push_back(0.0);
            out.defect.push_back(0.0);
            continue;
        }
        double d = 0.0, val = 0.0;
        try {
            val = stieltjes_invert(G_cont, x, eps, &d);
        } catch (const Error&) {
            try {
                val = -G_cont(Complex(x, eps.back())).imag() / M_PI;
            } catch (const Error&) {
                val = 0.0;
            }
            d = std::numeric_limits<double>::infinity();
        }
        out.density.push_back(val);
        out.defect.push_back(d);
    }
    finalize_output(out);
    return out;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

CsvWriter spectral_csv(const SpectralOutput& s) {
    CsvWriter w;
    w.comment("schema = spectral v1");
    std::string epss = "eps_schedule =";
    for (double e : s.eps_schedule) epss += " " + format_double(e);
    w.comment(epss);
    w.comment("mass_defect = " + format_double(s.mass_defect));
    w.header({"x", "density", "defect"});
    for (std::size_t i = 0; i < s.x_grid.size(); ++i)
        w.row({format_double(s.x_grid[i]), format_double(s.density[i]), format_double(s.defect[i])});
    return w;
}

std::string spectral_sidecar_json(const SpectralOutput& s) {
    nlohmann::json j;
    j["schema"] = "spectral-sidecar v1";
    j["eps_schedule"] = s.eps_schedule;
    j["mass_defect"] = s.mass_defect;
    j["atoms"] = nlohmann::json::array();
    for (const auto& a : s.atoms)
        j["atoms"].push_back({{"location", a.location}, {"mass", a.mass}});
    double dmax = 0.0;
    for (double d : s.defect)
        if (std::isfinite(d)) dmax = std::max(dmax, d);
    j["max_finite_defect"] = dmax;
    j["flagged_points"] = std::count_if(s.defect.begin(), s.defect.end(),
                                        [](double d) { return !std::isfinite(d); });
    return j.dump(2);
}

} // namespace dw
