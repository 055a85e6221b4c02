#include <doctest.h>

#include <sstream>

#include "measure_spec.hpp"
#include "measures.hpp"
#include "oracles.hpp"

using namespace dw;

namespace {

MeasureRep uniform_half(double a = -1.0, double b = 1.0) {
    // density 1/2 on [-1, 1]
    return MeasureRep(SupportKind::real_line, {}, {a, b}, {0.5, 0.5});
}

NevanlinnaData random_nevanlinna(oracles::Rng& rng) {
    std::vector<Atom> atoms;
    int na = int(rng.next() * 3);
    for (int i = 0; i < na; ++i)
        atoms.push_back(Atom{RSpherePoint(4.0 * rng.next() - 2.0 + i * 5.0), 0.5 * rng.next() + 0.01});
    std::vector<double> grid, vals;
    if (rng.next() < 0.7) {
        double lo = -3.0 + rng.next(), hi = 1.0 + 2.0 * rng.next();
        for (int k = 0; k <= 40; ++k) {
            grid.push_back(lo + (hi - lo) * k / 40.0);
            vals.push_back(rng.next());
        }
    }
    return NevanlinnaData(2.0 * rng.next(), 4.0 * rng.next() - 2.0,
                          MeasureRep(SupportKind::real_line, std::move(atoms), std::move(grid),
                                     std::move(vals)));
}

} // namespace

TEST_SUITE("measures") {

TEST_CASE("kernel examples: single atom, zero measure") {
    MeasureRep delta0 = MeasureRep::point_mass(SupportKind::real_line, RSpherePoint(0.0));
    // (1 + 0*i)/(0 - i) = i
    CHECK(std::abs(integrate_kernel(delta0, Kernel::nevanlinna, Complex(0, 1)) - Complex(0, 1)) <
          1e-15);
    MeasureRep zero = MeasureRep::zero(SupportKind::real_line);
    CHECK(std::abs(integrate_kernel(zero, Kernel::cauchy, Complex(2, 3))) == 0.0);
    CHECK(std::abs(integrate_kernel(zero, Kernel::nevanlinna, Complex(0.5, 0.5))) == 0.0);
}

TEST_CASE("cauchy kernel on a uniform density matches the adaptive quadrature oracle") {
    MeasureRep u = uniform_half();
    for (Complex z : {Complex(0, 1), Complex(2, 0.5), Complex(-0.3, 2.0), Complex(0.1, 1e-3)}) {
        Complex got = integrate_kernel(u, Kernel::cauchy, z);
        Complex want =
            oracles::adaptive_quadrature([&](double t) { return 0.5 / (z - t); }, -1.0, 1.0);
        CHECK(std::abs(got - want) < 1e-12 * std::max(1.0, std::abs(want)));
    }
    // the specific value at z = i: integral = -i pi/4
    Complex at_i = integrate_kernel(u, Kernel::cauchy, Complex(0, 1));
    CHECK(std::abs(at_i - Complex(0.0, -M_PI / 4.0)) < 1e-12);
}

TEST_CASE("every kernel against the quadrature oracle on a bumpy density") {
    std::vector<double> grid, vals;
    for (int k = 0; k <= 60; ++k) {
        double t = 0.5 + 2.0 * k / 60.0;
        grid.push_back(t);
        vals.push_back(1.0 + std::sin(3.0 * t));
    }
    MeasureRep m(SupportKind::positive_line, {}, grid, vals);
    auto rho = [&](double t) {
        // piecewise-linear interpolation, matching the representation exactly
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (t <= grid[i + 1])
                return vals[i] + (vals[i + 1] - vals[i]) * (t - grid[i]) / (grid[i + 1] - grid[i]);
        return 0.0;
    };
    Complex z(0.3, 0.8);
    auto check = [&](Kernel k, const std::function<Complex(double)>& kf) {
        Complex got = integrate_kernel(m, k, z);
        Complex want = oracles::adaptive_quadrature(
            [&](double t) { return rho(t) * kf(t); }, grid.front(), grid.back(), 1e-14);
        CHECK(std::abs(got - want) < 1e-10 * std::max(1.0, std::abs(want)));
    };
    check(Kernel::cauchy, [&](double t) { return 1.0 / (z - t); });
    check(Kernel::nevanlinna, [&](double t) { return (1.0 + t * z) / (t - z); });
    check(Kernel::eta_psi, [&](double t) { return t * z / (1.0 - t * z); });
    check(Kernel::class_f, [&](double t) { return (1.0 + t * t) / (t * (t - z)); });
    check(Kernel::imag_identity, [&](double t) {
        return Complex((1.0 + t * t) / (t * t + z.imag() * z.imag()), 0.0);
    });
}

TEST_CASE("kernel derivatives match central differences") {
    std::vector<double> grid, vals;
    for (int k = 0; k <= 50; ++k) {
        double t = 0.25 + k / 25.0;
        grid.push_back(t);
        vals.push_back(0.3 + 0.2 * std::cos(t));
    }
    MeasureRep m(SupportKind::positive_line, {Atom{RSpherePoint(5.0), 0.4}}, grid, vals);
    Complex z(0.4, 1.1), h(1e-6, 0.0);
    for (Kernel k : {Kernel::cauchy, Kernel::nevanlinna, Kernel::eta_psi, Kernel::class_f}) {
        Complex num = (integrate_kernel(m, k, z + h) - integrate_kernel(m, k, z - h)) / (2.0 * h);
        Complex got = integrate_kernel_derivative(m, k, z);
        CHECK(std::abs(got - num) < 1e-6 * std::max(1.0, std::abs(num)));
    }
}

TEST_CASE("PointOnSupport and probability guards") {
    MeasureRep u = uniform_half();
    CHECK_THROWS_AS(integrate_kernel(u, Kernel::cauchy, Complex(0.25, 0.0)), PointOnSupportError);
    MeasureRep half = MeasureRep(SupportKind::real_line, {Atom{RSpherePoint(0.0), 0.5}});
    CHECK_THROWS_AS(cauchy_transform(half, Complex(0, 1)), NotProbabilityError);
}

TEST_CASE("cauchy transform examples") {
    MeasureRep delta0 = MeasureRep::point_mass(SupportKind::real_line, RSpherePoint(0.0));
    CHECK(std::abs(cauchy_transform(delta0, Complex(0, 1)) - Complex(0, -1)) < 1e-15);

    MeasureRep sc = oracles::semicircle_measure(2001);
    Complex got = cauchy_transform(sc, Complex(0, 1));
    Complex want = oracles::semicircle_cauchy(Complex(0, 1)); // (i - i sqrt(5))/2
    CHECK(std::abs(want - Complex(0, (1.0 - std::sqrt(5.0)) / 2.0)) < 1e-15);
    CHECK(std::abs(got - want) < 2e-7);

    MeasureRep da = MeasureRep::point_mass(SupportKind::real_line, RSpherePoint(1.5));
    Complex z(0.25, 1e-4);
    CHECK(std::abs(cauchy_transform(da, z) - 1.0 / (z - 1.5)) < 1e-15);

    // Im G < 0 on the upper half-plane
    oracles::Rng rng;
    for (int k = 0; k < 200; ++k) {
        Complex zz = rng.in_half_plane();
        CHECK(cauchy_transform(sc, zz).imag() < 0.0);
    }
}

TEST_CASE("psi and eta transforms") {
    // point mass on the positive line: eta(z) = a z exactly
    double a = 0.7;
    MeasureRep da = MeasureRep::point_mass(SupportKind::positive_line, RSpherePoint(a));
    for (Complex z : {Complex(-0.5, 0.0), Complex(0.2, 0.3), Complex(-2.0, -1.0)}) {
        Complex psi = psi_transform(da, z);
        CHECK(std::abs(psi - a * z / (1.0 - a * z)) < 1e-14);
        CHECK(std::abs(eta_transform(da, z) - a * z) < 1e-14);
    }
    // Haar on the circle: eta == 0
    MeasureRep haar = oracles::haar_measure();
    for (Complex z : {Complex(0.3, 0.1), Complex(-0.5, 0.4), Complex(0.0, 0.9)})
        CHECK(std::abs(eta_transform(haar, z)) < 1e-13);
    // delta_1 on the circle at z = 1/2: psi = 1, eta = 1/2
    MeasureRep d1 = MeasureRep::point_mass(SupportKind::circle, RSpherePoint(Complex(1.0, 0.0)));
    CHECK(std::abs(psi_transform(d1, Complex(0.5, 0.0)) - 1.0) < 1e-14);
    CHECK(std::abs(eta_transform(d1, Complex(0.5, 0.0)) - 0.5) < 1e-14);
}

TEST_CASE("circle psi against the quadrature oracle near the boundary") {
    // density (1 + cos s)/(2 pi): psi(z) = z/2 exactly
    std::vector<double> grid, vals;
    for (int k = 0; k <= 720; ++k) {
        double s = -M_PI + 2.0 * M_PI * k / 720.0;
        grid.push_back(s);
        vals.push_back((1.0 + std::cos(s)) / (2.0 * M_PI));
    }
    MeasureRep m = MeasureRep(SupportKind::circle, {}, grid, vals).rescaled_to_probability();
    // accuracy here is representation-limited: the sampled density carries an
    // O(h^2) interpolation defect of about 1e-6 on this 720-cell grid
    for (Complex z : {Complex(0.3, 0.2), Complex(-0.6, 0.5), Complex(0.9989, 0.0)}) {
        Complex got = psi_transform(m, z);
        CHECK(std::abs(got - z / 2.0) < 1e-5 * std::max(1.0, std::abs(z)));
    }
}

TEST_CASE("f_ratio examples") {
    // degenerate constant
    ClassFData cst = ClassFData::constant(0.8);
    CHECK(std::abs(f_ratio(cst, Complex(-2, 1)) - 0.8) == 0.0);
    // beta = 0, sigma = delta_1ks mass 1
    ClassFData d(0.0, MeasureRep::point_mass(SupportKind::positive_line, RSpherePoint(1.0)));
    CHECK(std::abs(f_ratio(d, Complex(-1, 0)) - 1.0) < 1e-15);      // (1+1)/(1*(1+1)) = 1
    CHECK(std::abs(f_ratio(d, Complex(0, 1)) - Complex(1, 1)) < 1e-15); // 2/(1-i) = 1+i
}

TEST_CASE("Herglotz property of Nevanlinna data") {
    oracles::Rng rng;
    for (int trial = 0; trial < 25; ++trial) {
        NevanlinnaData nd = random_nevanlinna(rng);
        for (int k = 0; k < 400; ++k) {
            Complex z = rng.in_half_plane();
            CHECK(nd.psi(z).imag() >= -1e-12);
        }
    }
}

TEST_CASE("identity detection matches the exact criterion") {
    MeasureRep zero = MeasureRep::zero(SupportKind::real_line);
    CHECK(NevanlinnaData(1.0, 0.0, zero).is_identity());
    CHECK(!NevanlinnaData(1.0, 1e-14, zero).is_identity());
    CHECK(!NevanlinnaData(1.0 - 1e-14, 0.0, zero).is_identity());
    CHECK(!NevanlinnaData(1.0, 0.0,
                          MeasureRep::point_mass(SupportKind::real_line, RSpherePoint(0.0), 1e-13))
               .is_identity());
}

TEST_CASE("|eta(z)| <= |z| for circle probability measures") {
    oracles::Rng rng;
    std::vector<double> grid, vals;
    for (int k = 0; k <= 360; ++k) {
        double s = -M_PI + 2.0 * M_PI * k / 360.0;
        grid.push_back(s);
        vals.push_back(0.2 + 0.1 * std::sin(s) + 0.05 * std::cos(2 * s));
    }
    MeasureRep m = MeasureRep(SupportKind::circle, {}, grid, vals).rescaled_to_probability();
    MeasureRep atm(SupportKind::circle,
                   {Atom{RSpherePoint(Complex(1, 0)), 0.5},
                    Atom{RSpherePoint(std::polar(1.0, 2.1)), 0.5}});
    for (const MeasureRep* mm : {&m, &atm}) {
        for (int k = 0; k < 2000; ++k) {
            Complex z = rng.in_disk();
            CHECK(std::abs(eta_transform(*mm, z)) <= std::abs(z) + 1e-12);
        }
    }
}

TEST_CASE("eta_over_lambda series matches the direct quotient") {
    MeasureRep mp = oracles::mp1_measure(801);
    for (double r : {2e-4, 1e-4, 5e-5}) {
        for (double th : {0.5, 2.0, 4.0}) {
            Complex lam = std::polar(r, th);
            // direct quotient at a point where it is still accurate
            Complex direct = eta_transform(mp, lam) / lam;
            Complex series = eta_over_lambda(mp, lam);
            CHECK(std::abs(direct - series) < 1e-9);
        }
    }
}

TEST_CASE("measure validation rules") {
    CHECK_THROWS_AS(MeasureRep(SupportKind::real_line, {}, {0.0, -1.0}, {1.0, 1.0}),
                    DomainViolationError); // decreasing grid
    CHECK_THROWS_AS(MeasureRep(SupportKind::real_line, {}, {0.0, 1.0}, {1.0, -0.5}),
                    DomainViolationError); // negative density
    CHECK_THROWS_AS(MeasureRep(SupportKind::circle, {Atom{RSpherePoint(Complex(0.5, 0)), 1.0}}),
                    DomainViolationError); // circle atom must be unimodular
    CHECK_THROWS_AS(MeasureRep(SupportKind::positive_line,
                               {Atom{RSpherePoint::infinity(), 0.5}}),
                    DomainViolationError); // infinity only on the real line
    CHECK_THROWS_AS(MeasureRep(SupportKind::real_line,
                               {Atom{RSpherePoint(1.0), 0.5}, Atom{RSpherePoint(1.0), 0.25}}),
                    DomainViolationError); // duplicate atoms
    CHECK_THROWS_AS(MeasureRep::with_declared_mass(SupportKind::real_line,
                                                   {Atom{RSpherePoint(0.0), 1.0}}, {}, {}, 0.5),
                    DomainViolationError); // inconsistent declared mass
    // infinity atom is legal on the real line and contributes to imag-identity
    MeasureRep withinf(SupportKind::real_line,
                       {Atom{RSpherePoint::infinity(), 0.25}, Atom{RSpherePoint(0.0), 0.75}});
    CHECK(withinf.infinity_mass() == 0.25);
    Complex v = integrate_kernel(withinf, Kernel::imag_identity, Complex(0, 2.0));
    // 0.25 * 1 + 0.75 * (1 + 0)/(0 + 4)
    CHECK(std::abs(v - Complex(0.25 + 0.75 / 4.0, 0.0)) < 1e-15);
}

TEST_CASE("ClassFData validation") {
    CHECK_THROWS_AS(ClassFData(0.5, MeasureRep::zero(SupportKind::positive_line)),
                    DomainViolationError); // sigma must be nonzero unless degenerate
    CHECK_THROWS_AS(ClassFData(0.0, MeasureRep::point_mass(SupportKind::positive_line,
                                                           RSpherePoint(0.0))),
                    DomainViolationError); // atom at 0 breaks int(1/t)
    CHECK_THROWS_AS(
        ClassFData(0.0, MeasureRep(SupportKind::positive_line, {}, {0.0, 1.0}, {1.0, 1.0})),
        DomainViolationError); // grid must start above 0
    CHECK_NOTHROW(ClassFData(0.0, MeasureRep(SupportKind::positive_line, {}, {0.5, 1.5}, {1.0, 1.0})));
}

TEST_CASE("fit_atomic reproduces the transform of atomic measures exactly") {
    // mu = (delta_1 + delta_2)/2: f has the single pole 2/(a+b) = 2/3
    MeasureRep two(SupportKind::positive_line,
                   {Atom{RSpherePoint(1.0), 0.5}, Atom{RSpherePoint(2.0), 0.5}});
    ClassFData fit = ClassFData::fit_atomic(two);
    REQUIRE(fit.sigma() != nullptr);
    REQUIRE(fit.sigma()->atoms().size() == 1);
    CHECK(std::abs(fit.sigma()->atoms()[0].location.value().real() - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(fit.sigma()->atoms()[0].mass - 2.0 / 39.0) < 1e-12);
    CHECK(std::abs(fit.beta() - 4.0 / 3.0) < 1e-12);
    ClassFData direct = ClassFData::from_measure(two);
    for (Complex lam : {Complex(-1, 0), Complex(0.3, 0.4), Complex(-0.2, -0.7), Complex(5, 2)}) {
        CHECK(std::abs(fit.f(lam) - direct.f(lam)) < 1e-11 * std::max(1.0, std::abs(direct.f(lam))));
    }
    // with a mass at zero: mu = (delta_0 + delta_1)/2 -> f = 1/(2 - lambda)
    MeasureRep m0(SupportKind::positive_line,
                  {Atom{RSpherePoint(0.0), 0.5}, Atom{RSpherePoint(1.0), 0.5}});
    ClassFData fit0 = ClassFData::fit_atomic(m0);
    CHECK(fit0.beta() == 0.0);
    for (Complex lam : {Complex(-1, 0), Complex(0.3, 0.4)})
        CHECK(std::abs(fit0.f(lam) - 1.0 / (2.0 - lam)) < 1e-12);
}

TEST_CASE("gamma limit of eta at -infinity") {
    // beta > 0: infinite
    CHECK(ClassFData::constant(0.5).eta_limit_neg_infinity().is_infinite());
    // beta = 0, sigma = delta_1: gamma = -2, cross-checked by deep evaluation
    ClassFData d(0.0, MeasureRep::point_mass(SupportKind::positive_line, RSpherePoint(1.0)));
    RSpherePoint g = d.eta_limit_neg_infinity();
    REQUIRE(g.is_finite());
    CHECK(std::abs(g.value() - Complex(-2.0, 0.0)) < 1e-14);
    Complex deep1 = d.eta(Complex(-1e6, 0.0));
    Complex deep2 = d.eta(Complex(-1e8, 0.0));
    // Richardson in 1/x
    Complex extr = deep2 + (deep2 - deep1) / (1e2 - 1.0);
    CHECK(std::abs(extr - g.value()) < 1e-9);
    // measure-backed with an atom at zero: gamma = 1 - 1/m0
    MeasureRep m0(SupportKind::positive_line,
                  {Atom{RSpherePoint(0.0), 0.5}, Atom{RSpherePoint(1.0), 0.5}});
    RSpherePoint g0 = ClassFData::from_measure(m0).eta_limit_neg_infinity();
    CHECK(std::abs(g0.value() - Complex(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("fixed-point imaginary-part identity") {
    // psi(iy) = iy forces 1 = int (1+t^2)/(t^2+y^2) dsigma over R u {inf}.
    // Construct data with alpha < 1 and solve for the fixed point on the ray.
    oracles::Rng rng;
    int found = 0;
    for (int trial = 0; trial < 60 && found < 10; ++trial) {
        NevanlinnaData nd = random_nevanlinna(rng);
        if (nd.alpha >= 1.0 || nd.beta != 0.0) {
            // symmetrize: drop beta so that the vertical ray is invariant-ish
            nd = NevanlinnaData(nd.alpha * 0.45, 0.0, nd.sigma);
        }
        // bisection on g(y) = Im psi(iy) - y over y in (1e-3, 1e6)
        auto g = [&](double y) { return nd.psi(Complex(0, y)).imag() - y; };
        double lo = 1e-3, hi = 1e6;
        if (g(lo) < 0.0 || g(hi) > 0.0) continue;
        for (int it = 0; it < 200; ++it) {
            double mid = std::sqrt(lo * hi);
            (g(mid) > 0.0 ? lo : hi) = mid;
        }
        double y = 0.5 * (lo + hi);
        // sigma over R u {inf}: density+atoms part plus alpha at infinity (kernel -> 1)
        double total =
            integrate_kernel(nd.sigma, Kernel::imag_identity, Complex(0, y)).real() + nd.alpha;
        CHECK(std::abs(total - 1.0) < 1e-8);
        ++found;
    }
    CHECK(found >= 10);
}

TEST_CASE("measure-spec round trip is canonical and bit-exact") {
    MeasureRep m(SupportKind::real_line,
                 {Atom{RSpherePoint(1.0 / 3.0), 0.25}, Atom{RSpherePoint::infinity(), 0.125},
                  Atom{RSpherePoint(-2.0), 0.1}},
                 {-1.0, -0.5, 0.7}, {0.1, 0.7, 0.3});
    std::ostringstream s1;
    write_measure_spec(s1, m);
    std::istringstream in1(s1.str());
    MeasureRep back = read_measure_spec(in1);
    std::ostringstream s2;
    write_measure_spec(s2, back);
    CHECK(s1.str() == s2.str());
    CHECK(back.total_mass() == doctest::Approx(m.total_mass()).epsilon(1e-15));
    CHECK(back.infinity_mass() == 0.125);

    // circle atoms carry re,im pairs
    MeasureRep c(SupportKind::circle, {Atom{RSpherePoint(std::polar(1.0, 0.7)), 1.0}});
    std::ostringstream c1;
    write_measure_spec(c1, c);
    std::istringstream cin1(c1.str());
    MeasureRep cback = read_measure_spec(cin1);
    std::ostringstream c2;
    write_measure_spec(c2, cback);
    CHECK(c1.str() == c2.str());
    CHECK(cback.atoms()[0].location == c.atoms()[0].location);
}

TEST_CASE("measure-spec rejects malformed input") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_measure_spec(in);
    };
    CHECK_THROWS_AS(parse("not-a-spec\n"), ParseError);
    CHECK_THROWS_AS(parse("measure-spec v1\nsupport nowhere\ntotal-mass 1\n"), ParseError);
    CHECK_THROWS_AS(parse("measure-spec v1\nsupport real-line\n"), ParseError); // missing mass
    CHECK_THROWS_AS(parse("measure-spec v1\nsupport real-line\ntotal-mass 1\natom x 1\n"),
                    ParseError);
}

TEST_CASE("rescaling is explicit, never silent") {
    MeasureRep m(SupportKind::real_line, {Atom{RSpherePoint(0.0), 2.0}});
    CHECK(!m.is_probability());
    MeasureRep p = m.rescaled_to_probability();
    CHECK(p.is_probability());
    CHECK(m.total_mass() == 2.0);
}

} // TEST_SUITE
