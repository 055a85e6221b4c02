#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "freeconv.hpp"
#include "measure_spec.hpp"

namespace dw::cli {

// ---------------------------------------------------------------------------
// Literal parsers
// ---------------------------------------------------------------------------

Complex parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace((unsigned char)c)) s.push_back(c);
    if (s.empty()) throw ParseError("empty complex literal");

    auto parse_real = [](const std::string& tok) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw ParseError("bad complex literal part '" + tok + "'");
        }
        if (pos != tok.size()) throw ParseError("bad complex literal part '" + tok + "'");
        return v;
    };

    if (s.back() != 'i' && s.back() != 'I') return Complex(parse_real(s), 0.0);

    s.pop_back(); // drop the i
    // find the split between the real part and the imaginary coefficient:
    // the last '+'/'-' not preceded by an exponent marker and not leading
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    std::string re_part, im_part;
    if (split == std::string::npos) {
        im_part = s;
    } else {
        re_part = s.substr(0, split);
        im_part = s.substr(split);
    }
    if (im_part.empty() || im_part == "+") im_part = "1";
    if (im_part == "-") im_part = "-1";
    double re = re_part.empty() ? 0.0 : parse_real(re_part);
    double im = parse_real(im_part);
    return Complex(re, im);
}

RSpherePoint parse_point(const std::string& text) {
    std::string s = text;
    if (s == "inf" || s == "infinity") return RSpherePoint::infinity();
    return RSpherePoint(parse_complex(s));
}

std::vector<double> parse_grid(const std::string& text) {
    auto c1 = text.find(':');
    auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ParseError("grid spec must be a:b:step, got '" + text + "'");
    double a = std::stod(text.substr(0, c1));
    double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    double step = std::stod(text.substr(c2 + 1));
    if (!(step > 0.0) || b < a) throw ParseError("grid spec needs b >= a and step > 0");
    std::vector<double> out;
    long n = std::lround(std::floor((b - a) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(a + k * step);
    return out;
}

namespace {

std::vector<Complex> parse_complex_list(const std::string& text) {
    std::vector<Complex> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(parse_complex(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

DomainTag parse_domain(const std::string& d) {
    if (d == "disk") return disk_domain();
    if (d == "halfplane" || d == "half-plane") return half_plane_domain();
    if (d == "slitplane" || d == "slit-plane" || d == "omega") return slit_plane_domain();
    throw ParseError("unknown domain '" + d + "'");
}

} // namespace

SelfMap parse_map(const std::string& text, const std::string& domain) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ParseError("map spec must be kind:args, got '" + text + "'");
    std::string kind = text.substr(0, colon);
    std::string args = text.substr(colon + 1);
    DomainTag dom = parse_domain(domain);

    if (kind == "const") return SelfMap::constant(dom, parse_point(args));
    if (kind == "affine") {
        auto v = parse_complex_list(args);
        if (v.size() != 2) throw ParseError("affine:a,b needs two values");
        return SelfMap::affine(dom, v[0], v[1]);
    }
    if (kind == "moebius") {
        auto v = parse_complex_list(args);
        if (v.size() != 4) throw ParseError("moebius:a,b,c,d needs four values");
        return SelfMap::moebius(dom, v[0], v[1], v[2], v[3]);
    }
    if (kind == "poly") {
        auto v = parse_complex_list(args);
        if (v.empty()) throw ParseError("poly:c0,c1,... needs coefficients");
        return SelfMap::polynomial(dom, v);
    }
    if (kind == "nevanlinna") {
        // alpha,beta[,sigma-file]
        std::vector<std::string> parts;
        std::string cur;
        for (char c : args + ",") {
            if (c == ',') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        while (!parts.empty() && parts.back().empty()) parts.pop_back();
        if (parts.size() < 2) throw ParseError("nevanlinna:alpha,beta[,sigma-file]");
        double alpha = std::stod(parts[0]);
        double beta = std::stod(parts[1]);
        MeasureRep sigma = parts.size() >= 3 ? read_measure_spec_file(parts[2])
                                             : MeasureRep::zero(SupportKind::real_line);
        return SelfMap::nevanlinna(NevanlinnaData(alpha, beta, std::move(sigma)));
    }
    if (kind == "fshift") return SelfMap::f_shift(read_measure_spec_file(args));
    if (kind == "etacircle") return SelfMap::eta_ratio_circle(read_measure_spec_file(args));
    throw ParseError("unknown map kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

std::optional<RunConfig> parse_args(int argc, const char* const* argv) {
    RunConfig cfg;
    for (int i = 0; i < argc; ++i) {
        if (i) cfg.echo += " ";
        cfg.echo += argv[i];
    }

    CLI::App app{"Denjoy-Wolff points, subordination functions, and free convolutions"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--tol", cfg.tol, "solver tolerance")->capture_default_str();
        sub->add_option("--max-iter", cfg.max_iter, "iteration budget")->capture_default_str();
        sub->add_option("--out", cfg.out_path, "output CSV path");
    };

    CLI::App* dwc = app.add_subcommand("dw", "Denjoy-Wolff point of one self-map");
    dwc->add_option("--map", cfg.map_spec, "map spec (kind:args)")->required();
    dwc->add_option("--domain", cfg.domain, "disk | halfplane")->capture_default_str();
    add_common(dwc);

    CLI::App* th = app.add_subcommand("theorem1", "Denjoy-Wolff convergence table for a map family");
    th->add_option("--family", cfg.family, "scaled-halfdisk | quadratic-shift")->capture_default_str();
    th->add_option("--n", cfg.ns, "family indices")->required()->delimiter(',');
    add_common(th);

    CLI::App* sub = app.add_subcommand("subordinate", "subordination functions on a parameter grid");
    sub->add_option("--setting", cfg.setting,
                    "disk | circle-one | circle-two | halfplane-one | halfplane-two | positive")
        ->required();
    sub->add_option("--phi", cfg.map1_spec, "map spec (disk setting / first map)");
    sub->add_option("--phi2", cfg.map2_spec, "second map spec");
    sub->add_option("--mu1", cfg.mu1_file, "first measure-spec file (positive setting)");
    sub->add_option("--mu2", cfg.mu2_file, "second measure-spec file (positive setting)");
    sub->add_option("--pairs", cfg.pairs_file, "CSV of re_z1,im_z1,re_z2,im_z2 (two-variable settings)");
    sub->add_option("--radii", cfg.radii_spec, "a:b:step radii (disk/circle)")->capture_default_str();
    sub->add_option("--angles", cfg.angles, "angular count (disk/circle)")->capture_default_str();
    sub->add_flag("--boundary", cfg.boundary, "append the |z| = 1 row");
    sub->add_option("--r", cfg.r_spec, "a:b:step radial grid (positive)")->capture_default_str();
    sub->add_option("--theta", cfg.theta_spec, "a:b:step angles in [0, pi) (positive)")
        ->capture_default_str();
    sub->add_option("--re", cfg.re_spec, "a:b:step real parts (half-plane)")->capture_default_str();
    sub->add_option("--im", cfg.im_spec, "a:b:step imaginary parts (half-plane)")->capture_default_str();
    add_common(sub);

    auto add_conv = [&](CLI::App* c) {
        c->add_option("--mu1", cfg.mu1_file, "first measure-spec file")->required();
        c->add_option("--mu2", cfg.mu2_file, "second measure-spec file")->required();
        c->add_option("--eps", cfg.eps, "epsilon schedule (decreasing)")->delimiter(',');
        c->add_option("--atoms-out", cfg.atoms_out_path, "JSON sidecar path for atoms/diagnostics");
        add_common(c);
    };
    CLI::App* fca = app.add_subcommand("freeconv-add", "free additive convolution density");
    fca->add_option("--grid", cfg.grid_spec, "a:b:step output grid")->required();
    add_conv(fca);

    CLI::App* fcc = app.add_subcommand("freeconv-mult-circle", "free multiplicative convolution on the circle");
    fcc->add_option("--angles", cfg.circle_angles, "angular sample count")->capture_default_str();
    fcc->add_option("--zgrid-r", cfg.zgrid_r, "radius of the eta sample circle")->capture_default_str();
    fcc->add_option("--zgrid-n", cfg.zgrid_n, "eta sample count")->capture_default_str();
    add_conv(fcc);

    CLI::App* fcp = app.add_subcommand("freeconv-mult-pos", "free multiplicative convolution on [0, inf)");
    fcp->add_option("--grid", cfg.grid_spec, "a:b:step output grid")->required();
    add_conv(fcp);

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ParseError(std::string("argument error: ") + e.what());
    }

    if (dwc->parsed()) cfg.command = RunConfig::Command::dw;
    else if (th->parsed()) cfg.command = RunConfig::Command::theorem1;
    else if (sub->parsed()) cfg.command = RunConfig::Command::subordinate;
    else if (fca->parsed()) cfg.command = RunConfig::Command::freeconv_add;
    else if (fcc->parsed()) cfg.command = RunConfig::Command::freeconv_mult_circle;
    else if (fcp->parsed()) cfg.command = RunConfig::Command::freeconv_mult_pos;

    if (!(cfg.tol > 0.0)) throw ParseError("--tol must be positive");
    if (cfg.max_iter <= 0) throw ParseError("--max-iter must be positive");
    return cfg;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace {

void check_readable(const std::string& path) {
    if (path.empty()) return;
    std::ifstream f(path);
    if (!f) throw ParseError("cannot read input file '" + path + "'");
}

void check_writable(const std::string& path) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::app);
    if (!f) throw ParseError("cannot write output file '" + path + "'");
}

void emit(CsvWriter w, const RunConfig& cfg) {
    w.comment("command = " + cfg.echo);
    w.comment("tol = " + format_double(cfg.tol) + ", max_iter = " + std::to_string(cfg.max_iter));
    if (cfg.out_path.empty())
        w.write(std::cout);
    else
        w.write_file(cfg.out_path);
}

std::vector<RSpherePoint> disk_grid(const RunConfig& cfg) {
    std::vector<RSpherePoint> grid;
    grid.emplace_back(Complex(0.0));
    for (double r : parse_grid(cfg.radii_spec)) {
        if (r == 0.0 || r > 1.0 + 1e-12) continue;
        for (int k = 0; k < cfg.angles; ++k)
            grid.emplace_back(std::polar(std::min(r, 1.0), 2.0 * M_PI * k / cfg.angles));
    }
    if (cfg.boundary)
        for (int k = 0; k < cfg.angles; ++k)
            grid.emplace_back(std::polar(1.0, 2.0 * M_PI * k / cfg.angles));
    return grid;
}

std::vector<std::pair<RSpherePoint, RSpherePoint>> pairs_from_file(const std::string& path) {
    CsvFile f = read_csv_file(path);
    std::vector<std::pair<RSpherePoint, RSpherePoint>> out;
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        auto get = [&](const char* col) { return f.value(i, col); };
        auto mk = [](double re, double im) {
            if (std::isinf(re) || std::isinf(im)) return RSpherePoint::infinity();
            return RSpherePoint(Complex(re, im));
        };
        out.emplace_back(mk(get("re_z1"), get("im_z1")), mk(get("re_z2"), get("im_z2")));
    }
    return out;
}

int run_dw(const RunConfig& cfg) {
    SelfMap m = parse_map(cfg.map_spec, cfg.domain);
    DWOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    DWResult r = compute_denjoy_wolff(m, opts);
    std::string pt = r.point.is_infinite()
                         ? "inf"
                         : format_double(r.point.value().real()) + (r.point.value().imag() < 0 ? "" : "+") +
                               format_double(r.point.value().imag()) + "i";
    std::cout << "point = " << pt << "\n"
              << "case = " << dw_case_name(r.dw_case) << "\n"
              << "jc_derivative = " << (r.jc_derivative ? format_double(*r.jc_derivative) : "none")
              << "\n"
              << "iterations = " << r.iterations << "\n"
              << "residual = " << format_double(r.residual) << "\n";
    if (!cfg.out_path.empty()) {
        CsvWriter w;
        w.comment("schema = dw v1");
        w.header({"re_point", "im_point", "case", "jc_derivative", "iterations", "residual"});
        std::vector<std::string> cells;
        if (r.point.is_infinite()) {
            cells = {"inf", "inf"};
        } else {
            cells = {format_double(r.point.value().real()), format_double(r.point.value().imag())};
        }
        cells.push_back(dw_case_name(r.dw_case));
        cells.push_back(r.jc_derivative ? format_double(*r.jc_derivative) : "none");
        cells.push_back(std::to_string(r.iterations));
        cells.push_back(format_double(r.residual));
        w.row(cells);
        emit(std::move(w), cfg);
    }
    return 0;
}

int run_theorem1(const RunConfig& cfg) {
    DWOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    std::function<SelfMap(long)> family;
    SelfMap limit = SelfMap::polynomial(disk_domain(), {Complex(0.5), Complex(0.5)});
    if (cfg.family == "scaled-halfdisk") {
        family = [](long n) {
            double s = 1.0 - 1.0 / double(n);
            return SelfMap::polynomial(disk_domain(), {Complex(0.5 * s), Complex(0.5 * s)});
        };
    } else if (cfg.family == "quadratic-shift") {
        limit = SelfMap::polynomial(disk_domain(), {Complex(0.0), Complex(0.0), Complex(1.0)});
        family = [](long n) {
            return SelfMap::polynomial(disk_domain(),
                                       {Complex(1.0 / (4.0 * double(n))), Complex(0.0), Complex(1.0)});
        };
    } else {
        throw ParseError("unknown family '" + cfg.family + "'");
    }
    for (long n : cfg.ns)
        if (n <= 0) throw ParseError("family indices must be positive");
    auto rows = theorem1_harness(family, limit, cfg.ns, opts);
    emit(theorem1_csv(rows), cfg);
    return 0;
}

int run_subordinate(const RunConfig& cfg) {
    SubordinationOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    SubordinationResult res;

    if (cfg.setting == "disk") {
        if (cfg.map1_spec.empty()) throw ParseError("disk setting needs --phi");
        SelfMap phi = parse_map(cfg.map1_spec, "disk");
        auto grid = disk_grid(cfg);
        res = subordinate_disk(phi, grid, opts);
    } else if (cfg.setting == "circle-one") {
        if (cfg.map1_spec.empty() || cfg.map2_spec.empty())
            throw ParseError("circle-one needs --phi and --phi2");
        SelfMap phi1 = parse_map(cfg.map1_spec, "disk");
        SelfMap phi2 = parse_map(cfg.map2_spec, "disk");
        auto grid = disk_grid(cfg);
        res = subordinate_circle_one_var(phi1, phi2, grid, opts);
    } else if (cfg.setting == "circle-two") {
        if (cfg.map1_spec.empty() || cfg.map2_spec.empty() || cfg.pairs_file.empty())
            throw ParseError("circle-two needs --phi, --phi2 and --pairs");
        check_readable(cfg.pairs_file);
        SelfMap phi1 = parse_map(cfg.map1_spec, "disk");
        SelfMap phi2 = parse_map(cfg.map2_spec, "disk");
        auto grid = pairs_from_file(cfg.pairs_file);
        res = subordinate_circle_two_var(phi1, phi2, grid, opts);
    } else if (cfg.setting == "halfplane-one") {
        if (cfg.map1_spec.empty() || cfg.map2_spec.empty())
            throw ParseError("halfplane-one needs --phi and --phi2");
        SelfMap psi1 = parse_map(cfg.map1_spec, "halfplane");
        SelfMap psi2 = parse_map(cfg.map2_spec, "halfplane");
        std::vector<RSpherePoint> grid;
        for (double im : parse_grid(cfg.im_spec))
            for (double re : parse_grid(cfg.re_spec)) grid.emplace_back(Complex(re, im));
        res = subordinate_halfplane_one_var(psi1, psi2, grid, opts);
    } else if (cfg.setting == "halfplane-two") {
        if (cfg.map1_spec.empty() || cfg.map2_spec.empty() || cfg.pairs_file.empty())
            throw ParseError("halfplane-two needs --phi, --phi2 and --pairs");
        check_readable(cfg.pairs_file);
        SelfMap psi1 = parse_map(cfg.map1_spec, "halfplane");
        SelfMap psi2 = parse_map(cfg.map2_spec, "halfplane");
        auto grid = pairs_from_file(cfg.pairs_file);
        res = subordinate_halfplane_two_var(psi1, psi2, grid, opts);
    } else if (cfg.setting == "positive") {
        if (cfg.mu1_file.empty() || cfg.mu2_file.empty())
            throw ParseError("positive setting needs --mu1 and --mu2 measure files");
        check_readable(cfg.mu1_file);
        check_readable(cfg.mu2_file);
        MeasureRep mu1 = read_measure_spec_file(cfg.mu1_file);
        MeasureRep mu2 = read_measure_spec_file(cfg.mu2_file);
        auto mk = [](const MeasureRep& m) {
            return m.is_purely_atomic() ? ClassFData::fit_atomic(m) : ClassFData::from_measure(m);
        };
        ClassFData d1 = mk(mu1), d2 = mk(mu2);
        std::vector<RSpherePoint> grid;
        if (cfg.include_origin) grid.emplace_back(Complex(0.0));
        for (double th : parse_grid(cfg.theta_spec)) {
            if (th < 0.0 || th >= M_PI) continue;
            for (double r : parse_grid(cfg.r_spec)) {
                if (r <= 0.0) continue;
                grid.emplace_back(std::polar(r, th));
            }
        }
        if (cfg.include_inf) grid.push_back(RSpherePoint::infinity());
        res = subordinate_positive_line(d1, d2, grid, opts);
    } else {
        throw ParseError("unknown setting '" + cfg.setting + "'");
    }

    emit(subordination_csv(res), cfg);
    for (const auto& pt : res.points)
        if (!pt.error.empty()) return 3;
    return 0;
}

int run_freeconv(const RunConfig& cfg) {
    check_readable(cfg.mu1_file);
    check_readable(cfg.mu2_file);
    MeasureRep mu1 = read_measure_spec_file(cfg.mu1_file);
    MeasureRep mu2 = read_measure_spec_file(cfg.mu2_file);
    std::span<const double> eps =
        cfg.eps.empty() ? default_eps_schedule() : std::span<const double>(cfg.eps);

    SpectralOutput out;
    std::vector<Complex> etas;
    std::vector<Complex> zg;
    if (cfg.command == RunConfig::Command::freeconv_add) {
        auto grid = parse_grid(cfg.grid_spec);
        out = free_additive_convolve(mu1, mu2, grid, eps);
    } else if (cfg.command == RunConfig::Command::freeconv_mult_pos) {
        auto grid = parse_grid(cfg.grid_spec);
        out = free_mult_convolve_positive(mu1, mu2, grid, eps);
    } else {
        std::vector<double> angles;
        for (int k = 0; k < cfg.circle_angles; ++k)
            angles.push_back(-M_PI + 2.0 * M_PI * k / cfg.circle_angles);
        for (int k = 0; k < cfg.zgrid_n; ++k)
            zg.push_back(std::polar(cfg.zgrid_r, 2.0 * M_PI * k / cfg.zgrid_n));
        CircleConvolveOutput c = free_mult_convolve_circle(mu1, mu2, zg, angles, eps);
        out = std::move(c.angular);
        etas = std::move(c.eta);
    }

    CsvWriter w = spectral_csv(out);
    if (!etas.empty()) {
        std::string line = "eta =";
        for (std::size_t k = 0; k < etas.size(); ++k)
            line += " (" + format_double(zg[k].real()) + "," + format_double(zg[k].imag()) + ")->(" +
                    format_double(etas[k].real()) + "," + format_double(etas[k].imag()) + ")";
        w.comment(line);
    }
    emit(std::move(w), cfg);
    if (!cfg.atoms_out_path.empty()) {
        std::ofstream f(cfg.atoms_out_path);
        if (!f) throw ParseError("cannot write '" + cfg.atoms_out_path + "'");
        f << spectral_sidecar_json(out) << "\n";
    }
    for (double d : out.defect)
        if (!std::isfinite(d)) return 3;
    return 0;
}

} // namespace

int run(const RunConfig& cfg) {
    check_writable(cfg.out_path);
    check_writable(cfg.atoms_out_path);
    switch (cfg.command) {
        case RunConfig::Command::dw: return run_dw(cfg);
        case RunConfig::Command::theorem1: return run_theorem1(cfg);
        case RunConfig::Command::subordinate: return run_subordinate(cfg);
        case RunConfig::Command::freeconv_add:
        case RunConfig::Command::freeconv_mult_circle:
        case RunConfig::Command::freeconv_mult_pos: return run_freeconv(cfg);
        case RunConfig::Command::none: break;
    }
    throw ParseError("no command selected");
}

int main_entry(int argc, const char* const* argv) {
    try {
        auto cfg = parse_args(argc, argv);
        if (!cfg) return 0; // --help
        return run(*cfg);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NoConvergenceError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const NoFixedPointError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const ExtrapolationError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace dw::cli
