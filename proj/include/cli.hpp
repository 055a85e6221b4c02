#ifndef DWCONV_CLI_HPP
#define DWCONV_CLI_HPP

#include <string>
#include <vector>

#include "selfmaps.hpp"

namespace dw::cli {

/// Complex literal: "1.5", "-2", "i", "-2i", "1+2i", "3e-2-0.5i", "inf".
RSpherePoint parse_point(const std::string& text);
Complex parse_complex(const std::string& text);

/// "a:b:step" inclusive; step > 0.
std::vector<double> parse_grid(const std::string& text);

/// Map mini-grammar (one place, no expression evaluator):
///   const:V | affine:A,B | moebius:A,B,C,D | poly:C0,C1,... |
///   nevanlinna:ALPHA,BETA[,SIGMA_FILE] | fshift:MEASURE_FILE | etacircle:MEASURE_FILE
/// Closed-form bodies take the domain from `domain` ("disk" or "halfplane");
/// transform-backed bodies fix their own domain.
SelfMap parse_map(const std::string& text, const std::string& domain);

struct RunConfig {
    enum class Command {
        none,
        dw,
        subordinate,
        freeconv_add,
        freeconv_mult_circle,
        freeconv_mult_pos,
        theorem1,
    };
    Command command = Command::none;

    // dw
    std::string map_spec;
    std::string domain = "disk";

    // theorem1
    std::string family = "scaled-halfdisk";
    std::vector<long> ns;

    // subordinate
    std::string setting;
    std::string map1_spec, map2_spec;
    std::string pairs_file;             // CSV re_z1,im_z1,re_z2,im_z2 (two-variable settings)
    std::string radii_spec = "0:0.9:0.1";
    int angles = 8;
    bool boundary = false;              // append the |z| = 1 row (disk settings)
    std::string r_spec = "0.25:2:0.25"; // positive line
    std::string theta_spec = "0:2.8:0.4";
    bool include_origin = true, include_inf = true;
    std::string re_spec = "-2:2:0.5";   // half-plane diagonal
    std::string im_spec = "0.5:2:0.5";

    // freeconv
    std::string mu1_file, mu2_file;
    std::string grid_spec;
    std::vector<double> eps;
    int circle_angles = 181;
    double zgrid_r = 0.5;
    int zgrid_n = 8;

    // common
    double tol = 1e-12;
    long max_iter = 1000000;
    std::string out_path;
    std::string atoms_out_path;
    std::string echo; // command line echo for the reproducibility header
};

/// CLI11-backed argument parsing. Returns nullopt when CLI11 already handled
/// the invocation (--help); throws ParseError on bad arguments.
std::optional<RunConfig> parse_args(int argc, const char* const* argv);

/// Exit codes: 0 success, 2 input validation, 3 solver non-convergence
/// (partial output written with flags), 4 I/O.
int run(const RunConfig& cfg);

int main_entry(int argc, const char* const* argv);

} // namespace dw::cli

#endif
