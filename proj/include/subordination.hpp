#ifndef DWCONV_SUBORDINATION_HPP
#define DWCONV_SUBORDINATION_HPP

#include <span>
#include <string>
#include <vector>

#include "denjoy_wolff.hpp"

namespace dw {

enum class SubordinationSetting {
    disk_one_phi,
    circle_two_var,
    circle_one_var,
    halfplane_two_var,
    halfplane_one_var,
    positive_line,
};

const char* subordination_setting_name(SubordinationSetting s);

struct SubordinationPoint {
    RSpherePoint z1, z2;         // parameters; z2 mirrors z1 for one-variable settings
    RSpherePoint omega1, omega2; // omega2 is the companion value where defined
    double residual = 0.0;       // defect of the defining functional equation
    long iterations = 0;
    bool no_value = false;       // marker for inextensible infinity rows
    std::string error;           // nonempty when this point's solve failed
};

struct SubordinationResult {
    SubordinationSetting setting;
    std::vector<SubordinationPoint> points;
};

struct SubordinationOptions {
    double tol = 1e-12;
    long max_iter = 1000000;
};

/// omega(z) = lambda_{phi_z} for phi_z(lambda) = z phi(lambda); omega(0) = 0.
/// Boundary |z| = 1 rows are genuine Denjoy-Wolff points of the boundary map.
/// The unimodular-rotation degeneracy phi(lambda) = lambda/z0 takes the exact
/// path omega == 0.
SubordinationResult subordinate_disk(const SelfMap& phi, std::span<const RSpherePoint> z_grid,
                                     const SubordinationOptions& opts = {});

/// omega2(z1,z2) = lambda of z1 phi1(z2 phi2(.)); omega1 = z2 phi2(omega2).
SubordinationResult subordinate_circle_two_var(const SelfMap& phi1, const SelfMap& phi2,
                                               std::span<const std::pair<RSpherePoint, RSpherePoint>> grid,
                                               const SubordinationOptions& opts = {});

/// Diagonal z1 = z2 = z of the two-variable circle solver; the three-way
/// identity omega1 phi1(omega1) = omega2 phi2(omega2) = omega1 omega2 / z
/// feeds the residual column.
SubordinationResult subordinate_circle_one_var(const SelfMap& phi1, const SelfMap& phi2,
                                               std::span<const RSpherePoint> z_grid,
                                               const SubordinationOptions& opts = {});

/// omega2(z1,z2) = lambda of z1 + psi1(z2 + psi2(.)); omega1 = z2 + psi2(omega2).
/// Validates the growth condition psi(iy)/iy -> 0 first. Infinity rows follow
/// the continuous-extension limits where psi_j(inf) exists; otherwise the
/// point carries the no-value marker.
SubordinationResult subordinate_halfplane_two_var(const SelfMap& psi1, const SelfMap& psi2,
                                                  std::span<const std::pair<RSpherePoint, RSpherePoint>> grid,
                                                  const SubordinationOptions& opts = {});

SubordinationResult subordinate_halfplane_one_var(const SelfMap& psi1, const SelfMap& psi2,
                                                  std::span<const RSpherePoint> z_grid,
                                                  const SubordinationOptions& opts = {});

/// omega(z) = u_z(lambda_{psi_z}) with psi_z the wedge conjugation of
/// phi_z(lambda) = z f1(z f2(lambda)); rows z = 0 and z = infinity are exact
/// (omega(0) = 0, omega(inf) = inf). omega2 = z f2(omega).
SubordinationResult subordinate_positive_line(const ClassFData& d1, const ClassFData& d2,
                                              std::span<const RSpherePoint> grid,
                                              const SubordinationOptions& opts = {});

CsvWriter subordination_csv(const SubordinationResult& r);

// ---------------------------------------------------------------------------
// Warm-started single-point engines (used by the convolution drivers)
// ---------------------------------------------------------------------------

struct OmegaState {
    std::optional<Complex> warm; // previous omega2 in solver coordinates
    long iterations = 0;
};

/// Diagonal half-plane point: returns omega1, fills omega2.
Complex omega_halfplane_point(const SelfMap& psi1, const SelfMap& psi2, Complex z,
                              Complex* omega2_out, OmegaState& state,
                              const SubordinationOptions& opts = {});

/// Diagonal circle point: returns omega1, fills omega2.
Complex omega_circle_point(const SelfMap& phi1, const SelfMap& phi2, Complex z,
                           Complex* omega2_out, OmegaState& state,
                           const SubordinationOptions& opts = {});

/// Positive-line point at lambda in H: returns omega, fills omega2 = lambda f2(omega).
Complex omega_positive_point(const ClassFData& d1, const ClassFData& d2, Complex lambda,
                             Complex* omega2_out, OmegaState& state,
                             const SubordinationOptions& opts = {});

} // namespace dw

#endif
