#ifndef TMBUMPS_RADIAL_HPP
#define TMBUMPS_RADIAL_HPP

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "tmbumps/bubble.hpp"
#include "tmbumps/config.hpp"
#include "tmbumps/errors.hpp"

namespace tmbumps::radial {

/// Radial shot profile of v'' + v'/r = -v e^{v^2}, v(0) = gamma, v'(0) = 0
/// (unit coefficient; the Euler-Lagrange lambda is recovered by scaling).
struct ShotProfile {
    double gamma = 0;
    bubble::ProfileTable table;        // radial_r coordinate: r, v, v'
    std::optional<double> first_zero;  // r0; empty means NoZero before r_max
    double energy_integral = 0;        // int_0^{r0} v'^2 r dr
    double rhs_integral = 0;           // int_0^{r0} v^2 e^{v^2} r dr

    // dense integrator output in tau = ln r; state (v, r v', E, P)
    ode::DenseSolution<4> dense;
    double series_b = 0, series_c = 0;  // v = g + b r^2 + c r^4 below the grid

    double value_at(double r) const;   // dense-output evaluation
    double deriv_at(double r) const;   // dv/dr
};

/// Shoot until the first zero (event located to relative ~1e-12) or r_max.
/// gamma is capped at 12 to stay within double range.
ShotProfile shoot_radial(double gamma, double tol = 1e-12, double r_max = 10.0);

/// One point of the radial family on the unit disk: the shot profile
/// rescaled so its first zero lands on the boundary, giving lambda = r0^2.
struct BranchPoint {
    double gamma = 0;
    double lambda = 0;
    double energy = 0;            // int_disk |grad u|^2 = 2 pi int v'^2 r dr
    double lambda_gamma_sq = 0;
    double sup_bubble_err = 0;    // sup |u - B| * gamma (filled by compare_to_bubble)
    double energy_identity_gap = 0;  // |E - lambda-side| / E, cross-check
    ShotProfile profile;
};

struct BranchTable {
    std::vector<BranchPoint> points;  // gamma strictly increasing
    void write_csv(std::ostream& os) const;
};

/// Sweep shoot_radial over increasing gammas; energy comes from the
/// quadrature of the dense output and is cross-checked against the
/// integrated right-hand side (integration-by-parts identity, agreement
/// 1e-6 relative).  Per-point failures are recorded and skipped.
BranchTable trace_branch(std::span<const double> gammas, double tol = 1e-12,
                         int threads = 1);

/// Builds the bubble with the same (gamma, lambda f(0)) via module bubble
/// and returns sup over the disk of |u - B| * gamma.
double compare_to_bubble(BranchPoint& point, double tol = 1e-11);

struct MassLawDiagnostic {
    double measured = 0;     // sqrt(lambda) * gamma
    double target = 0;       // 2 / (m_d sqrt(f0(x1)))
    double deviation = 0;    // |measured - target|
    double mass_config = 0;  // mass solved from the location system
    double mass_theorem = 0; // mass entering the mass law: mass_config / sqrt(f0(x1))
};

/// Mass-law diagnostic |sqrt(lambda) gamma - 2/(m sqrt(f0(x1)))| for an
/// N = 1 configuration solved on the same domain (the unit disk).  Throws
/// ConfigMismatch if the domain is not the unit disk or N != 1.
MassLawDiagnostic predicted_mass_law(const BranchPoint& point,
                                     const config::Configuration& cfg,
                                     const config::WeightField& field,
                                     const greenfn::DomainSpec& domain);

}  // namespace tmbumps::radial

#endif
