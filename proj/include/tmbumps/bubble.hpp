#ifndef TMBUMPS_BUBBLE_HPP
#define TMBUMPS_BUBBLE_HPP

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "tmbumps/errors.hpp"
#include "tmbumps/ode.hpp"

namespace tmbumps::bubble {

/// Parameters of the standard bubble: peak height gamma and the product
/// kappa = lambda * f(0) (units length^-2).  The derived concentration
/// scale mu satisfies mu^-2 = kappa * gamma^2 * e^{gamma^2}; it is the
/// dictionary between the radial coordinate r and the logarithmic
/// coordinate t = ln(1 + r^2/(4 mu^2)).
struct BubbleParams {
    double gamma;
    double kappa;
    double mu;      // exp(log_mu)
    double log_mu;  // -(ln kappa + 2 ln gamma + gamma^2)/2

    BubbleParams(double gamma_, double kappa_);
};

double t_of_r(const BubbleParams& p, double r);
double r_of_t(const BubbleParams& p, double t);

/// Limit profile U(x) = -ln(1 + |x|^2/4); U(0) = 0 is the global maximum
/// and  int_{R^2} e^{2U} dx = 4 pi.
double limit_profile_U(double x_norm);

/// Corrector phi_0(t): the explicit kernel integral with source s - s^2.
/// phi_0(0) = 0, L(phi_0)(t) = t - t^2, and phi_0(t) + t stays bounded
/// (the measured asymptote is phi_0(t) ~ -t + 2 + pi^2/6, slope -> -1).
/// Throws QuadratureError if the requested tolerance is not met.
double phi0(double t, double tol = 1e-12);

/// A function sampled on a uniform grid in t.
struct Samples {
    std::vector<double> t;
    std::vector<double> y;
};

/// Solve L(phi) = e^t((1-e^{-t})phi')' + 2phi = F with phi(0) = 0 via the
/// explicit kernel, sampled on n_points uniformly spaced nodes of [0, T].
Samples kernel_solve(const std::function<double(double)>& F, double T,
                     int n_points = 801, double tol = 1e-10);

/// Apply the operator L to a uniformly sampled function by centered
/// finite differences (5-point first derivatives applied twice).  Nodes
/// too close to the edges of the sample are skipped; pass t_min to also
/// skip the coordinate singularity at t = 0.
Samples apply_kernel_operator(const Samples& phi, double t_min = 0.05);

enum class Coordinate { radial_r, log_t };

/// A sampled radial profile.  The derivative column is always d(value)/dr,
/// so in the log_t coordinate the first node (t = 0, i.e. r = 0) carries
/// derivative exactly 0.
struct ProfileTable {
    Coordinate coordinate = Coordinate::radial_r;
    std::vector<double> grid;
    std::vector<double> value;
    std::vector<double> derivative;

    void write_csv(std::ostream& os) const;
};

/// Result of integrating the bubble ODE in the t coordinate.
/// zero_crossing_t is data, not an error: the t at which B reaches zero,
/// when that happens before t_max.
struct BubbleProfile {
    BubbleParams params;
    ProfileTable table;              // log_t coordinate
    std::vector<double> t_deriv;     // dB/dt at the grid nodes
    std::optional<double> zero_crossing_t;

    // dense integrator output: phase 1 in x = r/mu, phase 2 in t
    ode::DenseSolution<2> dense_x;
    ode::DenseSolution<2> dense_t;
    double t_switch = 0;
    double series_b = 0, series_c = 0;  // Taylor start B = g + b x^2 + c x^4

    /// B(t) evaluated on the dense integrator output (series start below
    /// the first node); clamped to the last computed value beyond the end.
    double value_at(double t) const;
    /// dB/dt from the dense output
    double t_slope_at(double t) const;
};

/// Integrate the bubble equation e^t((1-e^{-t})B')' = -(B/g^2)e^{2t+B^2-g^2}
/// with B(0) = gamma.  Starts with a Taylor series in r (the t-form is
/// singular at 0), switches to the t coordinate, and runs an embedded
/// RK5(4) pair at the given tolerance.  Throws StepFailure if the
/// tolerance cannot be met.  Requires t_max <= gamma^2 + 10.
BubbleProfile integrate_bubble(const BubbleParams& p, double t_max, double tol = 1e-10);

enum class ExpansionOrder { two_term, three_term };

/// two_term:   gamma - t/gamma - t/gamma^3
/// three_term: gamma - t/gamma + phi_0(t)/gamma^3
double bubble_expansion(const BubbleParams& p, double t, ExpansionOrder order);

/// 2 pi int_0^inf e^{2U(r)} r dr, adaptive quadrature plus the analytic
/// tail 16 pi/(4 + R^2); equals 4 pi.
double mass_of_limit_profile(double cutoff = 1e6, double tol = 1e-12);

}  // namespace tmbumps::bubble

#endif
