#ifndef TMBUMPS_CONFIG_HPP
#define TMBUMPS_CONFIG_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tmbumps/errors.hpp"
#include "tmbumps/geometry.hpp"
#include "tmbumps/greenfn.hpp"

namespace tmbumps::config {

/// Smooth positive weight field f with its gradient and a positivity floor.
struct WeightField {
    std::function<double(Vec2)> f;
    std::function<Vec2(Vec2)> grad_f;
    double f_min = 0.0;

    static WeightField constant(double c = 1.0);
    /// expression in x and y, e.g. "exp(x)"; gradient by central differences
    static WeightField from_expression(const std::string& expr);

    double operator()(Vec2 p) const { return f(p); }
};

/// N concentration points with masses.  Points must be interior, pairwise
/// distinct (gap floor 1e-8 * diam) and masses positive.
struct Configuration {
    std::vector<Vec2> points;
    std::vector<double> masses;

    std::size_t size() const { return points.size(); }
    void validate(const greenfn::DomainSpec& domain) const;

    /// {"points": [[x,y],...], "masses": [...]}
    static Configuration read_json(std::istream& is);
    static Configuration read_json_file(const std::string& path);
    void write_json(std::ostream& os) const;
};

struct ResidualReport {
    std::vector<Vec2> grad_residuals;     // location equations, one per point
    std::vector<double> scalar_residuals; // mass equations
    double norm = 0;                      // Euclidean norm of all 3N components

    void write_json(std::ostream& os) const;
};

/// Assemble the concentration-point location system
///   2 m_i grad_y H(x_i,x_i) + 4 pi sum_{j != i} m_j grad_y G(x_j,x_i)
///        + (1/2) m_i grad f(x_i)/f(x_i)            (location rows)
///   4 pi sum_{j != i} m_j G(x_j,x_i) + 2 m_i H(x_i,x_i)
///        + m_i ln(f(x_i)/m_i^2) + m_i              (mass rows)
/// where grad_y acts on the evaluation slot x_i.
ResidualReport residual(const Configuration& cfg, const WeightField& field,
                        const greenfn::GreenEvaluator& green);

/// Interaction functional for f == 1:
///   Phi = 2 pi sum_{i != j} a_i a_j G(y_i,y_j) + sum a_i^2 H(y_i,y_i)
///         + sum (a_i^2 - a_i^2 ln a_i)
/// (the i != j sum counts ordered pairs).
double phi_functional(const Configuration& cfg, const greenfn::GreenEvaluator& green);

/// max component difference between the central-difference gradient of Phi
/// and the diagonally scaled residual (location rows scaled by m_i, mass
/// rows by 1); f == 1.
double phi_gradient_check(const Configuration& cfg, const greenfn::GreenEvaluator& green);

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 60;
    int max_halvings = 30;      // Armijo backtracking, factor 1/2
    double fd_step = 1e-6;      // relative to domain diameter (collocation backend)
};

struct SolveResult {
    Configuration config;
    ResidualReport report;
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton on (x_i, s_i = ln m_i).  Jacobian: analytic for the
/// closed-form disk backend, finite differences otherwise.  Throws
/// NonConvergence (with the best residual norm) or BoundaryEscape.
SolveResult solve_configuration(const Configuration& init, const WeightField& field,
                                const greenfn::GreenEvaluator& green,
                                const SolveOptions& opts = {});

}  // namespace tmbumps::config

#endif
