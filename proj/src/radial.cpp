#include "tmbumps/radial.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "tmbumps/ode.hpp"
#include "tmbumps/rootfind.hpp"

namespace tmbumps::radial {

namespace {

}  // namespace

double ShotProfile::value_at(double r) const {
    if (r <= 0) return gamma;
    const double tau = std::log(r);
    if (tau <= dense.t_begin) return gamma + series_b * r * r + series_c * r * r * r * r;
    if (tau >= dense.t_end) return dense.y_end[0];
    return dense.eval(tau)[0];
}

double ShotProfile::deriv_at(double r) const {
    if (r <= 0) return 0.0;
    const double tau = std::log(r);
    if (tau <= dense.t_begin) return 2 * series_b * r + 4 * series_c * r * r * r;
    if (tau >= dense.t_end) return dense.y_end[1] / std::exp(dense.t_end);
    return dense.eval(tau)[1] / r;
}

ShotProfile shoot_radial(double gamma, double tol, double r_max) {
    if (!(gamma >= 0.5)) throw Error("shoot_radial: gamma must be >= 0.5");
    if (gamma > 12.0)
        throw Error("shoot_radial: gamma capped at 12 in double precision (e^{v^2} range)");

    ShotProfile prof;
    prof.gamma = gamma;
    prof.table.coordinate = bubble::Coordinate::radial_r;

    const double g = gamma;
    // series start v = g + b r^2 + c r^4 around the regular singular point
    const double b = -g * std::exp(g * g) / 4.0;
    const double c = b * b * (1.0 / g + 2.0 * g) / 4.0;
    const double mu = std::exp(-0.5 * (2.0 * std::log(g) + g * g));  // kappa = 1
    const double r_s = 1e-2 * mu;
    prof.series_b = b;
    prof.series_c = c;

    prof.table.grid.push_back(0.0);
    prof.table.value.push_back(g);
    prof.table.derivative.push_back(0.0);

    // tau = ln r;  state (v, v_dot = r v', E, P) with
    // E' = v_dot^2,  P' = v^2 exp(v^2 + 2 tau)
    const double tau0 = std::log(r_s);
    const double d2 = r_s * r_s / (mu * mu);  // = delta^2
    ode::State<4> y0{
        g + b * r_s * r_s + c * r_s * r_s * r_s * r_s,
        (2 * b * r_s + 4 * c * r_s * r_s * r_s) * r_s,
        b * b * r_s * r_s * r_s * r_s,  // int_0^{r_s} v'^2 r dr, leading term
        mu * mu * (0.5 * d2 - 0.25 * d2 * d2 * (0.5 + 0.5 / (g * g)))};

    auto rhs = [&](double tau, const ode::State<4>& y, ode::State<4>& dy) {
        const double v = y[0];
        const double ex = v * v + 2 * tau;
        const double w = ex < 700.0 ? std::exp(ex) : std::exp(700.0);
        dy[0] = y[1];
        dy[1] = -v * w;
        dy[2] = y[1] * y[1];
        dy[3] = v * v * w;
    };

    ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;

    bool crossed = false;
    double tau_z = 0;
    ode::State<4> yz{};
    auto push = [&](double tau, const ode::State<4>& y) {
        const double r = std::exp(tau);
        prof.table.grid.push_back(r);
        prof.table.value.push_back(y[0]);
        prof.table.derivative.push_back(y[1] / r);
    };

    prof.dense = ode::integrate<4>(
        rhs, tau0, std::log(r_max), y0, opt,
        [&](const ode::DenseStep<4>& st, double tau, const ode::State<4>& y) {
            if (y[0] <= 0.0 && !crossed) {
                crossed = true;
                // locate on the dense output, then sharpen by Newton with
                // re-integration from the step start (v noise ~ machine eps)
                double tz = brent([&](double tt) { return st.eval(tt)[0]; }, st.t0, tau,
                                  st.eval(st.t0)[0], y[0]);
                ode::Options fine;
                fine.rtol = 1e-13;
                fine.atol = 1e-14;
                for (int it = 0; it < 4; ++it) {
                    if (tz <= st.t0) { tz = st.t0 + 1e-15; break; }
                    auto mini = ode::integrate<4>(rhs, st.t0, tz, st.eval(st.t0), fine);
                    const double v = mini.y_end[0], vd = mini.y_end[1];
                    const double step = v / vd;
                    yz = mini.y_end;
                    tz -= step;
                    if (std::abs(step) < 1e-15 * std::abs(tz)) break;
                }
                tau_z = tz;
                return false;
            }
            push(tau, y);
            return true;
        });

    const auto& sol = prof.dense;
    if (crossed) {
        prof.first_zero = std::exp(tau_z);
        prof.table.grid.push_back(*prof.first_zero);
        prof.table.value.push_back(0.0);
        prof.table.derivative.push_back(yz[1] / *prof.first_zero);
        prof.energy_integral = yz[2];
        prof.rhs_integral = yz[3];
    } else {
        prof.energy_integral = sol.y_end[2];
        prof.rhs_integral = sol.y_end[3];
    }
    return prof;
}

void BranchTable::write_csv(std::ostream& os) const {
    os << "gamma,lambda,lambda_gamma_sq,energy,energy_over_4pi,sup_bubble_err_times_gamma\r\n";
    char buf[256];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\r\n", p.gamma,
                      p.lambda, p.lambda_gamma_sq, p.energy, p.energy / (4.0 * M_PI),
                      p.sup_bubble_err);
        os << buf;
    }
}

BranchTable trace_branch(std::span<const double> gammas, double tol, int threads) {
    for (std::size_t i = 1; i < gammas.size(); ++i)
        if (!(gammas[i] > gammas[i - 1]))
            throw Error("trace_branch: gammas must be strictly increasing");

    std::vector<std::optional<BranchPoint>> slots(gammas.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < gammas.size(); i += stride) {
            try {
                BranchPoint bp;
                bp.gamma = gammas[i];
                bp.profile = shoot_radial(gammas[i], tol);
                if (!bp.profile.first_zero) continue;  // NoZero: recorded by omission
                const double r0 = *bp.profile.first_zero;
                bp.lambda = r0 * r0;
                bp.lambda_gamma_sq = bp.lambda * bp.gamma * bp.gamma;
                bp.energy = 2.0 * M_PI * bp.profile.energy_integral;
                const double rhs_side = 2.0 * M_PI * bp.profile.rhs_integral;
                bp.energy_identity_gap = std::abs(bp.energy - rhs_side) / bp.energy;
                compare_to_bubble(bp);
                slots[i] = std::move(bp);
            } catch (const Error&) {
                // per-point failure: skip, continue the sweep
            }
        }
    };
    const int nthreads = std::max(1, threads);
    if (nthreads == 1 || gammas.size() < 2) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(nthreads),
                                                    gammas.size());
        pool.reserve(n);
        for (std::size_t k = 0; k < n; ++k) pool.emplace_back(work, k, n);
        for (auto& t : pool) t.join();
    }
    BranchTable table;
    for (auto& s : slots)
        if (s) table.points.push_back(std::move(*s));
    return table;
}

double compare_to_bubble(BranchPoint& point, double tol) {
    if (!point.profile.first_zero) throw Error("compare_to_bubble: profile has no zero");
    const double r0 = *point.profile.first_zero;
    // bubble with the same (gamma, lambda f(0)) on the unit disk
    bubble::BubbleParams params(point.gamma, point.lambda);
    const double t_boundary = bubble::t_of_r(params, 1.0);
    auto B = bubble::integrate_bubble(
        params, std::min(t_boundary + 1.0, point.gamma * point.gamma + 5.0), tol);

    const double t_end = B.zero_crossing_t ? std::min(*B.zero_crossing_t, t_boundary)
                                           : t_boundary;
    double sup = 0;
    const int n = 4000;
    for (int k = 1; k <= n; ++k) {
        const double t = t_end * k / n;
        const double r_unit = bubble::r_of_t(params, t);
        const double u = point.profile.value_at(r_unit * r0);
        sup = std::max(sup, std::abs(u - B.value_at(t)));
    }
    point.sup_bubble_err = sup * point.gamma;
    return point.sup_bubble_err;
}

MassLawDiagnostic predicted_mass_law(const BranchPoint& point,
                                     const config::Configuration& cfg,
                                     const config::WeightField& field,
                                     const greenfn::DomainSpec& domain) {
    if (domain.kind != greenfn::DomainSpec::Kind::disk ||
        std::abs(domain.radius - 1.0) > 1e-12 || domain.center.norm() > 1e-12)
        throw ConfigMismatch(
            "predicted_mass_law: the radial family lives on the unit disk; domain mismatch");
    if (cfg.size() != 1)
        throw ConfigMismatch("predicted_mass_law: need an N = 1 configuration");

    MassLawDiagnostic d;
    d.mass_config = cfg.masses[0];
    const double f0 = field.f(cfg.points[0]);
    // The location-system mass and the mass-law mass differ by sqrt(f0):
    // with m_d = m_config/sqrt(f0) the law reads sqrt(lambda) gamma ->
    // 2/(m_d sqrt(f0)) = 2/m_config.
    d.mass_theorem = d.mass_config / std::sqrt(f0);
    d.target = 2.0 / (d.mass_theorem * std::sqrt(f0));
    // the stored branch lambda is normalized to lambda*f = r0^2
    d.measured = std::sqrt(point.lambda / f0) * point.gamma;
    d.deviation = std::abs(d.measured - d.target);
    return d;
}

}  // namespace tmbumps::radial
