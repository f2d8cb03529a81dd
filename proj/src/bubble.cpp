#include "tmbumps/bubble.hpp"

#include <algorithm>
#include <cmath>

#include "tmbumps/ode.hpp"
#include "tmbumps/quadrature.hpp"
#include "tmbumps/rootfind.hpp"

namespace tmbumps::bubble {

namespace {

constexpr double kLn4 = 1.3862943611198906;

/// ln(e^u - 1), stable for small and large u
inline double ln_expm1(double u) { return u + std::log1p(-std::exp(-u)); }

/// kernel of Lemma A.1:
/// (1-2e^{-t})(1-2e^{-s}) ln((e^t-1)/(e^s-1)) + 4(e^{-s}-e^{-t})
inline double lemma_kernel(double t, double s, double lnem_t) {
    return (1 - 2 * std::exp(-t)) * (1 - 2 * std::exp(-s)) * (lnem_t - ln_expm1(s)) +
           4 * (std::exp(-s) - std::exp(-t));
}

double kernel_integral(const std::function<double(double)>& F, double t, double tol,
                       const char* what) {
    if (t <= 0) return 0.0;
    const double lnem_t = ln_expm1(t);
    auto g = [&](double s) { return std::exp(-s) * F(s) * lemma_kernel(t, s, lnem_t); };
    // the integrand has a ~ s ln s endpoint at s -> 0 and a graded panel
    // near s = t; split accordingly
    quad::Result r;
    if (t > 2.0)
        r = quad::adaptive_gk_split<double>(g, {0.0, 1.0, t - 1.0, t}, tol, tol);
    else
        r = quad::adaptive_gk_split<double>(g, {0.0, t / 2, t}, tol, tol);
    if (!r.converged)
        throw QuadratureError(std::string(what) + ": tolerance not met, error estimate " +
                              std::to_string(r.error));
    return r.value;
}

}  // namespace

BubbleParams::BubbleParams(double gamma_, double kappa_) : gamma(gamma_), kappa(kappa_) {
    if (!(gamma >= 1.0))
        throw Error("BubbleParams: gamma must be >= 1 (asymptotic regime)");
    if (!(kappa > 0.0)) throw Error("BubbleParams: kappa must be positive");
    log_mu = -0.5 * (std::log(kappa) + 2.0 * std::log(gamma) + gamma * gamma);
    mu = std::exp(log_mu);
}

double t_of_r(const BubbleParams& p, double r) {
    if (r < 0) throw Error("t_of_r: r must be nonnegative");
    if (r == 0) return 0.0;
    const double z = 2.0 * (std::log(r) - p.log_mu) - kLn4;  // ln(r^2/(4 mu^2))
    if (z > 40.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double r_of_t(const BubbleParams& p, double t) {
    if (t < 0) throw Error("r_of_t: t must be nonnegative");
    if (t == 0) return 0.0;
    // r = 2 mu sqrt(e^t - 1), in logs for large t
    return std::exp(p.log_mu + 0.5 * kLn4 + 0.5 * (t + std::log1p(-std::exp(-t))));
}

double limit_profile_U(double x_norm) { return -std::log1p(0.25 * x_norm * x_norm); }

double phi0(double t, double tol) {
    if (t < 0) throw Error("phi0: t must be nonnegative");
    static const auto source = std::function<double(double)>([](double s) { return s - s * s; });
    return kernel_integral(source, t, tol, "phi0");
}

Samples kernel_solve(const std::function<double(double)>& F, double T, int n_points, double tol) {
    if (!(T > 0) || n_points < 2) throw Error("kernel_solve: need T > 0 and n_points >= 2");
    Samples out;
    out.t.resize(static_cast<std::size_t>(n_points));
    out.y.resize(static_cast<std::size_t>(n_points));
    const double h = T / (n_points - 1);
    for (int j = 0; j < n_points; ++j) {
        const double tj = j * h;
        out.t[static_cast<std::size_t>(j)] = tj;
        out.y[static_cast<std::size_t>(j)] =
            (j == 0) ? 0.0 : kernel_integral(F, tj, tol, "kernel_solve");
    }
    return out;
}

Samples apply_kernel_operator(const Samples& phi, double t_min) {
    const std::size_t n = phi.t.size();
    if (n < 9) throw Error("apply_kernel_operator: need at least 9 samples");
    const double h = phi.t[1] - phi.t[0];

    auto d5 = [&](const std::vector<double>& f, std::size_t i) {
        return (-f[i + 2] + 8 * f[i + 1] - 8 * f[i - 1] + f[i - 2]) / (12 * h);
    };

    std::vector<double> psi(n, 0.0);  // (1 - e^{-t}) phi'
    for (std::size_t i = 2; i + 2 < n; ++i)
        psi[i] = -std::expm1(-phi.t[i]) * d5(phi.y, i);

    Samples out;
    for (std::size_t i = 4; i + 4 < n; ++i) {
        if (phi.t[i] < t_min) continue;
        const double Lphi = std::exp(phi.t[i]) * d5(psi, i) + 2 * phi.y[i];
        out.t.push_back(phi.t[i]);
        out.y.push_back(Lphi);
    }
    return out;
}

void ProfileTable::write_csv(std::ostream& os) const {
    const char* name = coordinate == Coordinate::radial_r ? "radial_r" : "log_t";
    os << "coord,t_or_r,value,derivative\r\n";
    char buf[128];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\r\n", name, grid[i], value[i],
                      derivative[i]);
        os << buf;
    }
}

double BubbleProfile::value_at(double t) const {
    if (t <= 0) return params.gamma;
    if (t >= table.grid.back()) return table.value.back();
    if (t < t_switch) {
        const double x = 2.0 * std::sqrt(std::expm1(t));
        if (x <= dense_x.t_begin) {
            const double x2 = x * x;
            return params.gamma + series_b * x2 + series_c * x2 * x2;
        }
        return dense_x.eval(std::min(x, dense_x.t_end))[0];
    }
    return dense_t.eval(t)[0];
}

double BubbleProfile::t_slope_at(double t) const {
    if (t <= 0 || t >= table.grid.back()) return t_deriv[t <= 0 ? 0 : t_deriv.size() - 1];
    if (t < t_switch) {
        const double x = 2.0 * std::sqrt(std::expm1(t));
        double dBdx;
        if (x <= dense_x.t_begin) {
            dBdx = 2 * series_b * x + 4 * series_c * x * x * x;
        } else {
            dBdx = dense_x.eval(std::min(x, dense_x.t_end))[1];
        }
        return x > 0 ? dBdx * (4 + x * x) / (2 * x) : -1.0 / params.gamma;
    }
    const auto y = dense_t.eval(t);
    return y[1] / (-std::expm1(-t));
}

BubbleProfile integrate_bubble(const BubbleParams& p, double t_max, double tol) {
    const double g = p.gamma;
    if (!(t_max > 0)) throw Error("integrate_bubble: t_max must be positive");
    if (t_max > g * g + 10.0)
        throw Error("integrate_bubble: t_max beyond gamma^2 + 10 (B may cross zero)");

    BubbleProfile prof{p, {}, {}, std::nullopt, {}, {}, 0, 0, 0};
    prof.table.coordinate = Coordinate::log_t;

    auto push = [&](double t, double B, double dBdt) {
        prof.table.grid.push_back(t);
        prof.table.value.push_back(B);
        // dB/dr = dB/dt * dt/dr,  dt/dr = sqrt(e^t - 1) e^{-t} / mu
        const double dtdr =
            (t == 0) ? 0.0 : std::exp(0.5 * (t + std::log1p(-std::exp(-t))) - t - p.log_mu);
        prof.table.derivative.push_back(t == 0 ? 0.0 : dBdt * dtdr);
        prof.t_deriv.push_back(dBdt);
    };

    push(0.0, g, -1.0 / g);  // dB/dt -> -1/g as t -> 0, radial slope 0

    // Phase 1: scaled radial coordinate x = r/mu on [x_s, x_switch].
    // Series start B = g + b x^2 + c x^4 removes the coordinate singularity.
    const double t_switch = std::min(2.0, 0.5 * t_max);
    const double x_switch = 2.0 * std::sqrt(std::expm1(t_switch));
    const double b = -1.0 / (4 * g);
    const double c = (1.0 / g + 2.0 * g) / (64.0 * g * g);
    double x_s = 1e-3;
    while (std::abs(c) * x_s * x_s * x_s * x_s > 0.01 * tol) x_s *= 0.5;
    prof.t_switch = t_switch;
    prof.series_b = b;
    prof.series_c = c;

    auto rhs_x = [&](double x, const ode::State<2>& y, ode::State<2>& dy) {
        dy[0] = y[1];
        dy[1] = -y[1] / x - (y[0] / (g * g)) * std::exp((y[0] - g) * (y[0] + g));
    };
    ode::Options ox;
    ox.rtol = tol;
    ox.atol = tol;
    ode::State<2> yx{g + b * x_s * x_s + c * x_s * x_s * x_s * x_s,
                     2 * b * x_s + 4 * c * x_s * x_s * x_s};
    prof.dense_x = ode::integrate<2>(
        rhs_x, x_s, x_switch, yx, ox, [&](const ode::DenseStep<2>& st, double x, const ode::State<2>& y) {
            const double t = std::log1p(0.25 * x * x);
            if (t > 1e-8) push(t, y[0], y[1] * (4 + x * x) / (2 * x));
            (void)st;
            return true;
        });
    const auto& solx = prof.dense_x;

    // Phase 2: the t-coordinate form.  State (B, w), w = (1 - e^{-t}) dB/dt.
    // The exponent is assembled as t + (B-g)(B+g) to avoid the catastrophic
    // cancellation of B^2 - g^2 at large gamma.
    const double dBdt_sw = solx.y_end[1] * (4 + x_switch * x_switch) / (2 * x_switch);
    ode::State<2> yt{solx.y_end[0], -std::expm1(-t_switch) * dBdt_sw};

    auto rhs_t = [&](double t, const ode::State<2>& y, ode::State<2>& dy) {
        dy[0] = y[1] / (-std::expm1(-t));
        dy[1] = -(y[0] / (g * g)) * std::exp(t + (y[0] - g) * (y[0] + g));
    };
    ode::Options ot;
    ot.rtol = tol;
    ot.atol = tol;
    ot.h_max = 0.5;  // keeps the sampled table dense where B is nearly linear

    bool crossed = false;
    prof.dense_t = ode::integrate<2>(
        rhs_t, t_switch, t_max, yt, ot,
        [&](const ode::DenseStep<2>& st, double t, const ode::State<2>& y) {
            if (y[0] <= 0.0 && !crossed) {
                crossed = true;
                const double tz = brent([&](double tt) { return st.eval(tt)[0]; }, st.t0, t,
                                        st.eval(st.t0)[0], y[0]);
                const auto yz = st.eval(tz);
                const double dBdt = yz[1] / (-std::expm1(-tz));
                push(tz, yz[0], dBdt);
                prof.zero_crossing_t = tz;
                return false;
            }
            push(t, y[0], y[1] / (-std::expm1(-t)));
            return true;
        });
    return prof;
}

double bubble_expansion(const BubbleParams& p, double t, ExpansionOrder order) {
    const double g = p.gamma;
    if (order == ExpansionOrder::two_term) return g - t / g - t / (g * g * g);
    return g - t / g + phi0(t) / (g * g * g);
}

double mass_of_limit_profile(double cutoff, double tol) {
    auto f = [](double r) {
        const double u = 1.0 + 0.25 * r * r;
        return r / (u * u);
    };
    auto res = quad::adaptive_gk_split<double>(f, {0.0, 10.0, 1e3, cutoff}, tol, tol);
    if (!res.converged) throw QuadratureError("mass_of_limit_profile: tolerance not met");
    const double tail = 2.0 / (1.0 + 0.25 * cutoff * cutoff);
    return 2.0 * M_PI * (res.value + tail);
}

}  // namespace tmbumps::bubble
