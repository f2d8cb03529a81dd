#ifndef TMBUMPS_ODE_HPP
#define TMBUMPS_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "tmbumps/errors.hpp"

namespace tmbumps::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;   // 0 -> automatic
    double h_max = 0.0;    // 0 -> interval length
    long max_steps = 500000;
};

/// One accepted Dormand-Prince 5(4) step with the Hairer CONTD5 dense
/// output coefficients (continuous extension of order 4).
template <std::size_t N>
struct DenseStep {
    double t0 = 0, h = 0;
    State<N> r1{}, r2{}, r3{}, r4{}, r5{};

    State<N> eval(double t) const {
        const double th = (t - t0) / h, th1 = 1.0 - th;
        State<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return y;
    }

    /// d/dt of the dense polynomial
    /// P(th) = r1 + r2 th + r3 th(1-th) + r4 th^2(1-th) + r5 th^2(1-th)^2.
    State<N> eval_derivative(double t) const {
        const double th = (t - t0) / h;
        State<N> d;
        for (std::size_t i = 0; i < N; ++i)
            d[i] = (r2[i] + r3[i] * (1 - 2 * th) + r4[i] * th * (2 - 3 * th) +
                    r5[i] * 2 * th * (1 - th) * (1 - 2 * th)) / h;
        return d;
    }
};

template <std::size_t N>
struct DenseSolution {
    std::vector<DenseStep<N>> steps;
    double t_begin = 0, t_end = 0;
    State<N> y_end{};

    const DenseStep<N>& step_at(double t) const {
        std::size_t lo = 0, hi = steps.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (steps[mid].t0 <= t) lo = mid; else hi = mid - 1;
        }
        return steps[lo];
    }

    State<N> eval(double t) const { return step_at(t).eval(t); }
};

namespace detail {
// Dormand-Prince tableau
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace detail

/// Adaptive integrate on [t0, t1] (t1 > t0).  The observer is called after
/// every accepted step with the dense step record; returning false stops the
/// integration early (used for event handling).
template <std::size_t N, class RHS, class Observer>
DenseSolution<N> integrate(const RHS& f, double t0, double t1, State<N> y,
                           const Options& opt, Observer&& observer) {
    using namespace detail;
    DenseSolution<N> sol;
    sol.t_begin = t0;
    const double hmax = opt.h_max > 0 ? opt.h_max : (t1 - t0);

    State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    f(t0, y, k1);

    double h = opt.h_init;
    if (h <= 0) {
        // crude initial step from the scale of y and y'
        double d0 = 0, d1n = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1n = std::max(d1n, std::abs(k1[i]) / sc);
        }
        h = (d1n > 1e-10) ? 0.01 * d0 / d1n : 1e-6 * (t1 - t0);
        h = std::clamp(h, 1e-12 * (t1 - t0), hmax);
    }

    double t = t0;
    long nsteps = 0;
    while (t < t1) {
        if (++nsteps > opt.max_steps)
            throw StepFailure("ode: max step count exceeded");
        h = std::min(h, t1 - t);
        if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
            throw StepFailure("ode: step size underflow (tolerance unattainable)");

        auto stage = [&](const State<N>& yy, double tt, State<N>& kk) { f(tt, yy, kk); };
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        stage(ytmp, t + c2 * h, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        stage(ytmp, t + c3 * h, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        stage(ytmp, t + c4 * h, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        stage(ytmp, t + c5 * h, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        stage(ytmp, t + h, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        stage(ynew, t + h, k7);

        double errnorm = 0;
        for (std::size_t i = 0; i < N; ++i) {
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double q = yerr[i] / sc;
            errnorm += q * q;
        }
        errnorm = std::sqrt(errnorm / N);
        if (!std::isfinite(errnorm)) {
            // stage blew past the representable range; retry much smaller
            h *= 0.1;
            continue;
        }

        if (errnorm <= 1.0) {
            DenseStep<N> ds;
            ds.t0 = t;
            ds.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                ds.r1[i] = y[i];
                ds.r2[i] = dy;
                ds.r3[i] = bspl;
                ds.r4[i] = dy - h * k7[i] - bspl;
                ds.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                d6 * k6[i] + d7 * k7[i]);
            }
            sol.steps.push_back(ds);
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            if (!observer(sol.steps.back(), t, y)) break;
        }
        double fac = 0.9 * std::pow(std::max(errnorm, 1e-30), -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
        h = std::min(h, hmax);
    }
    sol.t_end = t;
    sol.y_end = y;
    return sol;
}

template <std::size_t N, class RHS>
DenseSolution<N> integrate(const RHS& f, double t0, double t1, const State<N>& y0,
                           const Options& opt) {
    return integrate<N>(f, t0, t1, y0, opt,
                        [](const DenseStep<N>&, double, const State<N>&) { return true; });
}

}  // namespace tmbumps::ode

#endif
