#ifndef TMBUMPS_ROOTFIND_HPP
#define TMBUMPS_ROOTFIND_HPP

#include <cmath>
#include <limits>

#include "tmbumps/errors.hpp"

namespace tmbumps {

/// Brent's method on [x1,x2]; f1, f2 must bracket a root.
template <class F>
double brent(const F& f, double x1, double x2, double f1, double f2,
             double xtol = 0.0, int max_iter = 200) {
    if (f1 == 0) return x1;
    if (f2 == 0) return x2;
    if (f1 * f2 > 0) throw Error("brent: root not bracketed");
    double a = x1, b = x2, c = x2, fa = f1, fb = f2, fc = f2;
    double d = 0, e = 0;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0 && fc > 0) || (fb < 0 && fc < 0)) {
            c = a;
            fc = fa;
            e = d = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2 * xm * s;
                q = 1 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2 * xm * q * (q - r) - (b - a) * (r - 1));
                q = (q - 1) * (r - 1) * (s - 1);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2 * p < std::min(3 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

template <class F>
double brent(const F& f, double a, double b, double xtol = 0.0, int max_iter = 200) {
    return brent(f, a, b, f(a), f(b), xtol, max_iter);
}

}  // namespace tmbumps

#endif
