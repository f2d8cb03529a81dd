#ifndef TMBUMPS_QUADRATURE_HPP
#define TMBUMPS_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "tmbumps/errors.hpp"

namespace tmbumps::quad {

// G7-K15 nodes/weights on [-1,1].  Column layout: abscissa, Gauss weight,
// Kronrod weight; node 0 is the midpoint, the rest come in +/- pairs.
template <class Real>
struct GK15 {
    static constexpr std::array<std::array<Real, 3>, 8> nw = {{
        {Real(0.0L), Real(0.417959183673469387755102040816327L), Real(0.209482141084727828012999174891714L)},
        {Real(0.405845151377397166906606412076961L), Real(0.381830050505118944950369775488975L), Real(0.190350578064785409913256402421014L)},
        {Real(0.741531185599394439863864773280788L), Real(0.279705391489276667901467771423780L), Real(0.140653259715525918745189590510238L)},
        {Real(0.949107912342758524526189684047851L), Real(0.129484966168869693270611432679082L), Real(0.063092092629978553290700663189204L)},
        {Real(0.207784955007898467600689403773245L), Real(0.0L), Real(0.204432940075298892414161999234649L)},
        {Real(0.586087235467691130294144838258730L), Real(0.0L), Real(0.169004726639267902826583426598550L)},
        {Real(0.864864423359769072789712788640926L), Real(0.0L), Real(0.104790010322250183839876322541518L)},
        {Real(0.991455371120812639206854697526329L), Real(0.0L), Real(0.022935322010529224963732008058970L)},
    }};
};

template <class Real, class F>
void gk15_panel(const F& f, Real a, Real b, Real& value, Real& err) {
    const Real c = (a + b) / 2, h = (b - a) / 2;
    const auto& nw = GK15<Real>::nw;
    Real f0 = f(c);
    Real g = nw[0][1] * f0, k = nw[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const Real fi = f(c + h * nw[i][0]) + f(c - h * nw[i][0]);
        g += nw[i][1] * fi;
        k += nw[i][2] * fi;
    }
    g *= h;
    k *= h;
    value = k;
    // standard QUADPACK-style error estimate
    err = std::abs(k - g);
    err = Real(200) * err * std::sqrt(err > 0 ? err : Real(0));
    if (!(err < std::abs(b - a))) err = std::abs(k - g);  // fallback for large panels
}

struct Result {
    double value = 0;
    double error = 0;
    int panels = 0;
    bool converged = false;
};

/// Adaptive G7-K15 bisection over [a,b].  The tolerance is
/// abs_tol + rel_tol*|integral|; throws QuadratureError only via the
/// *_or_throw wrapper so property code can inspect failures.
template <class Real, class F>
Result adaptive_gk(const F& f, Real a, Real b, Real abs_tol, Real rel_tol,
                   int max_panels = 4000) {
    struct Panel { Real a, b, v, e; };
    std::vector<Panel> stack;
    Real v0, e0;
    gk15_panel<Real>(f, a, b, v0, e0);
    stack.push_back({a, b, v0, e0});
    Real total = v0, toterr = e0;
    int used = 1;
    while (toterr > abs_tol + rel_tol * std::abs(total) && used < max_panels) {
        // split the worst panel
        std::size_t worst = 0;
        for (std::size_t i = 1; i < stack.size(); ++i)
            if (stack[i].e > stack[worst].e) worst = i;
        Panel p = stack[worst];
        stack.erase(stack.begin() + static_cast<long>(worst));
        const Real m = (p.a + p.b) / 2;
        Real vl, el, vr, er;
        gk15_panel<Real>(f, p.a, m, vl, el);
        gk15_panel<Real>(f, m, p.b, vr, er);
        total += vl + vr - p.v;
        toterr += el + er - p.e;
        stack.push_back({p.a, m, vl, el});
        stack.push_back({m, p.b, vr, er});
        ++used;
    }
    Result r;
    r.value = static_cast<double>(total);
    r.error = static_cast<double>(toterr);
    r.panels = used;
    r.converged = toterr <= abs_tol + rel_tol * std::abs(total);
    return r;
}

/// Integrate over [pts[0], pts[n-1]] splitting at the interior breakpoints.
template <class Real, class F>
Result adaptive_gk_split(const F& f, std::initializer_list<Real> pts,
                         Real abs_tol, Real rel_tol, int max_panels = 4000) {
    Result total;
    total.converged = true;
    int n = static_cast<int>(pts.size());
    auto it = pts.begin();
    const Real per_abs = abs_tol / std::max(1, n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        Result r = adaptive_gk<Real>(f, *(it + i), *(it + i + 1), per_abs, rel_tol, max_panels);
        total.value += r.value;
        total.error += r.error;
        total.panels += r.panels;
        total.converged = total.converged && r.converged;
    }
    return total;
}

template <class Real, class F>
double integrate_or_throw(const F& f, Real a, Real b, Real abs_tol, Real rel_tol,
                          const char* what = "quadrature") {
    Result r = adaptive_gk<Real>(f, a, b, abs_tol, rel_tol);
    if (!r.converged)
        throw QuadratureError(std::string(what) + ": tolerance not met, error estimate " +
                              std::to_string(r.error));
    return r.value;
}

}  // namespace tmbumps::quad

#endif
