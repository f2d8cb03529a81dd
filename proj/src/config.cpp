#include "tmbumps/config.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tmbumps/expr.hpp"
#include "json.hpp"

namespace tmbumps::config {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

using greenfn::GreenEvaluator;

/// d/dy of G(x,y) (gradient in the evaluation slot); by symmetry of G this
/// equals grad_x G(y, x).
Vec2 grad_second(const GreenEvaluator& green, Vec2 x, Vec2 y) {
    return green.grad_green(y, x);
}

}  // namespace

WeightField WeightField::constant(double c) {
    if (!(c > 0)) throw Error("WeightField: constant must be positive");
    WeightField w;
    w.f = [c](Vec2) { return c; };
    w.grad_f = [](Vec2) { return Vec2{0.0, 0.0}; };
    w.f_min = c;
    return w;
}

WeightField WeightField::from_expression(const std::string& source) {
    auto fn = expr::compile(source);
    WeightField w;
    w.f = [fn](Vec2 p) { return fn(p.x, p.y); };
    const double h = 1e-6;
    w.grad_f = [fn, h](Vec2 p) {
        return Vec2{(fn(p.x + h, p.y) - fn(p.x - h, p.y)) / (2 * h),
                    (fn(p.x, p.y + h) - fn(p.x, p.y - h)) / (2 * h)};
    };
    w.f_min = 0.0;  // checked against probes at use sites
    return w;
}

void Configuration::validate(const greenfn::DomainSpec& domain) const {
    if (points.size() != masses.size())
        throw Error("configuration: points and masses must have equal length");
    if (points.empty()) throw Error("configuration: empty");
    const double gap_floor = 1e-8 * domain.diameter();
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(masses[i] > 0)) throw Error("configuration: masses must be positive");
        if (!domain.contains(points[i])) throw Error("configuration: point not interior");
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (dist(points[i], points[j]) <= gap_floor)
                throw DegenerateGap("configuration: two points closer than the gap floor");
    }
}

Configuration Configuration::read_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("configuration JSON: ") + e.what());
    }
    Configuration cfg;
    if (!j.contains("points") || !j.contains("masses"))
        throw Error("configuration JSON: need 'points' and 'masses'");
    for (const auto& p : j["points"]) {
        if (!p.is_array() || p.size() != 2)
            throw Error("configuration JSON: each point must be [x, y]");
        cfg.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    for (const auto& m : j["masses"]) cfg.masses.push_back(m.get<double>());
    return cfg;
}

Configuration Configuration::read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open configuration file: " + path);
    return read_json(f);
}

void Configuration::write_json(std::ostream& os) const {
    char buf[96];
    os << "{\n  \"points\": [";
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s[%.17g, %.17g]", i ? ", " : "", points[i].x,
                      points[i].y);
        os << buf;
    }
    os << "],\n  \"masses\": [";
    for (std::size_t i = 0; i < masses.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g", i ? ", " : "", masses[i]);
        os << buf;
    }
    os << "]\n}\n";
}

void ResidualReport::write_json(std::ostream& os) const {
    char buf[96];
    os << "{\n  \"grad_residuals\": [";
    for (std::size_t i = 0; i < grad_residuals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s[%.17g, %.17g]", i ? ", " : "", grad_residuals[i].x,
                      grad_residuals[i].y);
        os << buf;
    }
    os << "],\n  \"scalar_residuals\": [";
    for (std::size_t i = 0; i < scalar_residuals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g", i ? ", " : "", scalar_residuals[i]);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "],\n  \"norm\": %.17g\n}\n", norm);
    os << buf;
}

ResidualReport residual(const Configuration& cfg, const WeightField& field,
                        const GreenEvaluator& green) {
    cfg.validate(green.domain());
    const std::size_t N = cfg.size();
    ResidualReport rep;
    rep.grad_residuals.resize(N);
    rep.scalar_residuals.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 xi = cfg.points[i];
        const double mi = cfg.masses[i];
        const double fi = field.f(xi);
        if (!(fi > 0)) throw Error("residual: weight field not positive at a point");
        Vec2 g = 2.0 * mi * green.grad_diag_regular_part(xi) +
                 (0.5 * mi / fi) * field.grad_f(xi);
        double s = 2.0 * mi * green.regular_part(xi, xi) + mi * std::log(fi / (mi * mi)) + mi;
        for (std::size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            g += kFourPi * cfg.masses[j] * grad_second(green, cfg.points[j], xi);
            s += kFourPi * cfg.masses[j] * green.green(cfg.points[j], xi);
        }
        rep.grad_residuals[i] = g;
        rep.scalar_residuals[i] = s;
    }
    double n2 = 0;
    for (std::size_t i = 0; i < N; ++i)
        n2 += rep.grad_residuals[i].norm2() +
              rep.scalar_residuals[i] * rep.scalar_residuals[i];
    rep.norm = std::sqrt(n2);
    return rep;
}

double phi_functional(const Configuration& cfg, const GreenEvaluator& green) {
    cfg.validate(green.domain());
    const std::size_t N = cfg.size();
    double phi = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double ai = cfg.masses[i];
        phi += ai * ai * green.regular_part(cfg.points[i], cfg.points[i]);
        phi += ai * ai - ai * ai * std::log(ai);
        for (std::size_t j = 0; j < N; ++j)
            if (j != i)
                phi += 2.0 * M_PI * ai * cfg.masses[j] * green.green(cfg.points[i], cfg.points[j]);
    }
    return phi;
}

double phi_gradient_check(const Configuration& cfg, const GreenEvaluator& green) {
    const auto rep = residual(cfg, WeightField::constant(1.0), green);
    const double h = 1e-6;
    double worst = 0;
    Configuration c = cfg;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        for (int d = 0; d < 2; ++d) {
            double& coord = d == 0 ? c.points[i].x : c.points[i].y;
            const double save = coord;
            coord = save + h;
            const double fp = phi_functional(c, green);
            coord = save - h;
            const double fm = phi_functional(c, green);
            coord = save;
            const double fd = (fp - fm) / (2 * h);
            const double scaled =
                cfg.masses[i] * (d == 0 ? rep.grad_residuals[i].x : rep.grad_residuals[i].y);
            worst = std::max(worst, std::abs(fd - scaled));
        }
        const double save = c.masses[i];
        c.masses[i] = save + h;
        const double fp = phi_functional(c, green);
        c.masses[i] = save - h;
        const double fm = phi_functional(c, green);
        c.masses[i] = save;
        worst = std::max(worst, std::abs((fp - fm) / (2 * h) - rep.scalar_residuals[i]));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Newton solver

namespace {

/// Residual as a flat vector [G1x, G1y, ..., GNx, GNy, S1, ..., SN]
Eigen::VectorXd flatten(const ResidualReport& rep) {
    const std::size_t N = rep.scalar_residuals.size();
    Eigen::VectorXd r(3 * static_cast<long>(N));
    for (std::size_t i = 0; i < N; ++i) {
        r(2 * static_cast<long>(i)) = rep.grad_residuals[i].x;
        r(2 * static_cast<long>(i) + 1) = rep.grad_residuals[i].y;
        r(2 * static_cast<long>(N) + static_cast<long>(i)) = rep.scalar_residuals[i];
    }
    return r;
}

Configuration from_vars(const Eigen::VectorXd& z, std::size_t N) {
    Configuration cfg;
    cfg.points.resize(N);
    cfg.masses.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        cfg.points[i] = {z(2 * static_cast<long>(i)), z(2 * static_cast<long>(i) + 1)};
        cfg.masses[i] = std::exp(z(2 * static_cast<long>(N) + static_cast<long>(i)));
    }
    return cfg;
}

Eigen::VectorXd to_vars(const Configuration& cfg) {
    const std::size_t N = cfg.size();
    Eigen::VectorXd z(3 * static_cast<long>(N));
    for (std::size_t i = 0; i < N; ++i) {
        z(2 * static_cast<long>(i)) = cfg.points[i].x;
        z(2 * static_cast<long>(i) + 1) = cfg.points[i].y;
        z(2 * static_cast<long>(N) + static_cast<long>(i)) = std::log(cfg.masses[i]);
    }
    return z;
}

/// Analytic Jacobian for the closed-form disk backend.  The weight-field
/// term (1/2) m_i grad f/f is differentiated by central differences of
/// grad_f (the field carries no Hessian).
Eigen::MatrixXd disk_jacobian(const Configuration& cfg, const WeightField& field,
                              const GreenEvaluator& green) {
    const std::size_t N = cfg.size();
    const double R = green.domain().radius;
    const Vec2 c0 = green.domain().center;
    const double R2 = R * R;
    const long n = 3 * static_cast<long>(N);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);

    auto q = [&](Vec2 x, Vec2 y) { return x.norm2() * y.norm2() / R2 - 2 * x.dot(y) + R2; };

    auto add2x2 = [&](long row, long col, const Mat2& M) {
        J(row, col) += M.a11;
        J(row, col + 1) += M.a12;
        J(row + 1, col) += M.a21;
        J(row + 1, col + 1) += M.a22;
    };

    const double hfd = 1e-7 * green.domain().diameter();
    for (std::size_t i = 0; i < N; ++i) {
        const Vec2 xi = cfg.points[i] - c0;
        const double mi = cfg.masses[i];
        const long gi = 2 * static_cast<long>(i);
        const long si = 2 * static_cast<long>(N) + static_cast<long>(i);
        const double fi = field.f(cfg.points[i]);
        const Vec2 gradf_over_f = field.grad_f(cfg.points[i]) / fi;

        // Robin part: h(z) = -z/(R^2-|z|^2); Dh = -I/(R^2-|z|^2) - 2 z z^T/(R^2-|z|^2)^2
        const double w = R2 - xi.norm2();
        const Mat2 Dh = (-1.0 / w) * Mat2::identity() + (-2.0 / (w * w)) * Mat2::outer(xi, xi);
        add2x2(gi, gi, 2.0 * mi * Dh);

        // d/dx_i of (1/2) m_i grad f / f, by central differences of grad_f/f
        {
            Mat2 Df;
            for (int d = 0; d < 2; ++d) {
                Vec2 xp = cfg.points[i], xm = cfg.points[i];
                (d == 0 ? xp.x : xp.y) += hfd;
                (d == 0 ? xm.x : xm.y) -= hfd;
                const Vec2 col = (field.grad_f(xp) / field.f(xp) -
                                  field.grad_f(xm) / field.f(xm)) / (2 * hfd);
                if (d == 0) { Df.a11 = col.x; Df.a21 = col.y; }
                else { Df.a12 = col.x; Df.a22 = col.y; }
            }
            add2x2(gi, gi, 0.5 * mi * Df);
        }

        // dG_i/ds_i = m_i (2 h(x_i) + (1/2) grad f/f)
        const Vec2 hi = (-1.0 / w) * xi;
        const Vec2 dGdsi = mi * (2.0 * hi + 0.5 * gradf_over_f);
        J(gi, si) += dGdsi.x;
        J(gi + 1, si) += dGdsi.y;

        // scalar row, diagonal pieces
        const double Hii = green.regular_part(cfg.points[i], cfg.points[i]);
        J(si, si) += mi * (2 * Hii + std::log(fi / (mi * mi)) - 1.0);
        // dS_i/dx_i from 2 m_i H(x_i,x_i) + m_i ln f: 2 m_i * 2 h + m_i grad f/f
        J(si, gi) += mi * (4 * hi.x + gradf_over_f.x);
        J(si, gi + 1) += mi * (4 * hi.y + gradf_over_f.y);

        for (std::size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const Vec2 xj = cfg.points[j] - c0;
            const double mj = cfg.masses[j];
            const long gj = 2 * static_cast<long>(j);
            const long sj = 2 * static_cast<long>(N) + static_cast<long>(j);
            const Vec2 e = xj - xi;  // (x - y) with x = x_j, y = x_i
            const double n2e = e.norm2();
            const double qji = q(xj, xi);
            // grad_2 G(x_j, x_i) = (1/2pi)[ (|x_j|^2 x_i/R^2 - x_j)/q + e/n ]
            const Vec2 img = (xj.norm2() / R2) * xi - xj;
            const Vec2 g2 = (1.0 / (2 * M_PI)) * (img / qji + e / n2e);

            // location row i, derivative in x_i:
            // d/dy[grad_2 G] = (1/2pi)[ (|x|^2/R^2) I/q - img (grad_2 q)^T/q^2
            //                           - I/n + 2 e e^T/n^2 ]
            const Vec2 d2q = (2.0 * xj.norm2() / R2) * xi - 2.0 * xj;
            Mat2 D2 = (xj.norm2() / R2 / qji) * Mat2::identity() +
                      (-1.0 / (qji * qji)) * Mat2::outer(img, d2q) +
                      (-1.0 / n2e) * Mat2::identity() + (2.0 / (n2e * n2e)) * Mat2::outer(e, e);
            add2x2(gi, gi, (2.0 * mj) * D2);  // 4 pi m_j * (1/2pi) D2
            // derivative in x_j:
            // d/dx[grad_2 G] = (1/2pi)[ (2 x_i x_j^T/R^2 - I)/q - img (grad_1 q)^T/q^2
            //                           + I/n - 2 e e^T/n^2 ]
            const Vec2 d1q = (2.0 * xi.norm2() / R2) * xj - 2.0 * xi;
            Mat2 D1 = (1.0 / qji) * ((2.0 / R2) * Mat2::outer(xi, xj) + (-1.0) * Mat2::identity()) +
                      (-1.0 / (qji * qji)) * Mat2::outer(img, d1q) +
                      (1.0 / n2e) * Mat2::identity() + (-2.0 / (n2e * n2e)) * Mat2::outer(e, e);
            add2x2(gi, gj, (2.0 * mj) * D1);
            // location row i, mass of j
            J(gi, sj) += kFourPi * mj * g2.x;
            J(gi + 1, sj) += kFourPi * mj * g2.y;

            // scalar row i
            const double Gji = green.green(cfg.points[j], cfg.points[i]);
            J(si, sj) += kFourPi * mj * Gji;
            J(si, gi) += kFourPi * mj * g2.x;
            J(si, gi + 1) += kFourPi * mj * g2.y;
            // grad_1 G(x_j, x_i) = (1/2pi)[ (|x_i|^2 x_j/R^2 - x_i)/q - e/n ]
            const Vec2 img1 = (xi.norm2() / R2) * xj - xi;
            const Vec2 g1 = (1.0 / (2 * M_PI)) * (img1 / qji + (-1.0 / n2e) * e);
            J(si, gj) += kFourPi * mj * g1.x;
            J(si, gj + 1) += kFourPi * mj * g1.y;
        }
    }
    return J;
}

Eigen::MatrixXd fd_jacobian(const Configuration& cfg, const WeightField& field,
                            const GreenEvaluator& green, double step) {
    const std::size_t N = cfg.size();
    const long n = 3 * static_cast<long>(N);
    Eigen::MatrixXd J(n, n);
    Eigen::VectorXd z = to_vars(cfg);
    for (long k = 0; k < n; ++k) {
        Eigen::VectorXd zp = z, zm = z;
        zp(k) += step;
        zm(k) -= step;
        const Eigen::VectorXd rp = flatten(residual(from_vars(zp, N), field, green));
        const Eigen::VectorXd rm = flatten(residual(from_vars(zm, N), field, green));
        J.col(k) = (rp - rm) / (2 * step);
    }
    return J;
}

}  // namespace

SolveResult solve_configuration(const Configuration& init, const WeightField& field,
                                const GreenEvaluator& green, const SolveOptions& opts) {
    init.validate(green.domain());
    const std::size_t N = init.size();
    const bool disk_analytic = green.backend() == greenfn::Backend::closed_form_disk;
    const double fd_step = opts.fd_step * green.domain().diameter();

    Eigen::VectorXd z = to_vars(init);
    Configuration cur = init;
    ResidualReport rep = residual(cur, field, green);
    double best = rep.norm;

    SolveResult out;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        if (rep.norm <= opts.tol) {
            out.config = cur;
            out.report = rep;
            out.iterations = iter - 1;
            out.converged = true;
            return out;
        }
        const Eigen::MatrixXd J = disk_analytic ? disk_jacobian(cur, field, green)
                                                : fd_jacobian(cur, field, green, fd_step);
        const Eigen::VectorXd r = flatten(rep);
        const Eigen::VectorXd dz = J.fullPivLu().solve(-r);

        // Armijo backtracking on the residual norm, factor 1/2; a step that
        // leaves the domain (or collapses a gap) is treated as a failed trial.
        double lambda = 1.0;
        bool accepted = false;
        for (int halve = 0; halve <= opts.max_halvings; ++halve, lambda *= 0.5) {
            const Eigen::VectorXd zt = z + lambda * dz;
            Configuration trial = from_vars(zt, N);
            bool inside = true;
            for (const Vec2& p : trial.points)
                if (!green.domain().contains(p)) inside = false;
            if (!inside) continue;
            ResidualReport trep;
            try {
                trep = residual(trial, field, green);
            } catch (const Error&) {
                continue;
            }
            if (trep.norm < (1.0 - 1e-4 * lambda) * rep.norm) {
                z = zt;
                cur = std::move(trial);
                rep = std::move(trep);
                best = std::min(best, rep.norm);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // distinguish the boundary case from plain stagnation
            const Eigen::VectorXd zt = z + dz;
            Configuration full = from_vars(zt, N);
            bool inside = true;
            for (const Vec2& p : full.points)
                if (!green.domain().contains(p)) inside = false;
            if (!inside)
                throw BoundaryEscape(
                    "solve_configuration: iterate left the domain and backtracking was "
                    "exhausted (best residual " + std::to_string(best) + ")");
            throw NonConvergence("solve_configuration: line search stalled", best);
        }
    }
    if (rep.norm <= opts.tol) {
        out.config = cur;
        out.report = rep;
        out.iterations = opts.max_iter;
        out.converged = true;
        return out;
    }
    throw NonConvergence("solve_configuration: max iterations reached", best);
}

}  // namespace tmbumps::config
