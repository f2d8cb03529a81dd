#include "tmbumps/greenfn.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

namespace tmbumps::greenfn {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double L2 = ab.norm2();
    double s = L2 > 0 ? (p - a).dot(ab) / L2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return dist(p, a + s * ab);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto cross = [](Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; };
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double signed_area(const std::vector<Vec2>& v) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % v.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

}  // namespace

DomainSpec DomainSpec::disk(double R, Vec2 c) {
    DomainSpec d;
    d.kind = Kind::disk;
    d.radius = R;
    d.center = c;
    d.validate();
    return d;
}

DomainSpec DomainSpec::polygon(std::vector<Vec2> verts) {
    DomainSpec d;
    d.kind = Kind::polygon;
    d.vertices = std::move(verts);
    d.validate();
    return d;
}

DomainSpec DomainSpec::smooth(std::vector<Vec2> samples) {
    DomainSpec d;
    d.kind = Kind::smooth_boundary;
    d.vertices = std::move(samples);
    d.validate();
    return d;
}

void DomainSpec::validate() const {
    if (kind == Kind::disk) {
        if (!(radius > 0)) throw Error("domain: disk radius must be positive");
        return;
    }
    const std::size_t n = vertices.size();
    const std::size_t min_n = kind == Kind::polygon ? 3 : 8;
    if (n < min_n) throw Error("domain: not enough boundary vertices");
    if (signed_area(vertices) <= 0)
        throw Error("domain: boundary must be counterclockwise");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges
            if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                                   vertices[(j + 1) % n]))
                throw Error("domain: boundary is self-intersecting");
        }
}

bool DomainSpec::contains(Vec2 p) const {
    if (kind == Kind::disk) return dist(p, center) < radius;
    bool in = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = vertices[i], b = vertices[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            in = !in;
    }
    return in;
}

double DomainSpec::boundary_distance(Vec2 p) const {
    if (kind == Kind::disk) return std::abs(radius - dist(p, center));
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        d = std::min(d, dist_point_segment(p, vertices[i], vertices[(i + 1) % n]));
    return d;
}

double DomainSpec::diameter() const {
    if (kind == Kind::disk) return 2 * radius;
    double d = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            d = std::max(d, dist(vertices[i], vertices[j]));
    return d;
}

Vec2 DomainSpec::centroid() const {
    if (kind == Kind::disk) return center;
    // area centroid of the polygonal boundary
    double A = 0, cx = 0, cy = 0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = vertices[i], b = vertices[(i + 1) % n];
        const double w = a.x * b.y - b.x * a.y;
        A += w;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    A *= 0.5;
    return {cx / (6 * A), cy / (6 * A)};
}

DomainSpec DomainSpec::read(std::istream& is) {
    DomainSpec d;
    std::string line;
    int lineno = 0;
    bool have_kind = false;
    while (std::getline(is, line)) {
        ++lineno;
        const auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank
        do {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw ParseError("domain file: expected key=value, got '" + tok + "'", lineno);
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            try {
                if (key == "kind") {
                    if (val == "disk") d.kind = Kind::disk;
                    else if (val == "polygon") d.kind = Kind::polygon;
                    else if (val == "smooth") d.kind = Kind::smooth_boundary;
                    else throw ParseError("domain file: unknown kind '" + val + "'", lineno);
                    have_kind = true;
                } else if (key == "R") {
                    d.radius = std::stod(val);
                } else if (key == "cx") {
                    d.center.x = std::stod(val);
                } else if (key == "cy") {
                    d.center.y = std::stod(val);
                } else if (key == "v") {
                    const auto comma = val.find(',');
                    if (comma == std::string::npos)
                        throw ParseError("domain file: vertex needs 'v=x,y'", lineno);
                    d.vertices.push_back(
                        {std::stod(val.substr(0, comma)), std::stod(val.substr(comma + 1))});
                } else {
                    throw ParseError("domain file: unknown key '" + key + "'", lineno);
                }
            } catch (const std::invalid_argument&) {
                throw ParseError("domain file: bad number in '" + tok + "'", lineno);
            } catch (const std::out_of_range&) {
                throw ParseError("domain file: number out of range in '" + tok + "'", lineno);
            }
        } while (ls >> tok);
    }
    if (!have_kind) throw ParseError("domain file: missing 'kind=' line", 1);
    try {
        d.validate();
    } catch (const Error& e) {
        throw ParseError(e.what(), lineno);
    }
    return d;
}

DomainSpec DomainSpec::read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open domain file: " + path);
    return read(f);
}

// ---------------------------------------------------------------------------
// closed form on the disk

namespace {

/// q = |x|^2|y|^2/R^2 - 2 x.y + R^2 = |(|y|/R)x - R y/|y||^2  (symmetric)
inline double disk_q(Vec2 x, Vec2 y, double R) {
    return x.norm2() * y.norm2() / (R * R) - 2.0 * x.dot(y) + R * R;
}

}  // namespace

double green_disk(Vec2 x, Vec2 y, double R) {
    const double n = (x - y).norm2();
    if (n < 1e-28 * R * R) throw CoincidentPoints("green_disk: x and y coincide");
    return std::log(disk_q(x, y, R) / n) / (4.0 * M_PI);
}

// ---------------------------------------------------------------------------
// evaluator

struct GreenEvaluator::Mfs {
    std::vector<Vec2> colloc;
    std::vector<Vec2> charges;
    Eigen::MatrixXd U;   // thin SVD factors of the collocation matrix
    Eigen::VectorXd sv;
    Eigen::MatrixXd V;
    Eigen::MatrixXd A;
    int rank = 0;
    mutable std::atomic<double> last_residual{0.0};
};

namespace {

/// n points spread uniformly (by arclength) along the closed polyline
std::vector<Vec2> resample_closed(const std::vector<Vec2>& v, int n) {
    const std::size_t m = v.size();
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        cum[i + 1] = cum[i] + dist(v[i], v[(i + 1) % m]);
    const double L = cum[m];
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(n));
    std::size_t seg = 0;
    for (int k = 0; k < n; ++k) {
        const double s = L * (k + 0.5) / n;
        while (seg + 1 < m + 1 && cum[seg + 1] < s) ++seg;
        const Vec2 a = v[seg], b = v[(seg + 1) % m];
        const double w = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
        out.push_back(a + w * (b - a));
    }
    return out;
}

}  // namespace

GreenEvaluator::GreenEvaluator(DomainSpec domain, Backend backend, MfsOptions opts)
    : domain_(std::move(domain)), backend_(backend), opts_(opts) {
    domain_.validate();
    if (backend_ == Backend::closed_form_disk) {
        if (domain_.kind != DomainSpec::Kind::disk)
            throw Error("closed_form_disk backend requires a disk domain");
        return;
    }
    auto mfs = std::make_shared<Mfs>();
    if (domain_.kind == DomainSpec::Kind::disk) {
        mfs->colloc.reserve(static_cast<std::size_t>(opts_.n_collocation));
        for (int j = 0; j < opts_.n_collocation; ++j) {
            const double th = kTwoPi * (j + 0.5) / opts_.n_collocation;
            mfs->colloc.push_back(domain_.center +
                                  domain_.radius * Vec2{std::cos(th), std::sin(th)});
        }
        for (int k = 0; k < opts_.n_charges; ++k) {
            const double th = kTwoPi * (k + 0.5) / opts_.n_charges;
            mfs->charges.push_back(domain_.center + opts_.offset_factor * domain_.radius *
                                                        Vec2{std::cos(th), std::sin(th)});
        }
    } else {
        mfs->colloc = resample_closed(domain_.vertices, opts_.n_collocation);
        const Vec2 c = domain_.centroid();
        for (const Vec2& p : resample_closed(domain_.vertices, opts_.n_charges))
            mfs->charges.push_back(c + opts_.offset_factor * (p - c));
    }
    const int nb = static_cast<int>(mfs->colloc.size());
    const int nc = static_cast<int>(mfs->charges.size());
    mfs->A.resize(nb, nc);
    for (int j = 0; j < nb; ++j)
        for (int k = 0; k < nc; ++k)
            mfs->A(j, k) = -std::log(dist(mfs->colloc[static_cast<std::size_t>(j)],
                                          mfs->charges[static_cast<std::size_t>(k)])) / kTwoPi;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(mfs->A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    mfs->U = svd.matrixU();
    mfs->V = svd.matrixV();
    mfs->sv = svd.singularValues();
    const double cut = opts_.svd_cutoff * mfs->sv(0);
    mfs->rank = 0;
    for (int i = 0; i < mfs->sv.size(); ++i)
        if (mfs->sv(i) > cut) ++mfs->rank;
    mfs_ = std::move(mfs);
    diag_.n_charges = nc;
    diag_.n_collocation = nb;
    diag_.svd_rank = mfs_->rank;
    diag_.offset_factor = opts_.offset_factor;
}

void GreenEvaluator::require_interior(Vec2 p, const char* who) const {
    if (!domain_.contains(p))
        throw Error(std::string(who) + ": point is not interior to the domain");
}

std::vector<double> GreenEvaluator::mfs_coeffs(Vec2 y) const {
    const auto& m = *mfs_;
    const int nb = static_cast<int>(m.colloc.size());
    Eigen::VectorXd rhs(nb);
    for (int j = 0; j < nb; ++j)
        rhs(j) = std::log(dist(m.colloc[static_cast<std::size_t>(j)], y)) / kTwoPi;
    Eigen::VectorXd proj = m.U.transpose() * rhs;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m.sv.size());
    for (int i = 0; i < m.rank; ++i) w(i) = proj(i) / m.sv(i);
    Eigen::VectorXd c = m.V * w;
    const double res = (m.A * c - rhs).cwiseAbs().maxCoeff();
    m.last_residual.store(res, std::memory_order_relaxed);
    if (res > opts_.residual_threshold)
        throw BackendTolerance("mfs: boundary residual " + std::to_string(res) +
                               " exceeds threshold");
    return {c.data(), c.data() + c.size()};
}

double GreenEvaluator::mfs_h(Vec2 x, Vec2 y) const {
    const auto c = mfs_coeffs(y);
    double h = 0;
    for (std::size_t k = 0; k < c.size(); ++k)
        h += c[k] * (-std::log(dist(x, mfs_->charges[k])) / kTwoPi);
    return h;
}

Vec2 GreenEvaluator::mfs_grad_h(Vec2 x, Vec2 y) const {
    const auto c = mfs_coeffs(y);
    Vec2 g{0, 0};
    for (std::size_t k = 0; k < c.size(); ++k) {
        const Vec2 e = x - mfs_->charges[k];
        g -= (c[k] / (kTwoPi * e.norm2())) * e;
    }
    return g;
}

double GreenEvaluator::green(Vec2 x, Vec2 y) const {
    require_interior(x, "green");
    require_interior(y, "green");
    if (backend_ == Backend::closed_form_disk)
        return green_disk(x - domain_.center, y - domain_.center, domain_.radius);
    const double n2 = (x - y).norm2();
    if (n2 < 1e-28 * domain_.diameter() * domain_.diameter())
        throw CoincidentPoints("green: x and y coincide");
    return -0.5 * std::log(n2) / kTwoPi + mfs_h(x, y);
}

double GreenEvaluator::regular_part(Vec2 x, Vec2 y) const {
    require_interior(x, "regular_part");
    require_interior(y, "regular_part");
    if (backend_ == Backend::closed_form_disk) {
        const Vec2 xs = x - domain_.center, ys = y - domain_.center;
        return 0.5 * std::log(disk_q(xs, ys, domain_.radius));
    }
    return kTwoPi * mfs_h(x, y);
}

Vec2 GreenEvaluator::grad_green(Vec2 x, Vec2 y) const {
    require_interior(x, "grad_green");
    require_interior(y, "grad_green");
    const Vec2 e = x - y;
    const double n2 = e.norm2();
    const double scale = domain_.diameter();
    if (n2 < 1e-28 * scale * scale) throw CoincidentPoints("grad_green: x and y coincide");
    if (backend_ == Backend::closed_form_disk) {
        const Vec2 xs = x - domain_.center, ys = y - domain_.center;
        const double R2 = domain_.radius * domain_.radius;
        const double q = disk_q(xs, ys, domain_.radius);
        const Vec2 img = (ys.norm2() / R2) * xs - ys;
        return (1.0 / kTwoPi) * (img / q - e / n2);
    }
    return (-1.0 / kTwoPi / n2) * e + mfs_grad_h(x, y);
}

Vec2 GreenEvaluator::grad_diag_regular_part(Vec2 x) const {
    require_interior(x, "grad_diag_regular_part");
    if (backend_ == Backend::closed_form_disk) {
        const Vec2 xs = x - domain_.center;
        return (-1.0 / (domain_.radius * domain_.radius - xs.norm2())) * xs;
    }
    // grad_y H(x,x) = (1/2) d/dz [H(z,z)] by symmetry of H; central differences
    const double h = 1e-5 * domain_.diameter();
    auto Hd = [&](Vec2 z) { return regular_part(z, z); };
    const double gx = (Hd({x.x + h, x.y}) - Hd({x.x - h, x.y})) / (2 * h);
    const double gy = (Hd({x.x, x.y + h}) - Hd({x.x, x.y - h})) / (2 * h);
    return {0.5 * gx, 0.5 * gy};
}

MfsDiagnostics GreenEvaluator::diagnostics() const {
    MfsDiagnostics d = diag_;
    if (mfs_) d.last_boundary_residual = mfs_->last_residual.load(std::memory_order_relaxed);
    return d;
}

void MfsDiagnostics::write_json(std::ostream& os) const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"n_charges\": %d, \"n_collocation\": %d, \"svd_rank\": %d, "
                  "\"offset_factor\": %.17g, \"last_boundary_residual\": %.17g}",
                  n_charges, n_collocation, svd_rank, offset_factor, last_boundary_residual);
    os << buf;
}

NearBoundaryReport near_boundary_asymptotics(const GreenEvaluator& eval, Vec2 x, Vec2 y) {
    const auto& dom = eval.domain();
    const double d = dom.boundary_distance(y);
    if (d > 0.1 * dom.diameter())
        throw Error("near_boundary_asymptotics: y is not within 0.1*diam of the boundary");
    NearBoundaryReport rep;
    rep.d = d;
    rep.separation = dist(x, y);
    rep.actual = eval.green(x, y);
    if (rep.separation >= d) {
        rep.regime = "d = O(|x-y|)";
        rep.predicted = d / rep.separation;
    } else {
        rep.regime = "|x-y| = o(d)";
        rep.predicted = std::log(2 * d / rep.separation) / kTwoPi;
    }
    rep.ratio = rep.predicted != 0 ? rep.actual / rep.predicted : 0.0;
    return rep;
}

}  // namespace tmbumps::greenfn
