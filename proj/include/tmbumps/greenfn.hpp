#ifndef TMBUMPS_GREENFN_HPP
#define TMBUMPS_GREENFN_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "tmbumps/errors.hpp"
#include "tmbumps/geometry.hpp"

namespace tmbumps::greenfn {

/// A bounded 2D domain: an exact disk, a simple polygon (counterclockwise),
/// or a smooth closed boundary given by curve samples.
struct DomainSpec {
    enum class Kind { disk, polygon, smooth_boundary };

    Kind kind = Kind::disk;
    double radius = 1.0;
    Vec2 center{0.0, 0.0};
    std::vector<Vec2> vertices;  // polygon vertices or smooth-boundary samples

    static DomainSpec disk(double R, Vec2 c = {0.0, 0.0});
    static DomainSpec polygon(std::vector<Vec2> verts);
    static DomainSpec smooth(std::vector<Vec2> samples);

    /// `kind=disk R=1.0 [cx=0 cy=0]` or `kind=polygon` / `kind=smooth`
    /// followed by `v=x,y` lines.  Throws ParseError naming the line.
    static DomainSpec read(std::istream& is);
    static DomainSpec read_file(const std::string& path);

    bool contains(Vec2 p) const;
    double boundary_distance(Vec2 p) const;  // distance to the boundary
    double diameter() const;
    Vec2 centroid() const;
    void validate() const;
};

enum class Backend { closed_form_disk, harmonic_collocation };

struct MfsOptions {
    int n_charges = 128;
    int n_collocation = 256;
    double offset_factor = 1.5;   // charge curve scale relative to the boundary
    double svd_cutoff = 1e-12;    // drop singular values below cutoff * sigma_max
    double residual_threshold = 1e-8;  // boundary residual gate for queries
};

struct MfsDiagnostics {
    int n_charges = 0;
    int n_collocation = 0;
    int svd_rank = 0;
    double offset_factor = 0;
    double last_boundary_residual = 0;  // max |h_y + data| over collocation points
    void write_json(std::ostream& os) const;
};

/// Dirichlet Green function evaluator.  Conventions follow the blow-up
/// location system:  G(x,y) = (1/2pi)(ln(1/|x-y|) + H(x,y)) with H the
/// dimensionless regular part, so H(x,x) is the Robin function and
/// H(0,0) = 0 on the unit disk.
///
/// The collocation backend is a method of fundamental solutions: point
/// charges on an exterior offset curve, least-squares collocation on the
/// boundary (truncated SVD), solved once at construction.  The evaluator
/// is immutable afterwards and safe to share across threads.
class GreenEvaluator {
public:
    GreenEvaluator(DomainSpec domain, Backend backend, MfsOptions opts = {});

    double green(Vec2 x, Vec2 y) const;           // G(x,y)
    double regular_part(Vec2 x, Vec2 y) const;    // H(x,y); x == y allowed
    Vec2 grad_green(Vec2 x, Vec2 y) const;        // grad_x G(x,y)
    Vec2 grad_diag_regular_part(Vec2 x) const;    // grad_y H(x,x) = (1/2) d/dz H(z,z)

    Backend backend() const { return backend_; }
    const DomainSpec& domain() const { return domain_; }
    MfsDiagnostics diagnostics() const;

private:
    struct Mfs;  // SVD factors and charge locations

    void require_interior(Vec2 p, const char* who) const;
    /// harmonic extension h_y(x) with h_y = (1/2pi) ln|x-y| on the boundary,
    /// so that G = -(1/2pi) ln|x-y| + h_y(x); also its x-gradient.
    double mfs_h(Vec2 x, Vec2 y) const;
    Vec2 mfs_grad_h(Vec2 x, Vec2 y) const;
    std::vector<double> mfs_coeffs(Vec2 y) const;

    DomainSpec domain_;
    Backend backend_;
    MfsOptions opts_;
    std::shared_ptr<const Mfs> mfs_;
    mutable MfsDiagnostics diag_;
};

/// Closed form on the disk of radius R centered at the origin:
/// G(x,y) = (1/4pi) ln(|(|y|/R)x - R y/|y||^2 / |x-y|^2), with the limit
/// G(x,0) = (1/2pi) ln(R/|x|).  Throws CoincidentPoints if |x-y| < 1e-14 R.
double green_disk(Vec2 x, Vec2 y, double R);

struct NearBoundaryReport {
    std::string regime;   // "d = O(|x-y|)" or "|x-y| = o(d)"
    double predicted = 0; // leading term of (B.11) for the regime
    double actual = 0;    // G(x,y)
    double ratio = 0;     // actual / predicted
    double d = 0;         // dist(y, boundary)
    double separation = 0;
};

/// Diagnostic for the near-boundary asymptotics; requires y within
/// 0.1 * diameter of the boundary.
NearBoundaryReport near_boundary_asymptotics(const GreenEvaluator& eval, Vec2 x, Vec2 y);

}  // namespace tmbumps::greenfn

#endif
