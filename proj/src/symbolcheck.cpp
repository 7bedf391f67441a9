#include "stokeselast/symbolcheck.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace selast {

Eigen::Matrix3d SymTensor3::matrix() const {
    Eigen::Matrix3d m;
    m << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    return m;
}

SymTensor3 SymTensor3::from_matrix(const Eigen::Matrix3d& m) {
    return {m(0, 0), m(1, 1), m(2, 2), 0.5 * (m(0, 1) + m(1, 0)),
            0.5 * (m(0, 2) + m(2, 0)), 0.5 * (m(1, 2) + m(2, 1))};
}

Eigen::Vector3d symbol_3d(const SymTensor3& A, const Eigen::Vector3d& xi) {
    if (xi.norm() == 0.0) throw ValidationError("symbol direction must be nonzero");
    return (A.matrix() * xi).cross(xi);
}

void ConditionReport::write(std::ostream& os) const {
    os << "margin = " << margin << "\n";
    os << "threshold = " << threshold << "\n";
    os << "pass = " << (pass ? "true" : "false") << "\n";
    os << "argmin_point = " << argmin_point << "\n";
    os << "argmin_direction = " << argmin_direction.x() << " " << argmin_direction.y()
       << " " << argmin_direction.z() << "\n";
    os << "point_samples = " << point_samples << "\n";
    os << "direction_samples = " << direction_samples << "\n";
    if (secondary_margin) os << "min_d1u1 = " << *secondary_margin << "\n";
}

namespace {

std::vector<Eigen::Vector3d> fibonacci_sphere(int n) {
    // golden-angle lattice; deterministic for fixed n
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Eigen::Vector3d> dirs;
    dirs.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * k;
        dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return dirs;
}

} // namespace

ConditionReport condition_3d(std::span<const SymTensor3> A_field,
                             std::span<const SymTensor3> Atilde_field, double threshold,
                             int n_directions) {
    if (A_field.empty() || A_field.size() != Atilde_field.size())
        throw ValidationError("condition check needs matched, non-empty tensor fields");
    if (threshold < 0.0) throw ValidationError("threshold must be non-negative");
    if (n_directions < 16) throw ValidationError("need at least 16 directions");

    std::vector<Eigen::Matrix3d> A, At;
    A.reserve(A_field.size());
    At.reserve(Atilde_field.size());
    for (const auto& t : A_field) A.push_back(t.matrix());
    for (const auto& t : Atilde_field) At.push_back(t.matrix());

    const int npts = int(A.size());
    auto value = [&](int p, const Eigen::Vector3d& xi) {
        return (A[p] * xi).cross(xi).norm() + (At[p] * xi).cross(xi).norm();
    };

    ConditionReport rep;
    rep.threshold = threshold;
    rep.point_samples = npts;
    rep.margin = std::numeric_limits<double>::infinity();

    int evaluations = 0;
    auto scan = [&](const std::vector<Eigen::Vector3d>& dirs) {
        for (const auto& d : dirs)
            for (int p = 0; p < npts; ++p) {
                ++evaluations;
                const double v = value(p, d);
                if (v < rep.margin) {
                    rep.margin = v;
                    rep.argmin_point = p;
                    rep.argmin_direction = d;
                }
            }
    };

    scan(fibonacci_sphere(n_directions));

    // local refinement around the running minimum: tangent-plane grids of
    // shrinking radius, re-evaluated against every point
    double radius = 2.0 * std::sqrt(4.0 * std::numbers::pi / n_directions);
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::Vector3d center = rep.argmin_direction;
        Eigen::Vector3d t1 = center.unitOrthogonal();
        Eigen::Vector3d t2 = center.cross(t1);
        std::vector<Eigen::Vector3d> dirs;
        const int m = 17;
        for (int a = -m / 2; a <= m / 2; ++a)
            for (int b = -m / 2; b <= m / 2; ++b) {
                Eigen::Vector3d d = center + radius * (2.0 * a / m) * t1 +
                                    radius * (2.0 * b / m) * t2;
                dirs.push_back(d.normalized());
            }
        scan(dirs);
        radius /= 6.0;
    }

    rep.direction_samples = evaluations / npts;
    rep.pass = rep.margin >= threshold;
    return rep;
}

ConditionReport nondegeneracy_2d(const VectorField2& u, double threshold) {
    if (threshold < 0.0) throw ValidationError("threshold must be non-negative");
    const SymTensorField2 s = sym_gradient(u);
    const Grid2& g = u.grid();

    ConditionReport rep;
    rep.threshold = threshold;
    rep.point_samples = g.nx * g.ny;
    rep.direction_samples = 0;  // determinant check is direction-free
    rep.margin = std::numeric_limits<double>::infinity();
    double min_d1u1 = std::numeric_limits<double>::infinity();

    for (int cj = 0; cj < g.ny; ++cj)
        for (int ci = 0; ci < g.nx; ++ci) {
            const double shear = 0.25 * (s.txy(ci, cj) + s.txy(ci + 1, cj) +
                                         s.txy(ci, cj + 1) + s.txy(ci + 1, cj + 1));
            const double det = s.txx(ci, cj) * s.tyy(ci, cj) - shear * shear;
            if (std::abs(det) < rep.margin) {
                rep.margin = std::abs(det);
                rep.argmin_point = cj * g.nx + ci;
            }
            min_d1u1 = std::min(min_d1u1, std::abs(s.txx(ci, cj)));
        }

    rep.secondary_margin = min_d1u1;
    rep.pass = rep.margin >= threshold;
    return rep;
}

double symbol_2d(const VectorField2& u, int ci, int cj, const Eigen::Vector2d& xi) {
    if (xi.norm() == 0.0) throw ValidationError("symbol direction must be nonzero");
    const Grid2& g = u.grid();
    if (ci < 0 || ci >= g.nx || cj < 0 || cj >= g.ny)
        throw ValidationError("cell index out of range");
    if (!u.face_staggered())
        throw ValidationError("symbol_2d requires a face-staggered field");
    const double d1u1 = (u.ux(ci + 1, cj) - u.ux(ci, cj)) / g.hx;
    return 2.0 * xi.squaredNorm() * d1u1;
}

LopatinskiiReport lopatinskii_roots(double a, double b, double c) {
    if (!(a > 0.0)) throw ValidationError("leading coefficient a must be positive");
    LopatinskiiReport rep;
    rep.a = a;
    rep.b = b;
    rep.c = c;
    const std::complex<double> disc = std::sqrt(std::complex<double>(-b * b - 4.0 * a * c));
    const std::complex<double> ib(0.0, b);
    rep.root1 = (-ib + disc) / (2.0 * a);
    rep.root2 = (-ib - disc) / (2.0 * a);
    rep.decaying = (rep.root1.real() < 0.0 ? 1 : 0) + (rep.root2.real() < 0.0 ? 1 : 0);
    rep.condition_ok = rep.decaying <= 1;
    return rep;
}

std::array<double, 3> lopatinskii_coefficients(const SymTensor3& A, const SymTensor3& At,
                                               const Eigen::Vector3d& nu,
                                               const Eigen::Vector3d& zeta) {
    if (std::abs(nu.dot(zeta)) > 1e-12 * nu.norm() * zeta.norm())
        throw ValidationError("zeta must be tangential (orthogonal to nu)");
    const Eigen::Matrix3d M = A.matrix(), Mt = At.matrix();
    const Eigen::Vector3d Avv = (M * nu).cross(nu);
    const Eigen::Vector3d Atvv = (Mt * nu).cross(nu);
    const Eigen::Vector3d Amix = (M * zeta).cross(nu) + (M * nu).cross(zeta);
    const Eigen::Vector3d Atmix = (Mt * zeta).cross(nu) + (Mt * nu).cross(zeta);
    const Eigen::Vector3d Azz = (M * zeta).cross(zeta);
    const Eigen::Vector3d Atzz = (Mt * zeta).cross(zeta);
    const double a = Avv.squaredNorm() + Atvv.squaredNorm();
    const double b = Avv.dot(Amix) + Atvv.dot(Atmix);
    const double c = -(Avv.dot(Azz) + Atvv.dot(Atzz));
    return {a, b, c};
}

} // namespace selast
