#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <ostream>
#include <span>

#include "stokeselast/fieldcore.hpp"

namespace selast {

/// Symmetric 3x3 strain tensor stored by its six independent entries.
struct SymTensor3 {
    double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;

    Eigen::Matrix3d matrix() const;
    static SymTensor3 from_matrix(const Eigen::Matrix3d& m);
    static SymTensor3 diagonal(double a, double b, double c) {
        return {a, b, c, 0, 0, 0};
    }
};

/// Principal symbol of the pressure-eliminated coefficient operator in three
/// dimensions: (A xi) x xi. Vanishes exactly when xi is an eigenvector
/// direction of A.
Eigen::Vector3d symbol_3d(const SymTensor3& A, const Eigen::Vector3d& xi);

/// Pointwise/global verdict of a non-degeneracy check: the infimum of the
/// relevant symbol magnitude over tested points and directions, normalized
/// by |xi|^2.
struct ConditionReport {
    double margin = 0.0;
    int argmin_point = 0;
    Eigen::Vector3d argmin_direction = Eigen::Vector3d::Zero();
    int point_samples = 0;
    int direction_samples = 0;
    double threshold = 0.0;
    bool pass = false;
    /// 2D check only: min |d1 u1| (the quantity of the pointwise remark);
    /// reported alongside the determinant margin, no equivalence asserted.
    std::optional<double> secondary_margin;

    void write(std::ostream& os) const;  // key = value lines
};

/// Two-measurement ellipticity margin in 3D:
/// min over points and unit directions of |(A xi) x xi| + |(A~ xi) x xi|.
/// Directions are a Fibonacci sphere lattice plus deterministic local
/// refinement passes around the running minimum.
ConditionReport condition_3d(std::span<const SymTensor3> A_field,
                             std::span<const SymTensor3> Atilde_field, double threshold,
                             int n_directions = 2048);

/// 2D non-degeneracy: margin = min over cells of |det(grad^s u)| with the
/// node shear averaged to centers; also reports min |d1 u1| separately.
ConditionReport nondegeneracy_2d(const VectorField2& u, double threshold = 0.0);

/// 2D principal symbol 2 |xi|^2 d1u1 evaluated at one cell.
double symbol_2d(const VectorField2& u, int ci, int cj, const Eigen::Vector2d& xi);

/// Boundary ODE a m'' + i b m' + c m = 0 reduced from the two-measurement
/// symbol system; roots, decay count, and whether only the trivial decaying
/// solution satisfies m(0) = 0.
struct LopatinskiiReport {
    double a = 0, b = 0, c = 0;
    std::complex<double> root1, root2;
    int decaying = 0;         // roots with negative real part
    bool condition_ok = false;  // decaying <= 1
};

LopatinskiiReport lopatinskii_roots(double a, double b, double c);

/// Coefficients (a, b, c) of the reduced boundary ODE for the tensor pair
/// (A, A~) at inward normal nu and tangent zeta: each vector equation is
/// contracted against its own leading cross product and the two are summed.
std::array<double, 3> lopatinskii_coefficients(const SymTensor3& A, const SymTensor3& At,
                                               const Eigen::Vector3d& nu,
                                               const Eigen::Vector3d& zeta);

} // namespace selast
