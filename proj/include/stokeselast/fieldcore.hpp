#pragma once

#include <Eigen/Core>
#include <functional>
#include <string_view>

#include "stokeselast/errors.hpp"

namespace selast {

/// Site family on the staggered rectangular grid.
///
/// CellCenter : ((i+1/2)hx, (j+1/2)hy)   pressure, shear modulus, txx, tyy
/// Node       : (i hx, j hy)             shear stress txy, scalar curl
/// FaceX      : (i hx, (j+1/2)hy)        x-velocity u1
/// FaceY      : ((i+1/2)hx, j hy)        y-velocity u2
enum class Stagger { CellCenter, Node, FaceX, FaceY };

const char* stagger_name(Stagger s);
Stagger stagger_from_name(std::string_view name);

/// Rectangular staggered grid: nx-by-ny cells of size hx-by-hy with the
/// lower-left corner at (x0, y0). At least 4 cells per axis.
struct Grid2 {
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    double x0 = 0.0, y0 = 0.0;

    Grid2() = default;
    Grid2(int nx_, int ny_, double hx_, double hy_, double x0_ = 0.0, double y0_ = 0.0);

    static Grid2 rectangle(int nx, int ny, double lx, double ly,
                           double x0 = 0.0, double y0 = 0.0);
    static Grid2 unit_square(int n) { return rectangle(n, n, 1.0, 1.0); }

    double lx() const { return nx * hx; }
    double ly() const { return ny * hy; }
    double area() const { return lx() * ly(); }

    bool operator==(const Grid2&) const = default;
};

int stagger_count_x(const Grid2& g, Stagger s);
int stagger_count_y(const Grid2& g, Stagger s);
int site_count(const Grid2& g, Stagger s);

/// One scalar quantity sampled at every site of one stagger family.
/// Values are stored row-major: index = j * count_x + i.
struct ScalarField {
    Grid2 grid;
    Stagger location = Stagger::CellCenter;
    Eigen::VectorXd values;

    ScalarField() = default;
    ScalarField(const Grid2& g, Stagger loc, double fill = 0.0);

    static ScalarField sampled(const Grid2& g, Stagger loc,
                               const std::function<double(double, double)>& f);

    int nxs() const { return stagger_count_x(grid, location); }
    int nys() const { return stagger_count_y(grid, location); }

    double& operator()(int i, int j) { return values[j * nxs() + i]; }
    double operator()(int i, int j) const { return values[j * nxs() + i]; }

    /// Physical coordinates of site (i, j).
    double x(int i) const;
    double y(int j) const;

    bool finite() const { return values.allFinite(); }
};

/// Two-component displacement/velocity field. The canonical layout is
/// face-staggered (ux on x-faces, uy on y-faces); the collocated variant
/// carries both components at nodes.
struct VectorField2 {
    ScalarField ux, uy;

    static VectorField2 faces(const Grid2& g, double fill = 0.0);
    static VectorField2 nodes(const Grid2& g, double fill = 0.0);
    static VectorField2 sampled_faces(const Grid2& g,
                                      const std::function<double(double, double)>& fx,
                                      const std::function<double(double, double)>& fy);
    static VectorField2 sampled_nodes(const Grid2& g,
                                      const std::function<double(double, double)>& fx,
                                      const std::function<double(double, double)>& fy);

    const Grid2& grid() const;
    bool face_staggered() const {
        return ux.location == Stagger::FaceX && uy.location == Stagger::FaceY;
    }
    bool collocated() const {
        return ux.location == Stagger::Node && uy.location == Stagger::Node;
    }
    bool finite() const { return ux.finite() && uy.finite(); }
};

/// Convert a collocated field to the face-staggered layout by two-point
/// averaging; face-staggered input is passed through unchanged.
VectorField2 face_staggered(const VectorField2& u);

/// Symmetric gradient storage: diagonal entries at cell centers, the single
/// off-diagonal entry at nodes.
struct SymTensorField2 {
    ScalarField txx, tyy, txy;
    const Grid2& grid() const { return txx.grid; }
};

// ---------------------------------------------------------------------------
// field arithmetic (same grid and stagger required)

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField2 operator+(const VectorField2& a, const VectorField2& b);
VectorField2 operator-(const VectorField2& a, const VectorField2& b);
VectorField2 operator*(double s, const VectorField2& a);

// ---------------------------------------------------------------------------
// discrete differential operators

/// Strain tensor of a face-staggered field: txx = d1 u1 and tyy = d2 u2 by
/// compact face differences at cell centers, txy = (d2 u1 + d1 u2)/2 at nodes
/// (centered in the interior, second-order one-sided at boundary nodes).
/// Exact on affine fields.
SymTensorField2 sym_gradient(const VectorField2& u);

/// Cell-centered divergence d1 u1 + d2 u2 by compact face differences.
ScalarField divergence(const VectorField2& u);

/// Node-centered rotation d1 u2 - d2 u1; annihilates compact-difference
/// gradient fields at interior nodes identically.
ScalarField scalar_curl(const VectorField2& u);

enum class NormMode { Full, Seminorm };

/// Discrete Sobolev norm of order 0..5: repeated same-lattice differencing
/// (centered interior, second-order one-sided boundary layer) and
/// trapezoidal/midpoint quadrature matched to the stagger. Mixed partials
/// enter with their tensor multiplicities. Accurate for smooth,
/// well-resolved fields only.
double sobolev_norm(const ScalarField& f, int order, NormMode mode = NormMode::Full);
double sobolev_norm(const VectorField2& u, int order, NormMode mode = NormMode::Full);

/// Quadrature weight of site (i, j): hx*hy times 1/2-edge trapezoid factors
/// along each node-aligned axis of the stagger.
double quadrature_weight(const Grid2& g, Stagger s, int i, int j);

double inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& f);
double inner(const VectorField2& a, const VectorField2& b);
double l2_norm(const VectorField2& u);

/// First derivatives on the field's own lattice (same stagger out), used by
/// the Sobolev norms: centered interior, 3-point one-sided at the two
/// boundary columns/rows.
ScalarField dx(const ScalarField& f);
ScalarField dy(const ScalarField& f);

/// Exactly divergence-free face field from a node stream function:
/// u1 = d2 psi, u2 = -d1 psi by compact node differences.
VectorField2 from_stream_function(const ScalarField& psi_nodes);

// ---------------------------------------------------------------------------
// grid transfer between a grid and its 2x refinement (same domain)

/// Face field restriction: coarse face values are the averages of the two
/// fine faces lying on the same line. `fine` must live on the doubled grid.
VectorField2 restrict_faces(const Grid2& coarse, const VectorField2& fine);

/// Bilinear prolongation of cell-centered values onto the doubled grid
/// (constant extension across the boundary half-cells).
ScalarField prolongate_cells(const Grid2& fine, const ScalarField& coarse);

} // namespace selast
