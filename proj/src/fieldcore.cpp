#include "stokeselast/fieldcore.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace selast {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
}

// true if the stagger places sites on integer multiples of h along the axis
bool node_aligned_x(Stagger s) { return s == Stagger::Node || s == Stagger::FaceX; }
bool node_aligned_y(Stagger s) { return s == Stagger::Node || s == Stagger::FaceY; }

void require_same_layout(const ScalarField& a, const ScalarField& b) {
    require(a.grid == b.grid && a.location == b.location,
            "fields must share grid and stagger");
}

} // namespace

const char* stagger_name(Stagger s) {
    switch (s) {
        case Stagger::CellCenter: return "cell-center";
        case Stagger::Node: return "node";
        case Stagger::FaceX: return "x-face";
        case Stagger::FaceY: return "y-face";
    }
    return "?";
}

Stagger stagger_from_name(std::string_view name) {
    if (name == "cell-center") return Stagger::CellCenter;
    if (name == "node") return Stagger::Node;
    if (name == "x-face") return Stagger::FaceX;
    if (name == "y-face") return Stagger::FaceY;
    throw ValidationError("unknown stagger tag: " + std::string(name));
}

Grid2::Grid2(int nx_, int ny_, double hx_, double hy_, double x0_, double y0_)
    : nx(nx_), ny(ny_), hx(hx_), hy(hy_), x0(x0_), y0(y0_) {
    require(nx >= 4 && ny >= 4, "grid needs at least 4 cells per axis");
    require(hx > 0.0 && hy > 0.0, "cell sizes must be positive");
}

Grid2 Grid2::rectangle(int nx, int ny, double lx, double ly, double x0, double y0) {
    require(nx >= 4 && ny >= 4, "grid needs at least 4 cells per axis");
    require(lx > 0.0 && ly > 0.0, "domain extents must be positive");
    return Grid2(nx, ny, lx / nx, ly / ny, x0, y0);
}

int stagger_count_x(const Grid2& g, Stagger s) {
    return node_aligned_x(s) ? g.nx + 1 : g.nx;
}

int stagger_count_y(const Grid2& g, Stagger s) {
    return node_aligned_y(s) ? g.ny + 1 : g.ny;
}

int site_count(const Grid2& g, Stagger s) {
    return stagger_count_x(g, s) * stagger_count_y(g, s);
}

ScalarField::ScalarField(const Grid2& g, Stagger loc, double fill)
    : grid(g), location(loc), values(Eigen::VectorXd::Constant(site_count(g, loc), fill)) {}

ScalarField ScalarField::sampled(const Grid2& g, Stagger loc,
                                 const std::function<double(double, double)>& f) {
    ScalarField out(g, loc);
    for (int j = 0; j < out.nys(); ++j)
        for (int i = 0; i < out.nxs(); ++i)
            out(i, j) = f(out.x(i), out.y(j));
    return out;
}

double ScalarField::x(int i) const {
    return grid.x0 + (node_aligned_x(location) ? i * grid.hx : (i + 0.5) * grid.hx);
}

double ScalarField::y(int j) const {
    return grid.y0 + (node_aligned_y(location) ? j * grid.hy : (j + 0.5) * grid.hy);
}

VectorField2 VectorField2::faces(const Grid2& g, double fill) {
    return {ScalarField(g, Stagger::FaceX, fill), ScalarField(g, Stagger::FaceY, fill)};
}

VectorField2 VectorField2::nodes(const Grid2& g, double fill) {
    return {ScalarField(g, Stagger::Node, fill), ScalarField(g, Stagger::Node, fill)};
}

VectorField2 VectorField2::sampled_faces(const Grid2& g,
                                         const std::function<double(double, double)>& fx,
                                         const std::function<double(double, double)>& fy) {
    return {ScalarField::sampled(g, Stagger::FaceX, fx),
            ScalarField::sampled(g, Stagger::FaceY, fy)};
}

VectorField2 VectorField2::sampled_nodes(const Grid2& g,
                                         const std::function<double(double, double)>& fx,
                                         const std::function<double(double, double)>& fy) {
    return {ScalarField::sampled(g, Stagger::Node, fx),
            ScalarField::sampled(g, Stagger::Node, fy)};
}

const Grid2& VectorField2::grid() const {
    require(ux.grid == uy.grid, "vector field components must share one grid");
    return ux.grid;
}

VectorField2 face_staggered(const VectorField2& u) {
    if (u.face_staggered()) return u;
    require(u.collocated(), "expected a face-staggered or collocated field");
    const Grid2& g = u.grid();
    VectorField2 out = VectorField2::faces(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            out.ux(i, j) = 0.5 * (u.ux(i, j) + u.ux(i, j + 1));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.uy(i, j) = 0.5 * (u.uy(i, j) + u.uy(i + 1, j));
    return out;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_layout(a, b);
    ScalarField out = a;
    out.values += b.values;
    return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    require_same_layout(a, b);
    ScalarField out = a;
    out.values -= b.values;
    return out;
}

ScalarField operator*(double s, const ScalarField& a) {
    ScalarField out = a;
    out.values *= s;
    return out;
}

VectorField2 operator+(const VectorField2& a, const VectorField2& b) {
    return {a.ux + b.ux, a.uy + b.uy};
}

VectorField2 operator-(const VectorField2& a, const VectorField2& b) {
    return {a.ux - b.ux, a.uy - b.uy};
}

VectorField2 operator*(double s, const VectorField2& a) {
    return {s * a.ux, s * a.uy};
}

namespace {

// d/dy of the x-face component evaluated at node (i, nj). Centered between
// the two adjacent face rows in the interior; at wall nodes a 3-point
// one-sided stencil on the half-offset rows (exact through quadratics).
double node_dy_of_ux(const ScalarField& ux, int i, int nj) {
    const double hy = ux.grid.hy;
    const int ny = ux.grid.ny;
    if (nj == 0)
        return (-2.0 * ux(i, 0) + 3.0 * ux(i, 1) - ux(i, 2)) / hy;
    if (nj == ny)
        return (2.0 * ux(i, ny - 1) - 3.0 * ux(i, ny - 2) + ux(i, ny - 3)) / hy;
    return (ux(i, nj) - ux(i, nj - 1)) / hy;
}

// d/dx of the y-face component at node (ni, j); mirror of the above.
double node_dx_of_uy(const ScalarField& uy, int ni, int j) {
    const double hx = uy.grid.hx;
    const int nx = uy.grid.nx;
    if (ni == 0)
        return (-2.0 * uy(0, j) + 3.0 * uy(1, j) - uy(2, j)) / hx;
    if (ni == nx)
        return (2.0 * uy(nx - 1, j) - 3.0 * uy(nx - 2, j) + uy(nx - 3, j)) / hx;
    return (uy(ni, j) - uy(ni - 1, j)) / hx;
}

void require_faces(const VectorField2& u, const char* op) {
    if (!u.face_staggered())
        throw ValidationError(std::string(op) + " requires a face-staggered field");
}

} // namespace

SymTensorField2 sym_gradient(const VectorField2& u) {
    require_faces(u, "sym_gradient");
    const Grid2& g = u.grid();
    SymTensorField2 s{ScalarField(g, Stagger::CellCenter), ScalarField(g, Stagger::CellCenter),
                      ScalarField(g, Stagger::Node)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            s.txx(i, j) = (u.ux(i + 1, j) - u.ux(i, j)) / g.hx;
            s.tyy(i, j) = (u.uy(i, j + 1) - u.uy(i, j)) / g.hy;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            s.txy(i, j) = 0.5 * (node_dy_of_ux(u.ux, i, j) + node_dx_of_uy(u.uy, i, j));
    return s;
}

ScalarField divergence(const VectorField2& u) {
    require_faces(u, "divergence");
    const Grid2& g = u.grid();
    ScalarField d(g, Stagger::CellCenter);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            d(i, j) = (u.ux(i + 1, j) - u.ux(i, j)) / g.hx +
                      (u.uy(i, j + 1) - u.uy(i, j)) / g.hy;
    return d;
}

ScalarField scalar_curl(const VectorField2& u) {
    require_faces(u, "scalar_curl");
    const Grid2& g = u.grid();
    ScalarField c(g, Stagger::Node);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            c(i, j) = node_dx_of_uy(u.uy, i, j) - node_dy_of_ux(u.ux, i, j);
    return c;
}

double quadrature_weight(const Grid2& g, Stagger s, int i, int j) {
    double w = g.hx * g.hy;
    if (node_aligned_x(s) && (i == 0 || i == g.nx)) w *= 0.5;
    if (node_aligned_y(s) && (j == 0 || j == g.ny)) w *= 0.5;
    return w;
}

double inner(const ScalarField& a, const ScalarField& b) {
    require_same_layout(a, b);
    double acc = 0.0;
    for (int j = 0; j < a.nys(); ++j)
        for (int i = 0; i < a.nxs(); ++i)
            acc += quadrature_weight(a.grid, a.location, i, j) * a(i, j) * b(i, j);
    return acc;
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double inner(const VectorField2& a, const VectorField2& b) {
    return inner(a.ux, b.ux) + inner(a.uy, b.uy);
}

double l2_norm(const VectorField2& u) { return std::sqrt(inner(u, u)); }

namespace {

// Finite-difference weights for the m-th derivative at offset 0 from the
// given node offsets (Fornberg's recursion).
std::vector<double> fd_weights(const std::vector<double>& nodes, int m) {
    const int n = int(nodes.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        double c5 = c4;
        c4 = nodes[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = c[j][m];
    return w;
}

// Per-output-index stencils for the k-th derivative along one axis of n
// uniform samples: centered in the interior, second-order one-sided windows
// anchored at the edges for the boundary layer.
struct AxisStencils {
    std::vector<int> start;
    std::vector<std::vector<double>> weights;
};

AxisStencils axis_stencils(int n, int k, double h) {
    const int half = (k + 1) / 2;
    const int wc = 2 * half + 1;  // centered width
    const int wb = k + 2;         // one-sided width, O(h^2)
    if (n < std::max(wc, wb))
        throw ValidationError("field too coarse for the requested derivative order");
    const double hk = std::pow(h, k);
    AxisStencils st;
    st.start.resize(n);
    st.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        int s, w;
        if (i >= half && i + half < n) {
            s = i - half;
            w = wc;
        } else if (i < half) {
            s = 0;
            w = wb;
        } else {
            s = n - wb;
            w = wb;
        }
        std::vector<double> nodes(w);
        for (int t = 0; t < w; ++t) nodes[t] = double(s + t - i);
        std::vector<double> weights = fd_weights(nodes, k);
        for (double& ww : weights) ww /= hk;
        st.start[i] = s;
        st.weights[i] = std::move(weights);
    }
    return st;
}

ScalarField axis_derivative_x(const ScalarField& f, int k) {
    if (k == 0) return f;
    const int nx = f.nxs(), ny = f.nys();
    const AxisStencils st = axis_stencils(nx, k, f.grid.hx);
    ScalarField out(f.grid, f.location);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0;
            const auto& w = st.weights[i];
            for (size_t t = 0; t < w.size(); ++t) acc += w[t] * f(st.start[i] + int(t), j);
            out(i, j) = acc;
        }
    return out;
}

ScalarField axis_derivative_y(const ScalarField& f, int k) {
    if (k == 0) return f;
    const int nx = f.nxs(), ny = f.nys();
    const AxisStencils st = axis_stencils(ny, k, f.grid.hy);
    ScalarField out(f.grid, f.location);
    for (int j = 0; j < ny; ++j) {
        const auto& w = st.weights[j];
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0;
            for (size_t t = 0; t < w.size(); ++t) acc += w[t] * f(i, st.start[j] + int(t));
            out(i, j) = acc;
        }
    }
    return out;
}

double binomial(int n, int k) {
    double v = 1.0;
    for (int t = 1; t <= k; ++t) v *= double(n - k + t) / double(t);
    return v;
}

} // namespace

ScalarField dx(const ScalarField& f) { return axis_derivative_x(f, 1); }

ScalarField dy(const ScalarField& f) { return axis_derivative_y(f, 1); }

double sobolev_norm(const ScalarField& f, int order, NormMode mode) {
    require(order >= 0 && order <= 5, "sobolev_norm supports orders 0..5");
    double total = 0.0;
    // each mixed partial d1^a d2^b uses the direct per-order stencil along
    // each axis; a+b = k enters with its tensor multiplicity binom(k, a)
    for (int a = 0; a <= order; ++a) {
        const ScalarField fa = axis_derivative_x(f, a);
        for (int b = 0; a + b <= order; ++b) {
            const int k = a + b;
            if (mode == NormMode::Full || k == order) {
                const ScalarField d = axis_derivative_y(fa, b);
                total += binomial(k, a) * inner(d, d);
            }
        }
    }
    return std::sqrt(total);
}

double sobolev_norm(const VectorField2& u, int order, NormMode mode) {
    const double nx = sobolev_norm(u.ux, order, mode);
    const double ny = sobolev_norm(u.uy, order, mode);
    return std::sqrt(nx * nx + ny * ny);
}

VectorField2 from_stream_function(const ScalarField& psi) {
    require(psi.location == Stagger::Node, "stream function must live at nodes");
    const Grid2& g = psi.grid;
    VectorField2 u = VectorField2::faces(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            u.ux(i, j) = (psi(i, j + 1) - psi(i, j)) / g.hy;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            u.uy(i, j) = -(psi(i + 1, j) - psi(i, j)) / g.hx;
    return u;
}

namespace {

void require_doubled(const Grid2& coarse, const Grid2& fine) {
    require(fine.nx == 2 * coarse.nx && fine.ny == 2 * coarse.ny &&
                fine.x0 == coarse.x0 && fine.y0 == coarse.y0 &&
                fine.hx == 0.5 * coarse.hx && fine.hy == 0.5 * coarse.hy,
            "grid transfer requires an exact 2x refinement of the same domain");
}

} // namespace

VectorField2 restrict_faces(const Grid2& coarse, const VectorField2& fine) {
    require(fine.face_staggered(), "restrict_faces requires a face-staggered field");
    require_doubled(coarse, fine.grid());
    VectorField2 out = VectorField2::faces(coarse);
    for (int j = 0; j < coarse.ny; ++j)
        for (int i = 0; i <= coarse.nx; ++i)
            out.ux(i, j) = 0.5 * (fine.ux(2 * i, 2 * j) + fine.ux(2 * i, 2 * j + 1));
    for (int j = 0; j <= coarse.ny; ++j)
        for (int i = 0; i < coarse.nx; ++i)
            out.uy(i, j) = 0.5 * (fine.uy(2 * i, 2 * j) + fine.uy(2 * i + 1, 2 * j));
    return out;
}

ScalarField prolongate_cells(const Grid2& fine, const ScalarField& coarse) {
    require(coarse.location == Stagger::CellCenter,
            "prolongate_cells requires a cell-centered field");
    require_doubled(coarse.grid, fine);
    const int cn = coarse.grid.nx, cm = coarse.grid.ny;
    ScalarField out(fine, Stagger::CellCenter);
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i) {
            const double x = (i + 0.5) / 2.0 - 0.5;  // coarse index space
            const double y = (j + 0.5) / 2.0 - 0.5;
            const int i0 = std::clamp(int(std::floor(x)), 0, cn - 2);
            const int j0 = std::clamp(int(std::floor(y)), 0, cm - 2);
            const double tx = std::clamp(x - i0, 0.0, 1.0);
            const double ty = std::clamp(y - j0, 0.0, 1.0);
            out(i, j) = (1 - tx) * (1 - ty) * coarse(i0, j0) +
                        tx * (1 - ty) * coarse(i0 + 1, j0) +
                        (1 - tx) * ty * coarse(i0, j0 + 1) +
                        tx * ty * coarse(i0 + 1, j0 + 1);
        }
    return out;
}

} // namespace selast
