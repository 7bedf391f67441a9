#include "staggered_assembly.hpp"

#include <vector>

namespace selast::detail {

namespace {

struct Ref {
    int id;        // dof index, or -1 for a known (eliminated) value
    double value;  // meaningful only when id < 0
};

Ref known(double v) { return {-1, v}; }

/// Emits one stencil pass into triplets and/or rhs; known values are moved to
/// the right-hand side with opposite sign.
class Builder {
public:
    Builder(std::vector<Eigen::Triplet<double>>* triplets, Eigen::VectorXd* rhs)
        : triplets_(triplets), rhs_(rhs) {}

    void coeff(int row, Ref ref, double c) {
        if (ref.id >= 0) {
            if (triplets_) triplets_->emplace_back(row, ref.id, c);
        } else if (rhs_) {
            (*rhs_)[row] -= c * ref.value;
        }
    }

    void load(int row, double v) {
        if (rhs_) (*rhs_)[row] += v;
    }

private:
    std::vector<Eigen::Triplet<double>>* triplets_;
    Eigen::VectorXd* rhs_;
};

void assemble_core(const OperatorSpec& spec, const BoundaryTraces& bc,
                   const VectorField2* body_force, Builder& out) {
    const Grid2& g = spec.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx, hy = g.hy, s = hx * hy;
    const ScalarField& mu = spec.mu;
    const DofMap map{nx, ny, spec.with_pressure};

    auto u1_ref = [&](int i, int j) -> Ref {
        if (i == 0) return known(bc.u1_left[j]);
        if (i == nx) return known(bc.u1_right[j]);
        return {map.u1(i, j), 0.0};
    };
    auto u2_ref = [&](int i, int j) -> Ref {
        if (j == 0) return known(bc.u2_bottom[i]);
        if (j == ny) return known(bc.u2_top[i]);
        return {map.u2(i, j), 0.0};
    };

    // pref * sigma_xy(node ni, nj); ghost reflection against the wall traces
    // at boundary nodes. Corner nodes are never requested.
    auto emit_sxy = [&](int row, int ni, int nj, double pref) {
        const double mn = mu_at_node(mu, ni, nj);
        if (nj == 0) {
            out.coeff(row, u1_ref(ni, 0), pref * mn * 2.0 / hy);
            out.coeff(row, known(bc.u1_bottom[ni]), -pref * mn * 2.0 / hy);
        } else if (nj == ny) {
            out.coeff(row, known(bc.u1_top[ni]), pref * mn * 2.0 / hy);
            out.coeff(row, u1_ref(ni, ny - 1), -pref * mn * 2.0 / hy);
        } else {
            out.coeff(row, u1_ref(ni, nj), pref * mn / hy);
            out.coeff(row, u1_ref(ni, nj - 1), -pref * mn / hy);
        }
        if (ni == 0) {
            out.coeff(row, u2_ref(0, nj), pref * mn * 2.0 / hx);
            out.coeff(row, known(bc.u2_left[nj]), -pref * mn * 2.0 / hx);
        } else if (ni == nx) {
            out.coeff(row, known(bc.u2_right[nj]), pref * mn * 2.0 / hx);
            out.coeff(row, u2_ref(nx - 1, nj), -pref * mn * 2.0 / hx);
        } else {
            out.coeff(row, u2_ref(ni, nj), pref * mn / hx);
            out.coeff(row, u2_ref(ni - 1, nj), -pref * mn / hx);
        }
    };

    // pref * lambda_c * div(cell ci, cj)
    auto emit_lambda_div = [&](int row, int ci, int cj, double pref) {
        const double lc = (*spec.lambda)(ci, cj);
        out.coeff(row, u1_ref(ci + 1, cj), pref * lc / hx);
        out.coeff(row, u1_ref(ci, cj), -pref * lc / hx);
        out.coeff(row, u2_ref(ci, cj + 1), pref * lc / hy);
        out.coeff(row, u2_ref(ci, cj), -pref * lc / hy);
    };

    // x-momentum rows
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const int row = map.u1(i, j);
            out.coeff(row, u1_ref(i, j), -s * spec.omega2);
            // -s/hx * (sigma_xx(i,j) - sigma_xx(i-1,j)), sigma_xx = 2 mu d1 u1
            const double cR = -s / hx * 2.0 * mu(i, j) / hx;
            out.coeff(row, u1_ref(i + 1, j), cR);
            out.coeff(row, u1_ref(i, j), -cR);
            const double cL = s / hx * 2.0 * mu(i - 1, j) / hx;
            out.coeff(row, u1_ref(i, j), cL);
            out.coeff(row, u1_ref(i - 1, j), -cL);
            // -s/hy * (sigma_xy(i,j+1) - sigma_xy(i,j))
            emit_sxy(row, i, j + 1, -s / hy);
            emit_sxy(row, i, j, s / hy);
            if (spec.lambda) {
                emit_lambda_div(row, i, j, -s / hx);
                emit_lambda_div(row, i - 1, j, s / hx);
            }
            if (spec.with_pressure) {
                out.coeff(row, Ref{map.p(i, j), 0.0}, -s / hx);
                out.coeff(row, Ref{map.p(i - 1, j), 0.0}, s / hx);
            }
            if (body_force) out.load(row, s * body_force->ux(i, j));
        }

    // y-momentum rows
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int row = map.u2(i, j);
            out.coeff(row, u2_ref(i, j), -s * spec.omega2);
            const double cT = -s / hy * 2.0 * mu(i, j) / hy;
            out.coeff(row, u2_ref(i, j + 1), cT);
            out.coeff(row, u2_ref(i, j), -cT);
            const double cB = s / hy * 2.0 * mu(i, j - 1) / hy;
            out.coeff(row, u2_ref(i, j), cB);
            out.coeff(row, u2_ref(i, j - 1), -cB);
            emit_sxy(row, i + 1, j, -s / hx);
            emit_sxy(row, i, j, s / hx);
            if (spec.lambda) {
                emit_lambda_div(row, i, j, -s / hy);
                emit_lambda_div(row, i, j - 1, s / hy);
            }
            if (spec.with_pressure) {
                out.coeff(row, Ref{map.p(i, j), 0.0}, -s / hy);
                out.coeff(row, Ref{map.p(i, j - 1), 0.0}, s / hy);
            }
            if (body_force) out.load(row, s * body_force->uy(i, j));
        }

    if (spec.with_pressure) {
        // continuity rows plus the zero-mean pressure constraint
        for (int cj = 0; cj < ny; ++cj)
            for (int ci = 0; ci < nx; ++ci) {
                const int row = map.p(ci, cj);
                out.coeff(row, u1_ref(ci + 1, cj), s / hx);
                out.coeff(row, u1_ref(ci, cj), -s / hx);
                out.coeff(row, u2_ref(ci, cj + 1), s / hy);
                out.coeff(row, u2_ref(ci, cj), -s / hy);
                if (spec.with_multiplier) {
                    out.coeff(row, Ref{map.mult(), 0.0}, s);
                    out.coeff(map.mult(), Ref{row, 0.0}, s);
                }
            }
    }
}

void validate_spec(const OperatorSpec& spec) {
    if (spec.mu.location != Stagger::CellCenter || !(spec.mu.grid == spec.grid))
        throw ValidationError("shear modulus must be cell-centered on the problem grid");
    if (spec.lambda &&
        (spec.lambda->location != Stagger::CellCenter || !(spec.lambda->grid == spec.grid)))
        throw ValidationError("lambda must be cell-centered on the problem grid");
    if (spec.omega2 < 0.0) throw ValidationError("omega2 must be non-negative");
}

} // namespace

BoundaryTraces BoundaryTraces::zero(const Grid2& g) {
    BoundaryTraces bc;
    bc.u1_left = Eigen::VectorXd::Zero(g.ny);
    bc.u1_right = Eigen::VectorXd::Zero(g.ny);
    bc.u1_bottom = Eigen::VectorXd::Zero(g.nx + 1);
    bc.u1_top = Eigen::VectorXd::Zero(g.nx + 1);
    bc.u2_bottom = Eigen::VectorXd::Zero(g.nx);
    bc.u2_top = Eigen::VectorXd::Zero(g.nx);
    bc.u2_left = Eigen::VectorXd::Zero(g.ny + 1);
    bc.u2_right = Eigen::VectorXd::Zero(g.ny + 1);
    return bc;
}

BoundaryTraces BoundaryTraces::from_field(const VectorField2& bd) {
    if (!bd.face_staggered())
        throw ValidationError("boundary data must be a face-staggered trace extension");
    const Grid2& g = bd.grid();
    const int nx = g.nx, ny = g.ny;
    BoundaryTraces bc = zero(g);
    for (int j = 0; j < ny; ++j) {
        bc.u1_left[j] = bd.ux(0, j);
        bc.u1_right[j] = bd.ux(nx, j);
    }
    for (int i = 0; i < nx; ++i) {
        bc.u2_bottom[i] = bd.uy(i, 0);
        bc.u2_top[i] = bd.uy(i, ny);
    }
    auto extrap = [](double f0, double f1, double f2) {
        return (15.0 * f0 - 10.0 * f1 + 3.0 * f2) / 8.0;
    };
    for (int i = 0; i <= nx; ++i) {
        bc.u1_bottom[i] = extrap(bd.ux(i, 0), bd.ux(i, 1), bd.ux(i, 2));
        bc.u1_top[i] = extrap(bd.ux(i, ny - 1), bd.ux(i, ny - 2), bd.ux(i, ny - 3));
    }
    for (int j = 0; j <= ny; ++j) {
        bc.u2_left[j] = extrap(bd.uy(0, j), bd.uy(1, j), bd.uy(2, j));
        bc.u2_right[j] = extrap(bd.uy(nx - 1, j), bd.uy(nx - 2, j), bd.uy(nx - 3, j));
    }
    return bc;
}

double mu_at_node(const ScalarField& mu, int ni, int nj) {
    const int nx = mu.grid.nx, ny = mu.grid.ny;
    double acc = 0.0;
    int count = 0;
    for (int cj = nj - 1; cj <= nj; ++cj)
        for (int ci = ni - 1; ci <= ni; ++ci)
            if (ci >= 0 && ci < nx && cj >= 0 && cj < ny) {
                acc += mu(ci, cj);
                ++count;
            }
    return acc / count;
}

SparseMatrix assemble_matrix(const OperatorSpec& spec) {
    validate_spec(spec);
    const DofMap map{spec.grid.nx, spec.grid.ny, spec.with_pressure};
    const int n = spec.with_pressure && !spec.with_multiplier ? map.size() - 1 : map.size();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(size_t(n) * 12);
    Builder b(&triplets, nullptr);
    const BoundaryTraces bc = BoundaryTraces::zero(spec.grid);
    assemble_core(spec, bc, nullptr, b);
    return SparseMatrix(n, triplets, /*symmetric=*/true);
}

Eigen::VectorXd assemble_rhs(const OperatorSpec& spec, const BoundaryTraces& bc,
                             const VectorField2* body_force) {
    validate_spec(spec);
    if (body_force && (!body_force->face_staggered() || !(body_force->grid() == spec.grid)))
        throw ValidationError("body force must be face-staggered on the problem grid");
    const DofMap map{spec.grid.nx, spec.grid.ny, spec.with_pressure};
    const int n = spec.with_pressure && !spec.with_multiplier ? map.size() - 1 : map.size();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    Builder b(nullptr, &rhs);
    assemble_core(spec, bc, body_force, b);
    return rhs;
}

Eigen::VectorXd gather_solution(const OperatorSpec& spec, const VectorField2& u,
                                const ScalarField* p) {
    const Grid2& g = spec.grid;
    const DofMap map{g.nx, g.ny, spec.with_pressure};
    Eigen::VectorXd x = Eigen::VectorXd::Zero(map.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            x[map.u1(i, j)] = u.ux(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            x[map.u2(i, j)] = u.uy(i, j);
    if (spec.with_pressure && p)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                x[map.p(i, j)] = (*p)(i, j);
    return x;
}

VectorField2 velocity_from_solution(const OperatorSpec& spec, const Eigen::VectorXd& x,
                                    const BoundaryTraces& bc) {
    const Grid2& g = spec.grid;
    const DofMap map{g.nx, g.ny, spec.with_pressure};
    VectorField2 u = VectorField2::faces(g);
    for (int j = 0; j < g.ny; ++j) {
        u.ux(0, j) = bc.u1_left[j];
        u.ux(g.nx, j) = bc.u1_right[j];
        for (int i = 1; i < g.nx; ++i) u.ux(i, j) = x[map.u1(i, j)];
    }
    for (int i = 0; i < g.nx; ++i) {
        u.uy(i, 0) = bc.u2_bottom[i];
        u.uy(i, g.ny) = bc.u2_top[i];
    }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u.uy(i, j) = x[map.u2(i, j)];
    return u;
}

ScalarField pressure_from_solution(const OperatorSpec& spec, const Eigen::VectorXd& x) {
    const Grid2& g = spec.grid;
    const DofMap map{g.nx, g.ny, spec.with_pressure};
    ScalarField p(g, Stagger::CellCenter);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            p(i, j) = x[map.p(i, j)];
    p.values.array() -= p.values.mean();
    return p;
}

} // namespace selast::detail
