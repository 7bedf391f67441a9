#include "stokeselast/stokesfwd.hpp"

#include <cmath>

#include "staggered_assembly.hpp"

namespace selast {

namespace {

void validate_problem(const Grid2& grid, const ScalarField& mu, double mu_floor,
                      const VectorField2& boundary_data) {
    if (mu.location != Stagger::CellCenter || !(mu.grid == grid))
        throw ValidationError("mu must be cell-centered on the problem grid");
    if (!(mu_floor > 0.0))
        throw ValidationError("mu_floor must be positive");
    if (mu.values.minCoeff() < mu_floor)
        throw ValidationError("mu violates the positivity floor");
    if (!boundary_data.face_staggered() || !(boundary_data.grid() == grid))
        throw ValidationError("boundary data must be face-staggered on the problem grid");
}

} // namespace

// The saddle system carries one zero-mean pressure multiplier whose dense
// row/column would ruin the sparse factorization. The multiplier couples
// through e = s z with z the constant-pressure vector, which spans the inner
// matrix's nullspace, so the bordered system can be solved exactly from one
// factorization of the inner matrix with a single pinned pressure entry:
//
//   lambda = z.b / (s z.z),  y = (K + beta e0 e0^T)^{-1} (b - s lambda z),
//   x = y - (z.y / z.z) z.
//
// The pin never perturbs the result (z.(b - s lambda z) = 0 forces the
// pinned entry of y to vanish); residuals are still verified against the
// bordered operator and refined if needed.
struct StokesOperator::Impl {
    Grid2 grid;
    ScalarField mu;
    double omega2;
    double tol;
    double mu_floor;

    detail::DofMap map;
    int n_inner = 0;
    int pin = 0;         // first pressure dof
    double beta = 1.0;   // pin strength
    SparseMatrix inner;
    Factorization factor;

    detail::OperatorSpec inner_spec() const {
        return {grid, mu, nullptr, omega2, true, /*with_multiplier=*/false};
    }

    detail::OperatorSpec full_spec() const { return {grid, mu, nullptr, omega2, true}; }

    static SparseMatrix pinned_matrix(const detail::OperatorSpec& spec, int pin,
                                      double beta) {
        SparseMatrix base = detail::assemble_matrix(spec);
        std::vector<Eigen::Triplet<double>> extra;
        extra.reserve(size_t(base.storage().nonZeros()) + 1);
        for (int k = 0; k < base.storage().outerSize(); ++k)
            for (SparseMatrix::Storage::InnerIterator it(base.storage(), k); it; ++it)
                extra.emplace_back(int(it.row()), int(it.col()), it.value());
        extra.emplace_back(pin, pin, beta);
        return SparseMatrix(base.size(), extra, /*symmetric=*/true);
    }

    Impl(const Grid2& g, const ScalarField& m, double w2, double tol_, double floor)
        : grid(g), mu(m), omega2(w2), tol(tol_), mu_floor(floor),
          map{g.nx, g.ny, true}, n_inner(map.size() - 1), pin(map.p(0, 0)),
          beta(g.hx * g.hy), inner(pinned_matrix(inner_spec(), map.p(0, 0), g.hx * g.hy)),
          factor(inner) {}

    void retarget(const ScalarField& m) {
        mu = m;
        inner = pinned_matrix(inner_spec(), pin, beta);
        factor.refactorize(inner);
    }

    int n_p() const { return grid.nx * grid.ny; }
    bool is_pressure(int k) const { return k >= map.p(0, 0) && k < n_inner; }

    // bordered correction for a right-hand side (b, c); exact up to rounding
    std::pair<Eigen::VectorXd, double> bordered(const Eigen::VectorXd& b, double c) const {
        const double s = grid.hx * grid.hy;
        const int p0 = map.p(0, 0);
        double zb = 0.0;
        for (int k = p0; k < n_inner; ++k) zb += b[k];
        const double lambda = zb / (s * n_p());
        Eigen::VectorXd bhat = b;
        for (int k = p0; k < n_inner; ++k) bhat[k] -= lambda * s;
        auto [y, report] = factor.solve(bhat, tol);
        double zy = 0.0;
        for (int k = p0; k < n_inner; ++k) zy += y[k];
        const double alpha = (c / s - zy) / n_p();
        for (int k = p0; k < n_inner; ++k) y[k] += alpha;
        return {std::move(y), lambda};
    }

    StokesSolution run(const detail::BoundaryTraces& bc, const VectorField2* body) const {
        const Eigen::VectorXd b = detail::assemble_rhs(inner_spec(), bc, body);
        const double s = grid.hx * grid.hy;
        const int p0 = map.p(0, 0);

        StokesSolution sol;
        sol.report.method = SolveMethod::Direct;

        const double bnorm = b.norm();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_inner);
        double lambda = 0.0;
        if (bnorm > 0.0) {
            try {
                std::tie(x, lambda) = bordered(b, 0.0);
                // residual of the full bordered system; the pin entry is not
                // part of the true operator and is compensated explicitly
                auto residual = [&](const Eigen::VectorXd& xv, double lv) {
                    Eigen::VectorXd r = inner.apply(xv) - b;
                    r[pin] -= beta * xv[pin];
                    double zx = 0.0;
                    for (int k = p0; k < n_inner; ++k) {
                        r[k] += s * lv;
                        zx += xv[k];
                    }
                    const double rc = s * zx;
                    return std::sqrt(r.squaredNorm() + rc * rc) / bnorm;
                };
                double res = residual(x, lambda);
                int passes = 0;
                while (res > tol && passes < 3) {
                    Eigen::VectorXd r = inner.apply(x) - b;
                    r[pin] -= beta * x[pin];
                    double zx = 0.0;
                    for (int k = p0; k < n_inner; ++k) {
                        r[k] += s * lambda;
                        zx += x[k];
                    }
                    auto [dx, dl] = bordered(r, s * zx);
                    x -= dx;
                    lambda -= dl;
                    ++passes;
                    const double next = residual(x, lambda);
                    if (next >= res) break;
                    res = next;
                }
                if (res > tol)
                    throw SolverError("residual stalled above tolerance "
                                      "(near-singular matrix)",
                                      true);
                sol.report.relative_residual = res;
                sol.report.iterations = passes;
            } catch (const SolverError& e) {
                if (e.near_singular())
                    throw SolverError(std::string("omega2 near eigenvalue: ") + e.what(),
                                      true);
                throw;
            }
        }

        sol.u = detail::velocity_from_solution(full_spec(), x, bc);
        sol.p = detail::pressure_from_solution(full_spec(), x);
        if (!sol.u.finite() || !sol.p.finite())
            throw SolverError("omega2 near eigenvalue: non-finite solution", true);
        return sol;
    }
};

StokesOperator::StokesOperator(const Grid2& grid, const ScalarField& mu, double omega2,
                               double tol, double mu_floor) {
    if (mu.location != Stagger::CellCenter || !(mu.grid == grid))
        throw ValidationError("mu must be cell-centered on the problem grid");
    if (!(mu_floor > 0.0) || mu.values.minCoeff() < mu_floor)
        throw ValidationError("mu violates the positivity floor");
    try {
        impl_ = std::make_unique<Impl>(grid, mu, omega2, tol, mu_floor);
    } catch (const SolverError& e) {
        if (e.near_singular())
            throw SolverError(std::string("omega2 near eigenvalue: ") + e.what(), true);
        throw;
    }
}

StokesOperator::~StokesOperator() = default;
StokesOperator::StokesOperator(StokesOperator&&) noexcept = default;
StokesOperator& StokesOperator::operator=(StokesOperator&&) noexcept = default;

const Grid2& StokesOperator::grid() const { return impl_->grid; }

const ScalarField& StokesOperator::mu() const { return impl_->mu; }

void StokesOperator::reset_mu(const ScalarField& mu) {
    if (mu.location != Stagger::CellCenter || !(mu.grid == impl_->grid))
        throw ValidationError("mu must be cell-centered on the operator grid");
    if (mu.values.minCoeff() < impl_->mu_floor)
        throw ValidationError("mu violates the positivity floor");
    try {
        impl_->retarget(mu);
    } catch (const SolverError& e) {
        if (e.near_singular())
            throw SolverError(std::string("omega2 near eigenvalue: ") + e.what(), true);
        throw;
    }
}

StokesSolution StokesOperator::solve(const VectorField2& boundary_data,
                                     const VectorField2* body_force) const {
    if (!boundary_data.face_staggered() || !(boundary_data.grid() == impl_->grid))
        throw ValidationError("boundary data must be face-staggered on the problem grid");
    return impl_->run(detail::BoundaryTraces::from_field(boundary_data), body_force);
}

StokesSolution StokesOperator::solve_homogeneous(const VectorField2& load) const {
    VectorField2 negated = -1.0 * load;
    return impl_->run(detail::BoundaryTraces::zero(impl_->grid), &negated);
}

std::pair<SparseMatrix, Eigen::VectorXd> assemble_stokes(const StokesProblem& prob) {
    validate_problem(prob.grid, prob.mu, prob.mu_floor, prob.boundary_data);
    detail::OperatorSpec spec{prob.grid, prob.mu, nullptr, prob.omega2, true};
    SparseMatrix A = detail::assemble_matrix(spec);
    Eigen::VectorXd rhs =
        detail::assemble_rhs(spec, detail::BoundaryTraces::from_field(prob.boundary_data),
                             prob.body_force ? &*prob.body_force : nullptr);
    return {std::move(A), std::move(rhs)};
}

StokesSolution solve_stokes(const StokesProblem& prob) {
    validate_problem(prob.grid, prob.mu, prob.mu_floor, prob.boundary_data);
    StokesOperator op(prob.grid, prob.mu, prob.omega2, 1e-10, prob.mu_floor);
    return op.solve(prob.boundary_data, prob.body_force ? &*prob.body_force : nullptr);
}

double residual_norm(const StokesProblem& prob, const StokesSolution& sol) {
    validate_problem(prob.grid, prob.mu, prob.mu_floor, prob.boundary_data);
    if (!(sol.u.grid() == prob.grid))
        throw ValidationError("solution grid does not match problem grid");
    detail::OperatorSpec spec{prob.grid, prob.mu, nullptr, prob.omega2, true};
    SparseMatrix A = detail::assemble_matrix(spec);
    Eigen::VectorXd rhs =
        detail::assemble_rhs(spec, detail::BoundaryTraces::from_field(prob.boundary_data),
                             prob.body_force ? &*prob.body_force : nullptr);
    Eigen::VectorXd x = detail::gather_solution(spec, sol.u, &sol.p);
    Eigen::VectorXd r = A.apply(x) - rhs;
    // rows carry a cell-volume scaling; undo it so the result is the L2 norm
    // of the pointwise strong-form residual
    const double s = prob.grid.hx * prob.grid.hy;
    const detail::DofMap map{prob.grid.nx, prob.grid.ny, true};
    double acc = 0.0;
    for (int k = 0; k < map.mult(); ++k) acc += r[k] * r[k] / s;
    return std::sqrt(acc);
}

} // namespace selast
