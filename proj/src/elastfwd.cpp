#include "stokeselast/elastfwd.hpp"

#include <algorithm>
#include <cmath>

#include "staggered_assembly.hpp"
#include "stokeselast/stokesfwd.hpp"

namespace selast {

std::pair<VectorField2, SolveReport> solve_elasticity(const ElasticityProblem& prob) {
    if (prob.mu.location != Stagger::CellCenter || !(prob.mu.grid == prob.grid))
        throw ValidationError("mu must be cell-centered on the problem grid");
    if (prob.lambda.location != Stagger::CellCenter || !(prob.lambda.grid == prob.grid))
        throw ValidationError("lambda must be cell-centered on the problem grid");
    if (!(prob.mu_floor > 0.0) || prob.mu.values.minCoeff() < prob.mu_floor)
        throw ValidationError("mu violates the positivity floor");
    if (!(prob.lambda_floor > 0.0) || prob.lambda.values.minCoeff() < prob.lambda_floor)
        throw ValidationError("lambda violates the positivity floor");
    if (!prob.boundary_data.face_staggered() || !(prob.boundary_data.grid() == prob.grid))
        throw ValidationError("boundary data must be face-staggered on the problem grid");

    detail::OperatorSpec spec{prob.grid, prob.mu, &prob.lambda, prob.omega2, false};
    const auto bc = detail::BoundaryTraces::from_field(prob.boundary_data);
    SparseMatrix A = detail::assemble_matrix(spec);
    Eigen::VectorXd rhs =
        detail::assemble_rhs(spec, bc, prob.body_force ? &*prob.body_force : nullptr);
    Eigen::VectorXd x;
    SolveReport report;
    try {
        std::tie(x, report) = solve(A, rhs);
    } catch (const SolverError& e) {
        if (e.near_singular())
            throw SolverError(std::string("omega2 near eigenvalue: ") + e.what(), true);
        throw;
    }
    return {detail::velocity_from_solution(spec, x, bc), report};
}

LimitStudyResult limit_study(const Grid2& grid, const ScalarField& mu, double omega2,
                             const VectorField2& boundary_data,
                             std::vector<double> lambdas) {
    if (lambdas.size() < 4)
        throw ValidationError("limit study needs at least 4 lambda values");
    std::sort(lambdas.begin(), lambdas.end());
    if (!(lambdas.front() > 0.0))
        throw ValidationError("lambda values must be positive");
    if (std::adjacent_find(lambdas.begin(), lambdas.end()) != lambdas.end())
        throw ValidationError("lambda values must be strictly increasing");
    if (lambdas.back() / lambdas.front() < 1e3)
        throw ValidationError("lambda list must span at least 3 decades");

    StokesProblem sp;
    sp.grid = grid;
    sp.mu = mu;
    sp.omega2 = omega2;
    sp.boundary_data = boundary_data;
    const StokesSolution stokes = solve_stokes(sp);

    LimitStudyResult result;
    for (double lam : lambdas) {
        ElasticityProblem ep;
        ep.grid = grid;
        ep.mu = mu;
        ep.lambda = ScalarField(grid, Stagger::CellCenter, lam);
        ep.omega2 = omega2;
        ep.boundary_data = boundary_data;
        auto [u_lam, report] = solve_elasticity(ep);
        const VectorField2 diff = u_lam - stokes.u;
        result.rows.push_back({lam, sobolev_norm(diff, 1, NormMode::Full),
                               l2_norm(divergence(u_lam))});
    }

    auto slope = [&](auto value_of) {
        const int n = int(result.rows.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& row : result.rows) {
            const double lx = std::log(row.lambda), ly = std::log(value_of(row));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    result.h1_slope = slope([](const LimitStudyRow& r) { return r.h1_error; });
    result.div_slope = slope([](const LimitStudyRow& r) { return r.div_norm; });
    return result;
}

} // namespace selast
