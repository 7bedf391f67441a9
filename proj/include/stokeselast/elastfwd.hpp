#pragma once

#include <optional>
#include <vector>

#include "stokeselast/fieldcore.hpp"
#include "stokeselast/linsolve.hpp"

namespace selast {

/// Compressible time-harmonic elasticity:
///
///   grad(lambda div u) + omega2 u + 2 div(mu grad^s u) + f = 0   in Omega
///   u = F                                                        on the boundary
///
/// Discretized on the same staggered layout as the Stokes system, with no
/// pressure unknown.
struct ElasticityProblem {
    Grid2 grid;
    ScalarField mu;      // cell-centered
    ScalarField lambda;  // cell-centered
    double omega2 = 0.0;
    VectorField2 boundary_data;
    std::optional<VectorField2> body_force;
    double mu_floor = 1e-8;
    double lambda_floor = 1e-8;
};

std::pair<VectorField2, SolveReport> solve_elasticity(const ElasticityProblem& prob);

struct LimitStudyRow {
    double lambda;
    double h1_error;  // H1 distance between the elastic and Stokes velocities
    double div_norm;  // L2 norm of the discrete divergence of the elastic velocity
};

/// Incompressible-limit sweep: one Stokes solve, one elasticity solve per
/// lambda (held spatially constant per study point), and least-squares
/// log-log slopes of both error columns against lambda.
struct LimitStudyResult {
    std::vector<LimitStudyRow> rows;
    double h1_slope = 0.0;
    double div_slope = 0.0;
};

LimitStudyResult limit_study(const Grid2& grid, const ScalarField& mu, double omega2,
                             const VectorField2& boundary_data,
                             std::vector<double> lambdas);

} // namespace selast
