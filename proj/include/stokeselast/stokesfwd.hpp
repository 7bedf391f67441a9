#pragma once

#include <memory>
#include <optional>

#include "stokeselast/fieldcore.hpp"
#include "stokeselast/linsolve.hpp"

namespace selast {

/// Time-harmonic incompressible Stokes problem with variable shear modulus:
///
///   omega2 u + 2 div(mu grad^s u) + grad p + f = 0   in Omega
///   div u = 0                                        in Omega
///   u = F                                            on the boundary
///   integral of p = 0
///
/// boundary_data is a face-staggered trace extension: boundary faces are read
/// directly, wall-tangential values are extrapolated from the first interior
/// layers, so the field must be meaningful within three cells of the
/// boundary (the generators fill it everywhere). body_force is a test-only
/// extension used by the manufactured-solution harness and the adjoint path.
struct StokesProblem {
    Grid2 grid;
    ScalarField mu;  // cell-centered
    double omega2 = 0.0;
    VectorField2 boundary_data;
    std::optional<VectorField2> body_force;
    double mu_floor = 1e-8;
};

struct StokesSolution {
    VectorField2 u;
    ScalarField p;  // cell-centered, zero mean
    SolveReport report;
};

/// Assembled saddle-point system: symmetric indefinite, momentum rows scaled
/// by cell volume and negated, continuity rows volume-scaled, one zero-mean
/// pressure multiplier row.
std::pair<SparseMatrix, Eigen::VectorXd> assemble_stokes(const StokesProblem& prob);

StokesSolution solve_stokes(const StokesProblem& prob);

/// L2 norm of the discrete momentum plus continuity residual of (u, p)
/// against the problem data.
double residual_norm(const StokesProblem& prob, const StokesSolution& sol);

/// Factorized forward operator for a fixed (grid, mu, omega2). Reused across
/// right-hand sides: many boundary data sets share one factorization, and the
/// adjoint solve is the same operator with homogeneous Dirichlet data.
class StokesOperator {
public:
    StokesOperator(const Grid2& grid, const ScalarField& mu, double omega2,
                   double tol = 1e-10, double mu_floor = 1e-8);
    ~StokesOperator();
    StokesOperator(StokesOperator&&) noexcept;
    StokesOperator& operator=(StokesOperator&&) noexcept;

    const Grid2& grid() const;
    const ScalarField& mu() const;

    /// Re-target the operator at a new coefficient on the same grid with the
    /// same omega2; reuses the symbolic factorization analysis.
    void reset_mu(const ScalarField& mu);

    StokesSolution solve(const VectorField2& boundary_data,
                         const VectorField2* body_force = nullptr) const;

    /// Solve  omega2 v + 2 div(mu grad^s v) + grad q = load,  div v = 0,
    /// v = 0 on the boundary, zero-mean q. This is the adjoint building
    /// block; `load` is sampled at the faces.
    StokesSolution solve_homogeneous(const VectorField2& load) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace selast
