#pragma once

// Shared assembly machinery for the staggered (MAC) discretizations of the
// variable-coefficient momentum systems:
//
//   omega^2 u + 2 div(mu grad^s u) + grad p = -f,   div u = 0   (saddle point)
//   grad(lambda div u) + omega^2 u + 2 div(mu grad^s u) = -f    (elasticity)
//
// u1 lives on x-faces, u2 on y-faces, p / mu / lambda at cell centers and the
// node shear stress uses arithmetically averaged mu. Rows are scaled by the
// cell volume and momentum rows are negated so that the assembled matrix is
// symmetric with a positive viscous block. Dirichlet values are eliminated
// into the right-hand side; wall-tangential values enter through ghost
// reflection. Matrix and right-hand side are emitted by one stencil pass so
// the two can never drift apart.

#include <Eigen/Core>
#include <optional>

#include "stokeselast/fieldcore.hpp"
#include "stokeselast/linsolve.hpp"

namespace selast::detail {

/// Dirichlet trace data resolved to assembly sites: normal components at the
/// boundary faces, tangential components at the wall positions used by the
/// ghost reflection.
struct BoundaryTraces {
    Eigen::VectorXd u1_left, u1_right;   // ny values each
    Eigen::VectorXd u1_bottom, u1_top;   // nx+1 wall values at node x positions
    Eigen::VectorXd u2_bottom, u2_top;   // nx values each
    Eigen::VectorXd u2_left, u2_right;   // ny+1 wall values at node y positions

    static BoundaryTraces zero(const Grid2& g);

    /// Sample a face-staggered trace extension: boundary faces directly,
    /// wall-tangential values by quadratic extrapolation from the first
    /// three parallel face layers (exact through quadratics).
    static BoundaryTraces from_field(const VectorField2& bd);
};

/// Unknown numbering: interior u1 faces, interior u2 faces, then (saddle
/// point only) all cell pressures and one zero-mean multiplier.
struct DofMap {
    int nx = 0, ny = 0;
    bool with_pressure = false;

    int n_u1() const { return (nx - 1) * ny; }
    int n_u2() const { return nx * (ny - 1); }
    int n_p() const { return with_pressure ? nx * ny : 0; }
    int size() const { return n_u1() + n_u2() + n_p() + (with_pressure ? 1 : 0); }

    int u1(int i, int j) const { return (i - 1) + j * (nx - 1); }
    int u2(int i, int j) const { return n_u1() + i + (j - 1) * nx; }
    int p(int i, int j) const { return n_u1() + n_u2() + i + j * nx; }
    int mult() const { return size() - 1; }
};

struct OperatorSpec {
    const Grid2& grid;
    const ScalarField& mu;        // cell-centered
    const ScalarField* lambda;    // cell-centered; nullptr outside elasticity
    double omega2 = 0.0;
    bool with_pressure = true;
    // emit the zero-mean multiplier row/column (the bordered solve path
    // assembles without it and handles the constraint algebraically)
    bool with_multiplier = true;
};

double mu_at_node(const ScalarField& mu, int ni, int nj);

SparseMatrix assemble_matrix(const OperatorSpec& spec);

Eigen::VectorXd assemble_rhs(const OperatorSpec& spec, const BoundaryTraces& bc,
                             const VectorField2* body_force);

/// Pack staggered fields into a dof vector (multiplier slot zero).
Eigen::VectorXd gather_solution(const OperatorSpec& spec, const VectorField2& u,
                                const ScalarField* p);

VectorField2 velocity_from_solution(const OperatorSpec& spec, const Eigen::VectorXd& x,
                                    const BoundaryTraces& bc);

/// Cell pressures from the dof vector, discrete mean removed.
ScalarField pressure_from_solution(const OperatorSpec& spec, const Eigen::VectorXd& x);

} // namespace selast::detail
