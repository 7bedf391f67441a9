#pragma once

// Manufactured-solution harness: analytically chosen fields with hand-derived
// forcing terms, used to verify discretization order of the forward and
// adjoint solvers. All cases live on the unit square.

#include <functional>

#include "stokeselast/fieldcore.hpp"
#include "stokeselast/stokesfwd.hpp"

namespace selast {

using SpaceFunc = std::function<double(double, double)>;

struct ManufacturedStokes {
    SpaceFunc u1, u2, p, mu, f1, f2;
    double omega2 = 0.0;
};

/// Divergence-free stream-function velocity with variable shear modulus and
/// a nonzero pressure, omega2 = 1. The forcing makes the exact fields solve
/// the forward system.
ManufacturedStokes manufactured_stokes();

/// Plane channel flow u = (y(1-y), 0) with constant mu and linear pressure;
/// zero forcing, omega2 = 0.
ManufacturedStokes poiseuille(double mu0);

struct ManufacturedElasticity {
    SpaceFunc u1, u2, mu, lambda, f1, f2;
    double omega2 = 0.0;
};

/// Stream-function velocity plus a compressible component; constant lambda,
/// variable mu, omega2 = 1.
ManufacturedElasticity manufactured_elasticity();

/// Sample a manufactured case onto a grid: mu at centers, exact trace
/// extension as boundary data, forcing at the faces.
StokesProblem make_stokes_problem(const Grid2& grid, const ManufacturedStokes& c);

VectorField2 exact_velocity_faces(const Grid2& grid, const SpaceFunc& u1, const SpaceFunc& u2);

} // namespace selast
