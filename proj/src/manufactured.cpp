#include "stokeselast/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace selast {

namespace {
constexpr double PI = std::numbers::pi;
}

ManufacturedStokes manufactured_stokes() {
    // u = (d2 psi, -d1 psi) with psi = sin^2(pi x) sin^2(pi y),
    // mu = 1 + 0.5 sin(pi x) sin(pi y), p = sin(2 pi x) cos(2 pi y).
    //
    // Strain entries and their derivatives (e22 = -e11 by incompressibility):
    //   e11 = pi^2 sin(2px) sin(2py)
    //   e12 = pi^2 (sin^2(px) cos(2py) - cos(2px) sin^2(py))
    //   d1 e12 = pi^3 sin(2px),  d2 e12 = -pi^3 sin(2py)
    ManufacturedStokes c;
    c.omega2 = 1.0;
    c.u1 = [](double x, double y) {
        return PI * std::sin(PI * x) * std::sin(PI * x) * std::sin(2 * PI * y);
    };
    c.u2 = [](double x, double y) {
        return -PI * std::sin(2 * PI * x) * std::sin(PI * y) * std::sin(PI * y);
    };
    c.p = [](double x, double y) { return std::sin(2 * PI * x) * std::cos(2 * PI * y); };
    c.mu = [](double x, double y) { return 1.0 + 0.5 * std::sin(PI * x) * std::sin(PI * y); };

    auto e11 = [](double x, double y) {
        return PI * PI * std::sin(2 * PI * x) * std::sin(2 * PI * y);
    };
    auto e12 = [](double x, double y) {
        const double sx = std::sin(PI * x), sy = std::sin(PI * y);
        return PI * PI * (sx * sx * std::cos(2 * PI * y) - std::cos(2 * PI * x) * sy * sy);
    };
    auto d1e11 = [](double x, double y) {
        return 2 * PI * PI * PI * std::cos(2 * PI * x) * std::sin(2 * PI * y);
    };
    auto d2e11 = [](double x, double y) {
        return 2 * PI * PI * PI * std::sin(2 * PI * x) * std::cos(2 * PI * y);
    };
    auto d1e12 = [](double x, double) { return PI * PI * PI * std::sin(2 * PI * x); };
    auto d2e12 = [](double, double y) { return -PI * PI * PI * std::sin(2 * PI * y); };
    auto d1mu = [](double x, double y) {
        return 0.5 * PI * std::cos(PI * x) * std::sin(PI * y);
    };
    auto d2mu = [](double x, double y) {
        return 0.5 * PI * std::sin(PI * x) * std::cos(PI * y);
    };
    auto d1p = [](double x, double y) {
        return 2 * PI * std::cos(2 * PI * x) * std::cos(2 * PI * y);
    };
    auto d2p = [](double x, double y) {
        return -2 * PI * std::sin(2 * PI * x) * std::sin(2 * PI * y);
    };

    const double w2 = c.omega2;
    auto u1f = c.u1;
    auto u2f = c.u2;
    auto muf = c.mu;
    c.f1 = [=](double x, double y) {
        const double visc = 2.0 * (d1mu(x, y) * e11(x, y) + muf(x, y) * d1e11(x, y) +
                                   d2mu(x, y) * e12(x, y) + muf(x, y) * d2e12(x, y));
        return -(w2 * u1f(x, y) + visc + d1p(x, y));
    };
    c.f2 = [=](double x, double y) {
        const double visc = 2.0 * (d1mu(x, y) * e12(x, y) + muf(x, y) * d1e12(x, y) -
                                   d2mu(x, y) * e11(x, y) - muf(x, y) * d2e11(x, y));
        return -(w2 * u2f(x, y) + visc + d2p(x, y));
    };
    return c;
}

ManufacturedStokes poiseuille(double mu0) {
    ManufacturedStokes c;
    c.omega2 = 0.0;
    c.u1 = [](double, double y) { return y * (1.0 - y); };
    c.u2 = [](double, double) { return 0.0; };
    c.p = [mu0](double x, double) { return 2.0 * mu0 * (x - 0.5); };
    c.mu = [mu0](double, double) { return mu0; };
    c.f1 = [](double, double) { return 0.0; };
    c.f2 = [](double, double) { return 0.0; };
    return c;
}

ManufacturedElasticity manufactured_elasticity() {
    // Stream-function part of manufactured_stokes() plus the compressible
    // component eps (sin(px) sin(py), sin(px) sin(py)), constant lambda.
    constexpr double eps = 0.1;
    constexpr double lambda0 = 2.0;
    ManufacturedElasticity c;
    c.omega2 = 1.0;
    c.u1 = [](double x, double y) {
        const double sx = std::sin(PI * x);
        return PI * sx * sx * std::sin(2 * PI * y) + eps * sx * std::sin(PI * y);
    };
    c.u2 = [](double x, double y) {
        const double sy = std::sin(PI * y);
        return -PI * std::sin(2 * PI * x) * sy * sy + eps * std::sin(PI * x) * sy;
    };
    c.mu = [](double x, double y) { return 1.0 + 0.5 * std::sin(PI * x) * std::sin(PI * y); };
    c.lambda = [](double, double) { return lambda0; };

    auto e11 = [](double x, double y) {
        return PI * PI * std::sin(2 * PI * x) * std::sin(2 * PI * y) +
               eps * PI * std::cos(PI * x) * std::sin(PI * y);
    };
    auto e22 = [](double x, double y) {
        return -PI * PI * std::sin(2 * PI * x) * std::sin(2 * PI * y) +
               eps * PI * std::sin(PI * x) * std::cos(PI * y);
    };
    auto e12 = [](double x, double y) {
        const double sx = std::sin(PI * x), sy = std::sin(PI * y);
        return PI * PI * (sx * sx * std::cos(2 * PI * y) - std::cos(2 * PI * x) * sy * sy) +
               0.5 * eps * PI * std::sin(PI * (x + y));
    };
    auto d1e11 = [](double x, double y) {
        return 2 * PI * PI * PI * std::cos(2 * PI * x) * std::sin(2 * PI * y) -
               eps * PI * PI * std::sin(PI * x) * std::sin(PI * y);
    };
    auto d2e22 = [](double x, double y) {
        return -2 * PI * PI * PI * std::sin(2 * PI * x) * std::cos(2 * PI * y) -
               eps * PI * PI * std::sin(PI * x) * std::sin(PI * y);
    };
    auto d1e12 = [](double x, double y) {
        return PI * PI * PI * std::sin(2 * PI * x) +
               0.5 * eps * PI * PI * std::cos(PI * (x + y));
    };
    auto d2e12 = [](double x, double y) {
        return -PI * PI * PI * std::sin(2 * PI * y) +
               0.5 * eps * PI * PI * std::cos(PI * (x + y));
    };
    auto d1mu = [](double x, double y) {
        return 0.5 * PI * std::cos(PI * x) * std::sin(PI * y);
    };
    auto d2mu = [](double x, double y) {
        return 0.5 * PI * std::sin(PI * x) * std::cos(PI * y);
    };
    // grad(lambda div u) = lambda0 eps pi^2 cos(pi (x+y)) (1, 1)
    auto grad_lam_div = [](double x, double y) {
        return lambda0 * eps * PI * PI * std::cos(PI * (x + y));
    };

    const double w2 = c.omega2;
    auto u1f = c.u1;
    auto u2f = c.u2;
    auto muf = c.mu;
    c.f1 = [=](double x, double y) {
        const double visc = 2.0 * (d1mu(x, y) * e11(x, y) + muf(x, y) * d1e11(x, y) +
                                   d2mu(x, y) * e12(x, y) + muf(x, y) * d2e12(x, y));
        return -(grad_lam_div(x, y) + w2 * u1f(x, y) + visc);
    };
    c.f2 = [=](double x, double y) {
        const double visc = 2.0 * (d1mu(x, y) * e12(x, y) + muf(x, y) * d1e12(x, y) +
                                   d2mu(x, y) * e22(x, y) + muf(x, y) * d2e22(x, y));
        return -(grad_lam_div(x, y) + w2 * u2f(x, y) + visc);
    };
    return c;
}

StokesProblem make_stokes_problem(const Grid2& grid, const ManufacturedStokes& c) {
    StokesProblem prob;
    prob.grid = grid;
    prob.mu = ScalarField::sampled(grid, Stagger::CellCenter, c.mu);
    prob.omega2 = c.omega2;
    prob.boundary_data = VectorField2::sampled_faces(grid, c.u1, c.u2);
    prob.body_force = VectorField2::sampled_faces(grid, c.f1, c.f2);
    return prob;
}

VectorField2 exact_velocity_faces(const Grid2& grid, const SpaceFunc& u1, const SpaceFunc& u2) {
    return VectorField2::sampled_faces(grid, u1, u2);
}

} // namespace selast
