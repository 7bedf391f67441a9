#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stokeselast/adjointgrad.hpp"
#include "stokeselast/manufactured.hpp"
#include "stokeselast/phantomio.hpp"

using namespace selast;

namespace {

constexpr double PI = std::numbers::pi;

ScalarField gaussian_mu(const Grid2& g, double amplitude) {
    return ScalarField::sampled(g, Stagger::CellCenter, [=](double x, double y) {
        const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
        return 1.0 + amplitude * std::exp(-r2 / (2 * 0.15 * 0.15));
    });
}

MeasurementSet consistent_data(const Grid2& g, const ScalarField& mu_true, double omega2) {
    MeasurementSet data;
    MeasurementRecord rec;
    rec.label = "m0";
    rec.boundary_data = shear_boundary_data(g, BoundaryMode::ShearX);
    StokesOperator op(g, mu_true, omega2);
    rec.measured = op.solve(rec.boundary_data).u;
    data.records.push_back(std::move(rec));
    return data;
}

/// Smooth direction field that is exactly zero on the boundary cell ring,
/// randomized over low-frequency sine products.
ScalarField random_direction(const Grid2& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto coef = [&] { return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0; };
    std::vector<double> c;
    for (int k = 0; k < 9; ++k) c.push_back(coef());
    ScalarField d = ScalarField::sampled(g, Stagger::CellCenter, [&](double x, double y) {
        double acc = 0.0;
        int t = 0;
        for (int k = 1; k <= 3; ++k)
            for (int l = 1; l <= 3; ++l)
                acc += c[t++] * std::sin(k * PI * x) * std::sin(l * PI * y);
        return acc * std::sin(PI * x) * std::sin(PI * y);
    });
    for (int i = 0; i < g.nx; ++i) {
        d(i, 0) = 0.0;
        d(i, g.ny - 1) = 0.0;
    }
    for (int j = 0; j < g.ny; ++j) {
        d(0, j) = 0.0;
        d(g.nx - 1, j) = 0.0;
    }
    return d;
}

} // namespace

TEST_CASE("consistent data: objective at the solver floor and zero gradient") {
    const Grid2 g = Grid2::unit_square(24);
    const ScalarField mu_true = gaussian_mu(g, 1.0);
    const MeasurementSet data = consistent_data(g, mu_true, 25.0);

    CHECK(objective(mu_true, 25.0, data) <= 1e-18);

    const GradientResult gr = gradient(mu_true, 25.0, data);
    CHECK(gr.objective <= 1e-18);
    CHECK(l2_norm(gr.gradient) <= 1e-9);
    CHECK(gr.residual_norms.size() == 1);
}

TEST_CASE("objective is quadratic in the residual and matches brute-force quadrature") {
    const Grid2 g = Grid2::unit_square(16);
    const ScalarField mu_true = gaussian_mu(g, 1.0);
    const ScalarField mu_bg(g, Stagger::CellCenter, 1.0);
    MeasurementSet data = consistent_data(g, mu_true, 25.0);

    const double J = objective(mu_bg, 25.0, data);
    CHECK(J > 0.0);

    // independent quadrature of the residual field
    StokesOperator op(g, mu_bg, 25.0);
    const VectorField2 u = op.solve(data.records[0].boundary_data).u;
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double r = u.ux(i, j) - data.records[0].measured.ux(i, j);
            const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
            acc += 0.5 * w * g.hx * g.hy * r * r;
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double r = u.uy(i, j) - data.records[0].measured.uy(i, j);
            const double w = (j == 0 || j == g.ny) ? 0.5 : 1.0;
            acc += 0.5 * w * g.hx * g.hy * r * r;
        }
    CHECK(J == doctest::Approx(acc).epsilon(1e-12));

    // doubling the pointwise residual quadruples the objective
    MeasurementSet doubled = data;
    doubled.records[0].measured = data.records[0].measured - (u - data.records[0].measured);
    // measured' = u - 2(u - u_m)  =>  residual doubles
    doubled.records[0].measured =
        u - 2.0 * (u - data.records[0].measured);
    CHECK(objective(mu_bg, 25.0, doubled) == doctest::Approx(4.0 * J).epsilon(1e-10));
}

TEST_CASE("zero residual gives the zero adjoint state") {
    const Grid2 g = Grid2::unit_square(12);
    const ScalarField mu(g, Stagger::CellCenter, 1.0);
    auto [v, q] = solve_adjoint(mu, 4.0, VectorField2::faces(g));
    CHECK(l2_norm(v) < 1e-14);
    CHECK(l2_norm(q) < 1e-14);
}

TEST_CASE("discrete operator is self-transpose under homogeneous data") {
    const Grid2 g = Grid2::unit_square(10);
    StokesProblem prob;
    prob.grid = g;
    prob.mu = gaussian_mu(g, 0.7);
    prob.omega2 = 13.0;
    prob.boundary_data = VectorField2::faces(g);
    auto [A, rhs] = assemble_stokes(prob);

    std::mt19937_64 rng(3);
    Eigen::VectorXd a(A.size()), b(A.size());
    for (int k = 0; k < A.size(); ++k) {
        a[k] = double(rng() >> 11) * 0x1.0p-53 - 0.5;
        b[k] = double(rng() >> 11) * 0x1.0p-53 - 0.5;
    }
    const double forward = a.dot(A.apply(b));
    const double transposed = b.dot(A.apply(a));
    CHECK(std::abs(forward - transposed) <=
          1e-12 * std::max(std::abs(forward), 1.0));
}

TEST_CASE("manufactured adjoint state is recovered at second order") {
    // v* is the stream-function velocity (zero trace) and q* the
    // manufactured pressure: the adjoint load is -f of the forward case
    const ManufacturedStokes c = manufactured_stokes();
    std::vector<double> errors;
    for (int n : {16, 32, 64}) {
        const Grid2 g = Grid2::unit_square(n);
        const ScalarField mu = ScalarField::sampled(g, Stagger::CellCenter, c.mu);
        const VectorField2 load = VectorField2::sampled_faces(
            g, [&](double x, double y) { return -c.f1(x, y); },
            [&](double x, double y) { return -c.f2(x, y); });
        auto [v, q] = solve_adjoint(mu, c.omega2, load);
        errors.push_back(l2_norm(v - exact_velocity_faces(g, c.u1, c.u2)));
    }
    CHECK(std::log2(errors[0] / errors[1]) > 1.8);
    CHECK(std::log2(errors[1] / errors[2]) > 1.9);
}

TEST_CASE("adjoint gradient matches central finite differences") {
    const Grid2 g = Grid2::unit_square(32);
    const ScalarField mu_true = gaussian_mu(g, 1.0);
    const ScalarField mu_bg(g, Stagger::CellCenter, 1.0);
    const MeasurementSet data = consistent_data(g, mu_true, 25.0);

    const GradientResult gr = gradient(mu_bg, 25.0, data);
    REQUIRE(gr.objective > 0.0);

    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        const ScalarField dir = random_direction(g, seed);
        const double pairing = inner(gr.gradient, dir);
        REQUIRE(std::abs(pairing) > 0.0);

        double best = 1e9;
        for (double eps : {3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5}) {
            ScalarField plus = mu_bg, minus = mu_bg;
            plus.values += eps * dir.values;
            minus.values -= eps * dir.values;
            const double fd =
                (objective(plus, 25.0, data) - objective(minus, 25.0, data)) / (2 * eps);
            best = std::min(best, std::abs(fd - pairing) / std::abs(pairing));
        }
        CHECK(best <= 1e-5);
    }
}

TEST_CASE("gradient is zero on the boundary cell ring") {
    const Grid2 g = Grid2::unit_square(16);
    const ScalarField mu_true = gaussian_mu(g, 1.0);
    const ScalarField mu_bg(g, Stagger::CellCenter, 1.0);
    const GradientResult gr = gradient(mu_bg, 25.0, consistent_data(g, mu_true, 25.0));
    for (int i = 0; i < g.nx; ++i) {
        CHECK(gr.gradient(i, 0) == 0.0);
        CHECK(gr.gradient(i, g.ny - 1) == 0.0);
    }
    for (int j = 0; j < g.ny; ++j) {
        CHECK(gr.gradient(0, j) == 0.0);
        CHECK(gr.gradient(g.nx - 1, j) == 0.0);
    }
}

TEST_CASE("two-measurement gradient is the sum of the single-measurement gradients") {
    const Grid2 g = Grid2::unit_square(16);
    const ScalarField mu_true = gaussian_mu(g, 1.0);
    const ScalarField mu_bg(g, Stagger::CellCenter, 1.0);

    StokesOperator op_true(g, mu_true, 25.0);
    MeasurementSet both;
    for (auto mode : {BoundaryMode::ShearX, BoundaryMode::Poiseuille}) {
        MeasurementRecord rec;
        rec.label = boundary_mode_name(mode);
        rec.boundary_data = shear_boundary_data(g, mode);
        rec.measured = op_true.solve(rec.boundary_data).u;
        both.records.push_back(std::move(rec));
    }
    MeasurementSet first{{both.records[0]}, {}};
    MeasurementSet second{{both.records[1]}, {}};

    const GradientResult g_both = gradient(mu_bg, 25.0, both);
    const GradientResult g1 = gradient(mu_bg, 25.0, first);
    const GradientResult g2 = gradient(mu_bg, 25.0, second);

    CHECK(g_both.objective == doctest::Approx(g1.objective + g2.objective).epsilon(1e-14));
    const ScalarField sum = g1.gradient + g2.gradient;
    CHECK((g_both.gradient.values - sum.values).cwiseAbs().maxCoeff() <=
          1e-14 * sum.values.cwiseAbs().maxCoeff());
}
