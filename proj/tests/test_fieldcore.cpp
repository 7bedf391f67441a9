#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stokeselast/fieldcore.hpp"

using namespace selast;

namespace {

constexpr double PI = std::numbers::pi;

ScalarField random_field(const Grid2& g, Stagger loc, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ScalarField f(g, loc);
    for (Eigen::Index k = 0; k < f.values.size(); ++k)
        f.values[k] = double(rng() >> 11) * 0x1.0p-53 - 0.5;
    return f;
}

VectorField2 random_faces(const Grid2& g, std::uint64_t seed) {
    return {random_field(g, Stagger::FaceX, seed), random_field(g, Stagger::FaceY, seed + 1)};
}

} // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid2(3, 8, 0.1, 0.1), ValidationError);
    CHECK_THROWS_AS(Grid2(8, 3, 0.1, 0.1), ValidationError);
    CHECK_THROWS_AS(Grid2(8, 8, 0.0, 0.1), ValidationError);
    const Grid2 g = Grid2::unit_square(8);
    CHECK(g.hx == doctest::Approx(0.125));
    CHECK(g.area() == doctest::Approx(1.0));
}

TEST_CASE("stagger site counts and coordinates") {
    const Grid2 g = Grid2::rectangle(4, 6, 2.0, 3.0, -1.0, 0.5);
    CHECK(site_count(g, Stagger::CellCenter) == 24);
    CHECK(site_count(g, Stagger::Node) == 35);
    CHECK(site_count(g, Stagger::FaceX) == 30);
    CHECK(site_count(g, Stagger::FaceY) == 28);
    ScalarField p(g, Stagger::CellCenter);
    CHECK(p.x(0) == doctest::Approx(-1.0 + 0.25));
    ScalarField n(g, Stagger::Node);
    CHECK(n.x(0) == doctest::Approx(-1.0));
    CHECK(n.y(6) == doctest::Approx(3.5));
}

TEST_CASE("sym_gradient on affine fields is exact") {
    const Grid2 g = Grid2::unit_square(12);
    const auto u = VectorField2::sampled_faces(
        g, [](double x, double) { return x; }, [](double, double y) { return -y; });
    const SymTensorField2 s = sym_gradient(u);
    for (Eigen::Index k = 0; k < s.txx.values.size(); ++k) {
        CHECK(s.txx.values[k] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.tyy.values[k] == doctest::Approx(-1.0).epsilon(1e-14));
    }
    CHECK(s.txy.values.cwiseAbs().maxCoeff() < 1e-13);

    const auto shear = VectorField2::sampled_faces(
        g, [](double, double y) { return y; }, [](double, double) { return 0.0; });
    const SymTensorField2 t = sym_gradient(shear);
    CHECK(t.txx.values.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(t.tyy.values.cwiseAbs().maxCoeff() < 1e-14);
    for (Eigen::Index k = 0; k < t.txy.values.size(); ++k)
        CHECK(t.txy.values[k] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("sym_gradient converges at second order against the analytic strain") {
    auto max_err = [](int n) {
        const Grid2 g = Grid2::unit_square(n);
        const auto u = VectorField2::sampled_faces(
            g, [](double x, double y) { return std::sin(PI * x) * std::cos(PI * y); },
            [](double x, double y) { return -std::cos(PI * x) * std::sin(PI * y); });
        const SymTensorField2 s = sym_gradient(u);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = s.txx.x(i), y = s.txx.y(j);
                err = std::max(err,
                               std::abs(s.txx(i, j) - PI * std::cos(PI * x) * std::cos(PI * y)));
            }
        return err;
    };
    const double e1 = max_err(16), e2 = max_err(32), e3 = max_err(64);
    CHECK(std::log2(e1 / e2) > 1.9);
    CHECK(std::log2(e2 / e3) > 1.9);
}

TEST_CASE("divergence exact values") {
    const Grid2 g = Grid2::unit_square(10);
    const auto div_free = VectorField2::sampled_faces(
        g, [](double x, double) { return x; }, [](double, double y) { return -y; });
    CHECK(divergence(div_free).values.cwiseAbs().maxCoeff() < 1e-14);

    const auto expanding = VectorField2::sampled_faces(
        g, [](double x, double) { return x; }, [](double, double y) { return y; });
    const ScalarField d = divergence(expanding);
    for (Eigen::Index k = 0; k < d.values.size(); ++k)
        CHECK(d.values[k] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("stream-function fields are discretely divergence free") {
    const Grid2 g = Grid2::unit_square(24);
    const ScalarField psi = ScalarField::sampled(g, Stagger::Node, [](double x, double y) {
        const double sx = std::sin(PI * x), sy = std::sin(PI * y);
        return sx * sx * sy * sy;
    });
    const VectorField2 u = from_stream_function(psi);
    CHECK(divergence(u).values.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("scalar_curl annihilates gradients and sees rotation") {
    const Grid2 g = Grid2::unit_square(10);
    // gradient of x^2 + 3y sampled consistently: (2x, 3)
    const auto grad = VectorField2::sampled_faces(
        g, [](double x, double) { return 2.0 * x; }, [](double, double) { return 3.0; });
    CHECK(scalar_curl(grad).values.cwiseAbs().maxCoeff() < 1e-13);

    const auto rot = VectorField2::sampled_faces(
        g, [](double, double y) { return -y; }, [](double x, double) { return x; });
    const ScalarField c = scalar_curl(rot);
    for (Eigen::Index k = 0; k < c.values.size(); ++k)
        CHECK(c.values[k] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("scalar_curl of a quadratic shear is exact") {
    const Grid2 g = Grid2::unit_square(8);
    const auto u = VectorField2::sampled_faces(
        g, [](double, double y) { return y * (1.0 - y); }, [](double, double) { return 0.0; });
    const ScalarField c = scalar_curl(u);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            CHECK(c(i, j) == doctest::Approx(2.0 * c.y(j) - 1.0).epsilon(1e-12));
}

TEST_CASE("curl of compact-difference gradient vanishes at interior nodes") {
    const Grid2 g = Grid2::unit_square(12);
    const ScalarField phi = random_field(g, Stagger::CellCenter, 99);
    // compact cell-to-face gradient; the interior-node identity does not see
    // the boundary faces, which stay zero
    VectorField2 grad = VectorField2::faces(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            grad.ux(i, j) = (phi(i, j) - phi(i - 1, j)) / g.hx;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            grad.uy(i, j) = (phi(i, j) - phi(i, j - 1)) / g.hy;
    const ScalarField c = scalar_curl(grad);
    double interior_max = 0.0;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            interior_max = std::max(interior_max, std::abs(c(i, j)));
    CHECK(interior_max < 1e-12);
}

TEST_CASE("operators are linear") {
    const Grid2 g = Grid2::unit_square(8);
    const VectorField2 a = random_faces(g, 1), b = random_faces(g, 2);
    const double al = 1.7, be = -0.3;
    const VectorField2 combo = al * a + be * b;

    const ScalarField d_combo = divergence(combo);
    const ScalarField d_parts = al * divergence(a) + be * divergence(b);
    CHECK((d_combo.values - d_parts.values).cwiseAbs().maxCoeff() < 1e-13);

    const ScalarField c_combo = scalar_curl(combo);
    const ScalarField c_parts = al * scalar_curl(a) + be * scalar_curl(b);
    CHECK((c_combo.values - c_parts.values).cwiseAbs().maxCoeff() < 1e-12);

    const SymTensorField2 s_combo = sym_gradient(combo);
    const SymTensorField2 sa = sym_gradient(a), sb = sym_gradient(b);
    CHECK((s_combo.txy.values - (al * sa.txy + be * sb.txy).values).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("sobolev norm of constants") {
    const Grid2 g = Grid2::rectangle(8, 8, 2.0, 0.5);
    for (Stagger loc : {Stagger::CellCenter, Stagger::Node, Stagger::FaceX, Stagger::FaceY}) {
        const ScalarField c(g, loc, -3.0);
        for (int order = 0; order <= 5; ++order)
            CHECK(sobolev_norm(c, order) == doctest::Approx(3.0 * std::sqrt(g.area())));
    }
}

TEST_CASE("sobolev norm matches analytic values for a sine product") {
    // f = sin(2 pi x) sin(2 pi y): the squared L2 norm of every mixed partial
    // d^a d^b f is (2 pi)^(2(a+b)) / 4, so the squared order-m full norm is
    // sum_k binom-weighted (2 s^2)^k / 4 with s = 2 pi.
    const Grid2 g = Grid2::unit_square(256);
    const ScalarField f = ScalarField::sampled(g, Stagger::Node, [](double x, double y) {
        return std::sin(2 * PI * x) * std::sin(2 * PI * y);
    });
    CHECK(sobolev_norm(f, 0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(sobolev_norm(f, 1, NormMode::Seminorm) ==
          doctest::Approx(std::sqrt(2.0) * PI).epsilon(1e-4));

    const double s2 = 4 * PI * PI;
    double analytic_sq = 0.0;
    for (int k = 0; k <= 4; ++k) analytic_sq += 0.25 * std::pow(2.0 * s2, k);
    const double order4 = sobolev_norm(f, 4);
    CHECK(std::abs(order4 - std::sqrt(analytic_sq)) / std::sqrt(analytic_sq) < 0.01);
}

TEST_CASE("sobolev norm is monotone in order and rejects order > 5") {
    const Grid2 g = Grid2::unit_square(16);
    const ScalarField f = random_field(g, Stagger::CellCenter, 4);
    double prev = 0.0;
    for (int order = 0; order <= 5; ++order) {
        const double v = sobolev_norm(f, order);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(sobolev_norm(f, 0) == doctest::Approx(l2_norm(f)));
    CHECK_THROWS_AS(sobolev_norm(f, 6), ValidationError);
}

TEST_CASE("collocated fields convert to faces") {
    const Grid2 g = Grid2::unit_square(8);
    const auto un = VectorField2::sampled_nodes(
        g, [](double x, double y) { return x + 2 * y; }, [](double x, double) { return x; });
    CHECK(un.collocated());
    const VectorField2 uf = face_staggered(un);
    CHECK(uf.face_staggered());
    // two-point averages are exact on affine data
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            CHECK(uf.ux(i, j) == doctest::Approx(uf.ux.x(i) + 2 * uf.ux.y(j)).epsilon(1e-14));
}

TEST_CASE("quadrature weights tile the domain") {
    const Grid2 g = Grid2::rectangle(5, 7, 1.5, 2.5);
    for (Stagger loc : {Stagger::CellCenter, Stagger::Node, Stagger::FaceX, Stagger::FaceY}) {
        double total = 0.0;
        for (int j = 0; j < stagger_count_y(g, loc); ++j)
            for (int i = 0; i < stagger_count_x(g, loc); ++i)
                total += quadrature_weight(g, loc, i, j);
        CHECK(total == doctest::Approx(g.area()).epsilon(1e-13));
    }
}

TEST_CASE("grid transfer: restriction and prolongation") {
    const Grid2 gc = Grid2::unit_square(8);
    const Grid2 gf = Grid2::unit_square(16);

    // restriction averages exactly and so is exact on affine data
    const auto fine = VectorField2::sampled_faces(
        gf, [](double x, double y) { return x + 2 * y; },
        [](double x, double y) { return 3 * x - y; });
    const VectorField2 coarse = restrict_faces(gc, fine);
    for (int j = 0; j < gc.ny; ++j)
        for (int i = 0; i <= gc.nx; ++i)
            CHECK(coarse.ux(i, j) ==
                  doctest::Approx(coarse.ux.x(i) + 2 * coarse.ux.y(j)).epsilon(1e-14));

    // prolongation is exact on affine cell data away from the boundary band
    const ScalarField pc = ScalarField::sampled(
        gc, Stagger::CellCenter, [](double x, double y) { return 2 * x - y + 1; });
    const ScalarField pf = prolongate_cells(gf, pc);
    for (int j = 2; j < gf.ny - 2; ++j)
        for (int i = 2; i < gf.nx - 2; ++i)
            CHECK(pf(i, j) == doctest::Approx(2 * pf.x(i) - pf.y(j) + 1).epsilon(1e-13));

    CHECK_THROWS_AS(restrict_faces(Grid2::unit_square(9), fine), ValidationError);
}
