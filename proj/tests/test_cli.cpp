#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "stokeselast/phantomio.hpp"
#include "stokeselast/stokesfwd.hpp"

using namespace selast;
namespace fs = std::filesystem;

namespace {

fs::path binary() {
    const char* env = std::getenv("STOKESELAST_BIN");
    REQUIRE_MESSAGE(env != nullptr, "STOKESELAST_BIN must point at the CLI binary");
    return env;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("stokeselast-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const std::string cmd = binary().string() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_config(const fs::path& path, const std::string& extra = "") {
    std::ofstream out(path, std::ios::trunc);
    out << R"({
  "grid": {"nx": 16, "ny": 16, "lx": 1.0, "ly": 1.0},
  "physics": {"omega2": 25.0, "mu_floor": 0.1},
  "phantom": {"kind": "gaussian-inclusion", "background": 1.0,
              "inclusions": [{"center": [0.5, 0.5], "width": 0.15, "amplitude": 1.0}]},
  "measurements": [{"label": "m0", "boundary_mode": "shear-x"}],
  "noise": {"level": 0.0, "seed": 7},
  "landweber": {"max_iterations": 0},
  "limit_study": {"lambdas": [100.0, 1000.0, 10000.0, 100000.0]},
  "gradcheck": {"directions": 2, "tolerance": 1e-5, "seed": 11},
  "conditions": {"mode": "2d", "threshold": 1e-9}
)" << extra
        << "}\n";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("phantom writes a verifiable, reproducible data set") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    const std::string cfg = (tmp.path / "cfg.json").string();

    CHECK(run("phantom --config " + cfg + " --out " + (tmp.path / "a").string()) == 0);
    CHECK(run("phantom --config " + cfg + " --out " + (tmp.path / "b").string()) == 0);

    // checksums verify through the readers
    const ScalarField mu = read_scalar_field(tmp.path / "a" / "mu_true.field");
    CHECK(mu.values.size() == 256);
    const LoadedMeasurements loaded =
        read_measurement_set(tmp.path / "a" / "measurements.json");
    CHECK(loaded.omega2 == 25.0);
    CHECK(loaded.data.records.size() == 1);
    CHECK(fs::exists(tmp.path / "a" / "resolved_config.json"));

    // identical runs produce identical bytes
    for (const char* name : {"mu_true.f64", "u_m_m0.ux.f64", "u_m_m0.uy.f64",
                             "F_m0.ux.f64", "mu_true.field", "measurements.json"})
        CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "b" / name));
}

TEST_CASE("noise metadata lands in the measurement manifest") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    std::string text = slurp(tmp.path / "cfg.json");
    text.replace(text.find("\"level\": 0.0"), 12, "\"level\": 0.01");
    std::ofstream(tmp.path / "cfg.json", std::ios::trunc) << text;

    CHECK(run("phantom --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "o").string()) == 0);
    const LoadedMeasurements loaded =
        read_measurement_set(tmp.path / "o" / "measurements.json");
    CHECK(loaded.data.noise.model == "gaussian-l2");
    CHECK(loaded.data.noise.level == 0.01);
    REQUIRE(loaded.data.noise.absolute.size() == 1);
    CHECK(loaded.data.noise.absolute[0] > 0.0);
}

TEST_CASE("unknown config keys are rejected with the configuration exit code") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json", R"(, "turbulence": {"model": "none"})");
    CHECK(run("phantom --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "o").string()) == 1);
}

TEST_CASE("malformed JSON is a configuration error") {
    TempDir tmp;
    std::ofstream(tmp.path / "bad.json") << "{ not json";
    CHECK(run("forward --config " + (tmp.path / "bad.json").string()) == 1);
}

TEST_CASE("reconstruct with a zero budget returns the initial field and exit 0") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    const std::string cfg = (tmp.path / "cfg.json").string();
    CHECK(run("reconstruct --config " + cfg + " --out " + (tmp.path / "r").string()) == 0);

    const ScalarField mu_final = read_scalar_field(tmp.path / "r" / "mu_final.field");
    CHECK(mu_final.values.minCoeff() == 1.0);
    CHECK(mu_final.values.maxCoeff() == 1.0);
    const std::string report = slurp(tmp.path / "r" / "report.txt");
    CHECK(report.find("stop_reason = max-iterations") != std::string::npos);
    CHECK(fs::exists(tmp.path / "r" / "trace.tsv"));
}

TEST_CASE("gradcheck passes its tolerance and exits 0") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    CHECK(run("gradcheck --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "g").string()) == 0);
    CHECK(fs::exists(tmp.path / "g" / "gradcheck.tsv"));
}

TEST_CASE("limit-study emits the table and two slopes") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    CHECK(run("limit-study --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "l").string()) == 0);
    const std::string tsv = slurp(tmp.path / "l" / "limit_study.tsv");
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 5);  // header + 4 rows
    const std::string report = slurp(tmp.path / "l" / "report.txt");
    CHECK(report.find("h1_slope = ") != std::string::npos);
    CHECK(report.find("div_slope = ") != std::string::npos);
}

TEST_CASE("forward writes readable fields") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    CHECK(run("forward --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "f").string()) == 0);
    const VectorField2 u = read_vector_field(tmp.path / "f" / "u.vfield");
    CHECK(u.face_staggered());
    const ScalarField p = read_scalar_field(tmp.path / "f" / "p.field");
    CHECK(std::abs(p.values.mean()) <= 1e-12 * p.values.cwiseAbs().maxCoeff());
}

TEST_CASE("check-conditions writes reports in both modes") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    CHECK(run("check-conditions --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "c2").string()) == 0);
    const std::string rep2 = slurp(tmp.path / "c2" / "condition_2d.txt");
    CHECK(rep2.find("margin = ") != std::string::npos);
    CHECK(rep2.find("min_d1u1 = ") != std::string::npos);

    write_config(tmp.path / "cfg3.json",
                 R"(, "inputs": {}
)");
    std::string text = slurp(tmp.path / "cfg3.json");
    text.replace(text.find(R"("mode": "2d")"), 12,
                 R"("mode": "3d", "pairs": [{"a": [1,2,3,0,0,0], "a_tilde": [3,1,2,0,0,0]}])");
    std::ofstream(tmp.path / "cfg3.json", std::ios::trunc) << text;
    CHECK(run("check-conditions --config " + (tmp.path / "cfg3.json").string() +
              " --out " + (tmp.path / "c3").string()) == 0);
    const std::string rep3 = slurp(tmp.path / "c3" / "condition_3d_00.txt");
    CHECK(rep3.find("margin = ") != std::string::npos);
    CHECK(rep3.find("lopatinskii_decaying = ") != std::string::npos);
}

TEST_CASE("reconstruct consumes a phantom run's measurement files") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    const std::string cfg = (tmp.path / "cfg.json").string();
    REQUIRE(run("phantom --config " + cfg + " --out " + (tmp.path / "d").string()) == 0);

    write_config(tmp.path / "cfg2.json",
                 ", \"inputs\": {\"measurements\": \"" +
                     (tmp.path / "d" / "measurements.json").string() + "\"}\n");
    CHECK(run("reconstruct --config " + (tmp.path / "cfg2.json").string() + " --out " +
              (tmp.path / "r").string()) == 0);
    const std::string report = slurp(tmp.path / "r" / "report.txt");
    // ground truth sits next to the manifest, so the error column is present
    CHECK(report.find("final_relative_l2_error = ") != std::string::npos);
}

TEST_CASE("a frequency at a discrete eigenvalue maps to the solver exit code") {
    // find an eigenvalue of the discrete pencil on a small grid, then ask the
    // CLI to solve exactly there
    const Grid2 g = Grid2::unit_square(6);
    StokesProblem prob;
    prob.grid = g;
    prob.mu = ScalarField(g, Stagger::CellCenter, 1.0);
    prob.omega2 = 0.0;
    prob.boundary_data = VectorField2::faces(g);
    auto [A0, rhs0] = assemble_stokes(prob);

    const int nu = (g.nx - 1) * g.ny + g.nx * (g.ny - 1);
    Eigen::MatrixXd K0 = Eigen::MatrixXd(A0.storage());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(K0.rows(), K0.cols());
    for (int k = 0; k < nu; ++k) D(k, k) = g.hx * g.hy;
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(K0, D, false);
    double omega2_eig = -1.0;
    for (int k = 0; k < ges.alphas().size(); ++k) {
        if (std::abs(ges.betas()[k]) < 1e-10) continue;
        const std::complex<double> lam = ges.alphas()[k] / ges.betas()[k];
        if (std::abs(lam.imag()) > 1e-8 * std::abs(lam.real())) continue;
        if (lam.real() > 1.0 && (omega2_eig < 0.0 || lam.real() < omega2_eig))
            omega2_eig = lam.real();
    }
    REQUIRE(omega2_eig > 0.0);

    TempDir tmp;
    std::ofstream out(tmp.path / "cfg.json");
    out.precision(17);
    out << R"({
  "grid": {"nx": 6, "ny": 6, "lx": 1.0, "ly": 1.0},
  "physics": {"omega2": )"
        << omega2_eig << R"(, "mu_floor": 0.1},
  "phantom": {"kind": "constant", "background": 1.0},
  "measurements": [{"label": "m0", "boundary_mode": "shear-x"}]
})";
    out.close();
    CHECK(run("forward --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "f").string()) == 2);
}

TEST_CASE("reconstruct runs are byte-identical for one config and seed") {
    TempDir tmp;
    write_config(tmp.path / "cfg.json");
    std::string text = slurp(tmp.path / "cfg.json");
    text.replace(text.find("\"max_iterations\": 0"), 19, "\"max_iterations\": 3");
    std::ofstream(tmp.path / "cfg.json", std::ios::trunc) << text;
    const std::string cfg = (tmp.path / "cfg.json").string();

    CHECK(run("reconstruct --config " + cfg + " --out " + (tmp.path / "a").string()) == 0);
    CHECK(run("reconstruct --config " + cfg + " --out " + (tmp.path / "b").string()) == 0);
    for (const char* name : {"trace.tsv", "mu_final.f64", "report.txt"})
        CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "b" / name));
}

TEST_CASE("non-convergence maps to exit code 3") {
    TempDir tmp;
    // a gradient check that cannot meet an absurd tolerance
    write_config(tmp.path / "cfg.json");
    std::string text = slurp(tmp.path / "cfg.json");
    text.replace(text.find("\"tolerance\": 1e-5"), 17, "\"tolerance\": 1e-16");
    std::ofstream(tmp.path / "cfg.json", std::ios::trunc) << text;
    CHECK(run("gradcheck --config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "g").string()) == 3);

    // a fixed step far above stability diverges
    write_config(tmp.path / "cfg2.json");
    text = slurp(tmp.path / "cfg2.json");
    const std::string pattern = "\"landweber\": {\"max_iterations\": 0}";
    text.replace(text.find(pattern), pattern.size(),
                 "\"landweber\": {\"max_iterations\": 10, \"line_search\": false, "
                 "\"sigma\": 1e6}");
    std::ofstream(tmp.path / "cfg2.json", std::ios::trunc) << text;
    CHECK(run("reconstruct --config " + (tmp.path / "cfg2.json").string() + " --out " +
              (tmp.path / "r").string()) == 3);
    const std::string report = slurp(tmp.path / "r" / "report.txt");
    CHECK(report.find("stop_reason = diverged") != std::string::npos);
}
