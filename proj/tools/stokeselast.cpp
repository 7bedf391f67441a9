// Command-line driver: phantom generation, forward solves, limit studies,
// gradient checks, reconstruction, and condition checks, all driven by one
// strict JSON configuration file. Exit codes: 0 success, 1 configuration
// error, 2 solver near-singularity, 3 non-convergence.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "stokeselast/adjointgrad.hpp"
#include "stokeselast/elastfwd.hpp"
#include "stokeselast/landweber.hpp"
#include "stokeselast/phantomio.hpp"
#include "stokeselast/stokesfwd.hpp"
#include "stokeselast/symbolcheck.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace selast;

namespace {

constexpr int EXIT_OK = 0;
constexpr int EXIT_CONFIG = 1;
constexpr int EXIT_SOLVER = 2;
constexpr int EXIT_NOCONV = 3;

void check_keys(const json& j, const std::string& context,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw ValidationError("config section '" + context + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known)
            throw ValidationError("unknown config key '" + key + "' in " + context);
    }
}

struct MeasurementPlan {
    std::string label;
    BoundaryMode mode = BoundaryMode::ShearX;
};

struct RunConfig {
    Grid2 grid = Grid2::unit_square(64);
    double omega2 = 25.0;
    double mu_floor = 0.1;

    PhantomSpec phantom;
    std::vector<MeasurementPlan> measurements{{"m0", BoundaryMode::ShearX}};
    double noise_level = 0.0;
    std::uint64_t noise_seed = 7;

    LandweberConfig landweber;
    std::string initial_mu = "background";
    int snapshot_cadence = 0;

    std::vector<double> lambdas{1e2, 1e3, 1e4, 1e5};

    std::string conditions_mode = "2d";
    double conditions_threshold = 1e-9;
    int conditions_directions = 2048;
    std::vector<std::pair<SymTensor3, SymTensor3>> tensor_pairs;
    Eigen::Vector3d lop_nu = Eigen::Vector3d(1, 1, 1).normalized();
    Eigen::Vector3d lop_zeta = Eigen::Vector3d(1, -1, 0).normalized();

    int gradcheck_directions = 5;
    double gradcheck_tolerance = 1e-5;
    std::uint64_t gradcheck_seed = 11;

    fs::path input_measurements;
    fs::path input_mu;

    fs::path out_dir = "out";
    bool deterministic = true;
    std::uint64_t seed = 7;
};

SymTensor3 parse_tensor(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 6)
        throw ValidationError(context + " must be an array of six entries "
                              "(xx, yy, zz, xy, xz, yz)");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
            j[3].get<double>(), j[4].get<double>(), j[5].get<double>()};
}

RunConfig parse_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("malformed config JSON: " + std::string(e.what()));
    }
    check_keys(j, "config",
               {"grid", "physics", "phantom", "measurements", "noise", "landweber",
                "limit_study", "conditions", "gradcheck", "inputs", "output",
                "deterministic", "seed"});

    RunConfig cfg;
    if (j.contains("grid")) {
        const json& g = j["grid"];
        check_keys(g, "grid", {"nx", "ny", "lx", "ly", "origin"});
        const int nx = g.value("nx", 64), ny = g.value("ny", 64);
        const double lx = g.value("lx", 1.0), ly = g.value("ly", 1.0);
        double x0 = 0.0, y0 = 0.0;
        if (g.contains("origin")) {
            if (!g["origin"].is_array() || g["origin"].size() != 2)
                throw ValidationError("grid.origin must be [x0, y0]");
            x0 = g["origin"][0].get<double>();
            y0 = g["origin"][1].get<double>();
        }
        cfg.grid = Grid2::rectangle(nx, ny, lx, ly, x0, y0);
    }
    if (j.contains("physics")) {
        const json& p = j["physics"];
        check_keys(p, "physics", {"omega2", "mu_floor"});
        cfg.omega2 = p.value("omega2", cfg.omega2);
        cfg.mu_floor = p.value("mu_floor", cfg.mu_floor);
        if (cfg.omega2 < 0.0) throw ValidationError("physics.omega2 must be >= 0");
        if (!(cfg.mu_floor > 0.0)) throw ValidationError("physics.mu_floor must be > 0");
    }

    cfg.phantom.kind = PhantomSpec::Kind::GaussianInclusion;
    cfg.phantom.background = 1.0;
    cfg.phantom.inclusions = {{0.5, 0.5, 0.15, 1.0}};
    if (j.contains("phantom")) {
        const json& p = j["phantom"];
        check_keys(p, "phantom", {"kind", "background", "inclusions"});
        const std::string kind = p.value("kind", "gaussian-inclusion");
        if (kind == "constant")
            cfg.phantom.kind = PhantomSpec::Kind::Constant;
        else if (kind == "gaussian-inclusion")
            cfg.phantom.kind = PhantomSpec::Kind::GaussianInclusion;
        else if (kind == "multi-inclusion")
            cfg.phantom.kind = PhantomSpec::Kind::MultiInclusion;
        else
            throw ValidationError("unknown phantom.kind: " + kind);
        cfg.phantom.background = p.value("background", 1.0);
        if (p.contains("inclusions")) {
            cfg.phantom.inclusions.clear();
            for (const auto& inc : p["inclusions"]) {
                check_keys(inc, "phantom.inclusions[]", {"center", "width", "amplitude"});
                Inclusion parsed;
                if (!inc.contains("center") || !inc["center"].is_array() ||
                    inc["center"].size() != 2)
                    throw ValidationError("inclusion.center must be [x, y]");
                parsed.cx = inc["center"][0].get<double>();
                parsed.cy = inc["center"][1].get<double>();
                parsed.width = inc.value("width", 0.15);
                parsed.amplitude = inc.value("amplitude", 1.0);
                cfg.phantom.inclusions.push_back(parsed);
            }
        }
        if (cfg.phantom.kind == PhantomSpec::Kind::Constant) cfg.phantom.inclusions.clear();
    }
    cfg.phantom.mu_floor = cfg.mu_floor;

    if (j.contains("measurements")) {
        if (!j["measurements"].is_array() || j["measurements"].empty())
            throw ValidationError("measurements must be a non-empty array");
        cfg.measurements.clear();
        int index = 0;
        for (const auto& m : j["measurements"]) {
            check_keys(m, "measurements[]", {"label", "boundary_mode"});
            MeasurementPlan plan;
            plan.label = m.value("label", "m" + std::to_string(index));
            plan.mode = boundary_mode_from_name(m.value("boundary_mode", "shear-x"));
            cfg.measurements.push_back(plan);
            ++index;
        }
    }
    if (j.contains("noise")) {
        const json& n = j["noise"];
        check_keys(n, "noise", {"level", "seed"});
        cfg.noise_level = n.value("level", 0.0);
        cfg.noise_seed = n.value("seed", std::uint64_t(7));
        if (!(cfg.noise_level >= 0.0 && cfg.noise_level < 1.0))
            throw ValidationError("noise.level must lie in [0, 1)");
    }

    cfg.landweber.sigma = 1.0;
    cfg.landweber.max_iterations = 500;
    cfg.landweber.gradient_tolerance = 1e-8;
    cfg.landweber.discrepancy_tau = 1.5;
    cfg.landweber.line_search = true;
    if (j.contains("landweber")) {
        const json& l = j["landweber"];
        check_keys(l, "landweber",
                   {"sigma", "max_iterations", "gradient_tolerance", "discrepancy_tau",
                    "line_search", "snapshot_cadence", "initial_mu"});
        cfg.landweber.sigma = l.value("sigma", cfg.landweber.sigma);
        cfg.landweber.max_iterations =
            l.value("max_iterations", cfg.landweber.max_iterations);
        cfg.landweber.gradient_tolerance =
            l.value("gradient_tolerance", cfg.landweber.gradient_tolerance);
        cfg.landweber.discrepancy_tau =
            l.value("discrepancy_tau", cfg.landweber.discrepancy_tau);
        cfg.landweber.line_search = l.value("line_search", true);
        cfg.snapshot_cadence = l.value("snapshot_cadence", 0);
        cfg.initial_mu = l.value("initial_mu", std::string("background"));
    }
    cfg.landweber.mu_floor = cfg.mu_floor;
    cfg.landweber.snapshot_cadence = cfg.snapshot_cadence;
    cfg.landweber.validate();

    if (j.contains("limit_study")) {
        const json& l = j["limit_study"];
        check_keys(l, "limit_study", {"lambdas"});
        if (l.contains("lambdas")) {
            cfg.lambdas.clear();
            for (const auto& v : l["lambdas"]) cfg.lambdas.push_back(v.get<double>());
        }
    }

    if (j.contains("conditions")) {
        const json& c = j["conditions"];
        check_keys(c, "conditions",
                   {"mode", "threshold", "directions", "pairs", "nu", "zeta"});
        cfg.conditions_mode = c.value("mode", "2d");
        if (cfg.conditions_mode != "2d" && cfg.conditions_mode != "3d")
            throw ValidationError("conditions.mode must be '2d' or '3d'");
        cfg.conditions_threshold = c.value("threshold", 1e-9);
        cfg.conditions_directions = c.value("directions", 2048);
        if (c.contains("pairs")) {
            for (const auto& pair : c["pairs"]) {
                check_keys(pair, "conditions.pairs[]", {"a", "a_tilde"});
                cfg.tensor_pairs.emplace_back(
                    parse_tensor(pair.at("a"), "pairs[].a"),
                    parse_tensor(pair.at("a_tilde"), "pairs[].a_tilde"));
            }
        }
        auto parse_vec3 = [&](const char* key, Eigen::Vector3d& target) {
            if (!c.contains(key)) return;
            const json& v = c[key];
            if (!v.is_array() || v.size() != 3)
                throw ValidationError(std::string("conditions.") + key +
                                      " must be a 3-vector");
            target = Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(),
                                     v[2].get<double>());
            if (target.norm() == 0.0)
                throw ValidationError(std::string("conditions.") + key +
                                      " must be nonzero");
            target.normalize();
        };
        parse_vec3("nu", cfg.lop_nu);
        parse_vec3("zeta", cfg.lop_zeta);
        if (std::abs(cfg.lop_nu.dot(cfg.lop_zeta)) > 1e-12)
            throw ValidationError("conditions.zeta must be orthogonal to conditions.nu");
    }

    if (j.contains("gradcheck")) {
        const json& g = j["gradcheck"];
        check_keys(g, "gradcheck", {"directions", "tolerance", "seed"});
        cfg.gradcheck_directions = g.value("directions", 5);
        cfg.gradcheck_tolerance = g.value("tolerance", 1e-5);
        cfg.gradcheck_seed = g.value("seed", std::uint64_t(11));
        if (cfg.gradcheck_directions < 1)
            throw ValidationError("gradcheck.directions must be >= 1");
    }

    if (j.contains("inputs")) {
        const json& i = j["inputs"];
        check_keys(i, "inputs", {"measurements", "mu"});
        if (i.contains("measurements"))
            cfg.input_measurements = i["measurements"].get<std::string>();
        if (i.contains("mu")) cfg.input_mu = i["mu"].get<std::string>();
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, "output", {"directory"});
        cfg.out_dir = o.value("directory", std::string("out"));
    }
    cfg.deterministic = j.value("deterministic", true);
    cfg.seed = j.value("seed", std::uint64_t(7));
    return cfg;
}

json resolved_json(const RunConfig& cfg) {
    json inclusions = json::array();
    for (const auto& inc : cfg.phantom.inclusions)
        inclusions.push_back({{"center", {inc.cx, inc.cy}},
                              {"width", inc.width},
                              {"amplitude", inc.amplitude}});
    json measurements = json::array();
    for (const auto& plan : cfg.measurements)
        measurements.push_back(
            {{"label", plan.label}, {"boundary_mode", boundary_mode_name(plan.mode)}});
    json pairs = json::array();
    for (const auto& [a, b] : cfg.tensor_pairs)
        pairs.push_back({{"a", {a.xx, a.yy, a.zz, a.xy, a.xz, a.yz}},
                         {"a_tilde", {b.xx, b.yy, b.zz, b.xy, b.xz, b.yz}}});
    const char* kind_name =
        cfg.phantom.kind == PhantomSpec::Kind::Constant
            ? "constant"
            : (cfg.phantom.kind == PhantomSpec::Kind::GaussianInclusion
                   ? "gaussian-inclusion"
                   : "multi-inclusion");
    return json{
        {"grid",
         {{"nx", cfg.grid.nx},
          {"ny", cfg.grid.ny},
          {"lx", cfg.grid.lx()},
          {"ly", cfg.grid.ly()},
          {"origin", {cfg.grid.x0, cfg.grid.y0}}}},
        {"physics", {{"omega2", cfg.omega2}, {"mu_floor", cfg.mu_floor}}},
        {"phantom",
         {{"kind", kind_name},
          {"background", cfg.phantom.background},
          {"inclusions", inclusions}}},
        {"measurements", measurements},
        {"noise", {{"level", cfg.noise_level}, {"seed", cfg.noise_seed}}},
        {"landweber",
         {{"sigma", cfg.landweber.sigma},
          {"max_iterations", cfg.landweber.max_iterations},
          {"gradient_tolerance", cfg.landweber.gradient_tolerance},
          {"discrepancy_tau", cfg.landweber.discrepancy_tau},
          {"line_search", cfg.landweber.line_search},
          {"snapshot_cadence", cfg.snapshot_cadence},
          {"initial_mu", cfg.initial_mu}}},
        {"limit_study", {{"lambdas", cfg.lambdas}}},
        {"conditions",
         {{"mode", cfg.conditions_mode},
          {"threshold", cfg.conditions_threshold},
          {"directions", cfg.conditions_directions},
          {"pairs", pairs},
          {"nu", {cfg.lop_nu.x(), cfg.lop_nu.y(), cfg.lop_nu.z()}},
          {"zeta", {cfg.lop_zeta.x(), cfg.lop_zeta.y(), cfg.lop_zeta.z()}}}},
        {"gradcheck",
         {{"directions", cfg.gradcheck_directions},
          {"tolerance", cfg.gradcheck_tolerance},
          {"seed", cfg.gradcheck_seed}}},
        {"inputs",
         {{"measurements", cfg.input_measurements.string()},
          {"mu", cfg.input_mu.string()}}},
        {"output", {{"directory", cfg.out_dir.string()}}},
        {"deterministic", cfg.deterministic},
        {"seed", cfg.seed},
    };
}

void echo_config(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir / "resolved_config.json", std::ios::trunc);
    if (!out) throw IoError("cannot write resolved config");
    out << resolved_json(cfg).dump(2) << "\n";
}

ScalarField load_or_generate_mu(const RunConfig& cfg) {
    if (!cfg.input_mu.empty()) return read_scalar_field(cfg.input_mu);
    return generate_phantom(cfg.grid, cfg.phantom);
}

/// Synthesize the measurement set from the phantom section: boundary data
/// per plan, forward solve at the true coefficient, optional noise.
MeasurementSet synthesize_measurements(const RunConfig& cfg, const ScalarField& mu_true) {
    MeasurementSet data;
    StokesOperator op(cfg.grid, mu_true, cfg.omega2, 1e-10, cfg.mu_floor);
    std::uint64_t seed = cfg.noise_seed;
    for (const auto& plan : cfg.measurements) {
        MeasurementRecord rec;
        rec.label = plan.label;
        std::string warning;
        rec.boundary_data = shear_boundary_data(cfg.grid, plan.mode, &warning);
        if (!warning.empty())
            std::cerr << "warning: measurement '" << plan.label << "': " << warning
                      << "\n";
        rec.measured = op.solve(rec.boundary_data).u;
        if (cfg.noise_level > 0.0) {
            double absolute = 0.0;
            rec.measured = add_noise(rec.measured, cfg.noise_level, seed, &absolute);
            data.noise.absolute.push_back(absolute);
            ++seed;
        }
        data.records.push_back(std::move(rec));
    }
    if (cfg.noise_level > 0.0) {
        data.noise.model = "gaussian-l2";
        data.noise.level = cfg.noise_level;
        data.noise.seed = cfg.noise_seed;
    }
    return data;
}

MeasurementSet obtain_measurements(const RunConfig& cfg, double* omega2_out) {
    if (!cfg.input_measurements.empty()) {
        LoadedMeasurements loaded = read_measurement_set(cfg.input_measurements);
        if (omega2_out) *omega2_out = loaded.omega2;
        return std::move(loaded.data);
    }
    if (omega2_out) *omega2_out = cfg.omega2;
    return synthesize_measurements(cfg, load_or_generate_mu(cfg));
}

int cmd_phantom(const RunConfig& cfg) {
    echo_config(cfg);
    const ScalarField mu_true = generate_phantom(cfg.grid, cfg.phantom);
    const MeasurementSet data = synthesize_measurements(cfg, mu_true);
    write_field(cfg.out_dir / "mu_true.field", mu_true, "mu_true");
    write_measurement_set(cfg.out_dir, data, cfg.omega2);
    std::cout << "phantom: wrote mu_true and " << data.records.size()
              << " measurement record(s) to " << cfg.out_dir.string() << "\n";
    return EXIT_OK;
}

int cmd_forward(const RunConfig& cfg) {
    echo_config(cfg);
    const ScalarField mu = load_or_generate_mu(cfg);
    StokesProblem prob;
    prob.grid = cfg.grid;
    prob.mu = mu;
    prob.omega2 = cfg.omega2;
    prob.mu_floor = cfg.mu_floor;
    std::string warning;
    prob.boundary_data =
        shear_boundary_data(cfg.grid, cfg.measurements.front().mode, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";

    const StokesSolution sol = solve_stokes(prob);
    write_field(cfg.out_dir / "u.vfield", sol.u, "u");
    write_field(cfg.out_dir / "p.field", sol.p, "p");
    std::ofstream report(cfg.out_dir / "report.txt", std::ios::trunc);
    report.precision(17);
    report << "relative_residual = " << sol.report.relative_residual << "\n";
    report << "refinements = " << sol.report.iterations << "\n";
    report << "divergence_l2 = " << l2_norm(divergence(sol.u)) << "\n";
    std::cout << "forward: residual " << sol.report.relative_residual
              << ", wrote u, p to " << cfg.out_dir.string() << "\n";
    return EXIT_OK;
}

int cmd_limit_study(const RunConfig& cfg) {
    echo_config(cfg);
    const ScalarField mu = load_or_generate_mu(cfg);
    std::string warning;
    const VectorField2 F =
        shear_boundary_data(cfg.grid, cfg.measurements.front().mode, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";

    const LimitStudyResult study = limit_study(cfg.grid, mu, cfg.omega2, F, cfg.lambdas);

    std::ofstream tsv(cfg.out_dir / "limit_study.tsv", std::ios::trunc);
    tsv.precision(17);
    tsv << "lambda\th1_error\tdiv_norm\n";
    std::cout << "lambda\th1_error\tdiv_norm\n";
    for (const auto& row : study.rows) {
        tsv << row.lambda << "\t" << row.h1_error << "\t" << row.div_norm << "\n";
        std::cout << row.lambda << "\t" << row.h1_error << "\t" << row.div_norm << "\n";
    }
    std::ofstream report(cfg.out_dir / "report.txt", std::ios::trunc);
    report.precision(17);
    report << "h1_slope = " << study.h1_slope << "\n";
    report << "div_slope = " << study.div_slope << "\n";
    std::cout << "h1 slope " << study.h1_slope << ", divergence slope "
              << study.div_slope << "\n";
    return EXIT_OK;
}

ScalarField gradcheck_direction(const Grid2& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto coef = [&] { return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0; };
    std::vector<double> c;
    for (int k = 0; k < 9; ++k) c.push_back(coef());
    constexpr double PI = std::numbers::pi;
    ScalarField d = ScalarField::sampled(g, Stagger::CellCenter, [&](double x, double y) {
        const double sx = (x - g.x0) / g.lx(), sy = (y - g.y0) / g.ly();
        double acc = 0.0;
        int t = 0;
        for (int k = 1; k <= 3; ++k)
            for (int l = 1; l <= 3; ++l)
                acc += c[t++] * std::sin(k * PI * sx) * std::sin(l * PI * sy);
        return acc * std::sin(PI * sx) * std::sin(PI * sy);
    });
    for (int i = 0; i < g.nx; ++i) d(i, 0) = d(i, g.ny - 1) = 0.0;
    for (int j = 0; j < g.ny; ++j) d(0, j) = d(g.nx - 1, j) = 0.0;
    return d;
}

int cmd_gradcheck(const RunConfig& cfg) {
    echo_config(cfg);
    double omega2 = cfg.omega2;
    const MeasurementSet data = obtain_measurements(cfg, &omega2);
    const ScalarField mu(cfg.grid, Stagger::CellCenter, cfg.phantom.background);

    const GradientResult gr = gradient(mu, omega2, data);
    std::ofstream tsv(cfg.out_dir / "gradcheck.tsv", std::ios::trunc);
    tsv.precision(17);
    tsv << "direction\tbest_epsilon\tbest_relative_mismatch\n";

    double worst = 0.0;
    for (int k = 0; k < cfg.gradcheck_directions; ++k) {
        const ScalarField dir = gradcheck_direction(cfg.grid, cfg.gradcheck_seed + k);
        const double pairing = inner(gr.gradient, dir);
        double best = std::numeric_limits<double>::infinity();
        double best_eps = 0.0;
        for (double eps : {3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5}) {
            ScalarField plus = mu, minus = mu;
            plus.values += eps * dir.values;
            minus.values -= eps * dir.values;
            const double fd =
                (objective(plus, omega2, data) - objective(minus, omega2, data)) /
                (2 * eps);
            const double mismatch = std::abs(fd - pairing) / std::abs(pairing);
            if (mismatch < best) {
                best = mismatch;
                best_eps = eps;
            }
        }
        tsv << k << "\t" << best_eps << "\t" << best << "\n";
        worst = std::max(worst, best);
    }
    std::cout << "gradcheck: max relative mismatch over " << cfg.gradcheck_directions
              << " directions = " << worst << " (tolerance " << cfg.gradcheck_tolerance
              << ")\n";
    return worst <= cfg.gradcheck_tolerance ? EXIT_OK : EXIT_NOCONV;
}

int cmd_reconstruct(const RunConfig& cfg) {
    echo_config(cfg);
    double omega2 = cfg.omega2;
    const MeasurementSet data = obtain_measurements(cfg, &omega2);

    ScalarField mu0(cfg.grid, Stagger::CellCenter, cfg.phantom.background);
    if (cfg.initial_mu != "background") mu0 = read_scalar_field(cfg.initial_mu);
    ScalarField mu_true;
    bool have_truth = false;
    if (cfg.input_measurements.empty()) {
        mu_true = load_or_generate_mu(cfg);
        have_truth = true;
    } else {
        const fs::path truth = cfg.input_measurements.parent_path() / "mu_true.field";
        if (fs::exists(truth)) {
            mu_true = read_scalar_field(truth);
            have_truth = true;
        }
    }

    LandweberConfig lcfg = cfg.landweber;
    if (have_truth) lcfg.ground_truth = &mu_true;
    if (cfg.snapshot_cadence > 0) {
        lcfg.snapshot_hook = [&](int n, const ScalarField& m) {
            char name[32];
            std::snprintf(name, sizeof name, "mu_%06d.field", n);
            write_field(cfg.out_dir / name, m, name);
        };
    }

    const IterationTrace tr = run_landweber(mu0, omega2, data, lcfg);

    std::ofstream tsv(cfg.out_dir / "trace.tsv", std::ios::trunc);
    tsv.precision(17);
    tsv << "iter\tobjective\tgradient_norm\tstep\terr_l2\terr_h4\n";
    for (const auto& row : tr.rows)
        tsv << row.n << "\t" << row.objective << "\t" << row.gradient_norm << "\t"
            << row.step << "\t" << row.error_l2 << "\t" << row.error_h4 << "\n";
    write_field(cfg.out_dir / "mu_final.field", tr.mu_final, "mu_final");

    std::ofstream report(cfg.out_dir / "report.txt", std::ios::trunc);
    report.precision(17);
    report << "stop_reason = " << stop_reason_name(tr.stop) << "\n";
    report << "iterations = " << tr.rows.size() - 1 << "\n";
    report << "final_objective = " << tr.rows.back().objective << "\n";
    if (have_truth) {
        const double rel = tr.rows.back().error_l2 / l2_norm(mu_true);
        report << "final_relative_l2_error = " << rel << "\n";
        std::cout << "reconstruct: stop " << stop_reason_name(tr.stop)
                  << ", final relative L2 error " << rel << "\n";
    } else {
        std::cout << "reconstruct: stop " << stop_reason_name(tr.stop) << "\n";
    }
    if (!tr.message.empty()) report << "message = " << tr.message << "\n";

    if (tr.stop == StopReason::SolverFailure) return EXIT_SOLVER;
    if (tr.stop == StopReason::Diverged || tr.stop == StopReason::LineSearchFailed)
        return EXIT_NOCONV;
    return EXIT_OK;
}

int cmd_check_conditions(const RunConfig& cfg) {
    echo_config(cfg);
    if (cfg.conditions_mode == "2d") {
        const ScalarField mu = load_or_generate_mu(cfg);
        std::string warning;
        const VectorField2 F =
            shear_boundary_data(cfg.grid, cfg.measurements.front().mode, &warning);
        if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
        StokesProblem prob;
        prob.grid = cfg.grid;
        prob.mu = mu;
        prob.omega2 = cfg.omega2;
        prob.mu_floor = cfg.mu_floor;
        prob.boundary_data = F;
        const StokesSolution sol = solve_stokes(prob);
        const ConditionReport rep = nondegeneracy_2d(sol.u, cfg.conditions_threshold);
        std::ofstream out(cfg.out_dir / "condition_2d.txt", std::ios::trunc);
        out.precision(17);
        rep.write(out);
        std::cout << "condition 2d: margin " << rep.margin << " ("
                  << (rep.pass ? "pass" : "fail") << ")\n";
        return EXIT_OK;
    }

    if (cfg.tensor_pairs.empty())
        throw ValidationError("conditions.mode '3d' needs conditions.pairs");
    int index = 0;
    for (const auto& [A, At] : cfg.tensor_pairs) {
        std::vector<SymTensor3> a{A}, b{At};
        const ConditionReport rep =
            condition_3d(a, b, cfg.conditions_threshold, cfg.conditions_directions);
        char name[32];
        std::snprintf(name, sizeof name, "condition_3d_%02d.txt", index);
        std::ofstream out(cfg.out_dir / name, std::ios::trunc);
        out.precision(17);
        rep.write(out);

        // boundary ODE at the configured normal/tangent frame
        const auto [ca, cb, cc] =
            lopatinskii_coefficients(A, At, cfg.lop_nu, cfg.lop_zeta);
        if (ca > 0.0) {
            const LopatinskiiReport lop = lopatinskii_roots(ca, cb, cc);
            out << "lopatinskii_a = " << lop.a << "\n";
            out << "lopatinskii_b = " << lop.b << "\n";
            out << "lopatinskii_c = " << lop.c << "\n";
            out << "lopatinskii_root1 = " << lop.root1.real() << " " << lop.root1.imag()
                << "\n";
            out << "lopatinskii_root2 = " << lop.root2.real() << " " << lop.root2.imag()
                << "\n";
            out << "lopatinskii_decaying = " << lop.decaying << "\n";
            out << "lopatinskii_ok = " << (lop.condition_ok ? "true" : "false") << "\n";
        } else {
            out << "lopatinskii_a = 0 (degenerate frame)\n";
        }
        std::cout << "condition 3d pair " << index << ": margin " << rep.margin << " ("
                  << (rep.pass ? "pass" : "fail") << ")\n";
        ++index;
    }
    return EXIT_OK;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"staggered-grid Stokes elastography toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    bool deterministic_flag = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the JSON run configuration")
            ->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_flag("--deterministic", deterministic_flag,
                      "force the deterministic single-threaded mode");
    };

    CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic data set");
    CLI::App* forward = app.add_subcommand("forward", "one forward solve");
    CLI::App* limit = app.add_subcommand("limit-study", "incompressible-limit sweep");
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "adjoint gradient vs finite differences");
    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "iterative coefficient reconstruction");
    CLI::App* conditions =
        app.add_subcommand("check-conditions", "non-degeneracy condition checks");
    for (CLI::App* sub : {phantom, forward, limit, gradcheck, reconstruct, conditions})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = parse_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (deterministic_flag) cfg.deterministic = true;
        if (cfg.deterministic) Eigen::setNbThreads(1);

        if (phantom->parsed()) return cmd_phantom(cfg);
        if (forward->parsed()) return cmd_forward(cfg);
        if (limit->parsed()) return cmd_limit_study(cfg);
        if (gradcheck->parsed()) return cmd_gradcheck(cfg);
        if (reconstruct->parsed()) return cmd_reconstruct(cfg);
        if (conditions->parsed()) return cmd_check_conditions(cfg);
        return EXIT_CONFIG;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return EXIT_SOLVER;
    } catch (const ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return EXIT_CONFIG;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return EXIT_CONFIG;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_CONFIG;
    }
}
