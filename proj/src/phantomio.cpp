#include "stokeselast/phantomio.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "payloads are written as raw little-endian doubles");

namespace selast {

using json = nlohmann::json;

ScalarField generate_phantom(const Grid2& grid, const PhantomSpec& spec) {
    using Kind = PhantomSpec::Kind;
    if (spec.kind == Kind::Constant && !spec.inclusions.empty())
        throw ValidationError("constant phantom takes no inclusions");
    if (spec.kind == Kind::GaussianInclusion && spec.inclusions.size() != 1)
        throw ValidationError("gaussian-inclusion phantom takes exactly one inclusion");
    if (spec.kind == Kind::MultiInclusion && spec.inclusions.empty())
        throw ValidationError("multi-inclusion phantom needs at least one inclusion");

    for (const auto& inc : spec.inclusions) {
        const double clear_x = std::min(inc.cx - grid.x0, grid.x0 + grid.lx() - inc.cx);
        const double clear_y = std::min(inc.cy - grid.y0, grid.y0 + grid.ly() - inc.cy);
        if (!(inc.width > 0.0)) throw ValidationError("inclusion width must be positive");
        if (std::min(clear_x, clear_y) < 3.0 * inc.width)
            throw ValidationError("inclusion violates the 3-sigma boundary clearance");
    }

    ScalarField mu(grid, Stagger::CellCenter, spec.background);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double x = mu.x(i), y = mu.y(j);
            double v = spec.background;
            for (const auto& inc : spec.inclusions) {
                const double r2 = (x - inc.cx) * (x - inc.cx) + (y - inc.cy) * (y - inc.cy);
                v += inc.amplitude * std::exp(-r2 / (2.0 * inc.width * inc.width));
            }
            mu(i, j) = v;
        }
    if (mu.values.minCoeff() < spec.mu_floor)
        throw ValidationError("phantom violates the positivity floor");
    return mu;
}

const char* boundary_mode_name(BoundaryMode m) {
    switch (m) {
        case BoundaryMode::ShearX: return "shear-x";
        case BoundaryMode::Rotation: return "rotation";
        case BoundaryMode::Poiseuille: return "poiseuille";
    }
    return "?";
}

BoundaryMode boundary_mode_from_name(std::string_view name) {
    if (name == "shear-x") return BoundaryMode::ShearX;
    if (name == "rotation") return BoundaryMode::Rotation;
    if (name == "poiseuille") return BoundaryMode::Poiseuille;
    throw ValidationError("unknown boundary mode: " + std::string(name));
}

VectorField2 shear_boundary_data(const Grid2& grid, BoundaryMode mode,
                                 std::string* warning) {
    if (warning) warning->clear();
    switch (mode) {
        case BoundaryMode::ShearX:
            return VectorField2::sampled_faces(
                grid, [](double, double y) { return y; }, [](double, double) { return 0.0; });
        case BoundaryMode::Rotation:
            if (warning)
                *warning = "rotation data has identically zero symmetric gradient; "
                           "the 2D non-degeneracy condition fails on it";
            return VectorField2::sampled_faces(
                grid, [](double, double y) { return -y; }, [](double x, double) { return x; });
        case BoundaryMode::Poiseuille:
            return VectorField2::sampled_faces(
                grid, [](double, double y) { return y * (1.0 - y); },
                [](double, double) { return 0.0; });
    }
    throw ValidationError("unknown boundary mode");
}

namespace {

double uniform01(std::mt19937_64& rng) {
    // 53-bit mantissa draw in [0, 1); implementation-defined distributions
    // are avoided so streams are identical across platforms
    return double(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng, bool& have_spare, double& spare) {
    if (have_spare) {
        have_spare = false;
        return spare;
    }
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare = r * std::sin(th);
    have_spare = true;
    return r * std::cos(th);
}

} // namespace

VectorField2 add_noise(const VectorField2& u, double level, std::uint64_t seed,
                       double* absolute_out) {
    if (!(level >= 0.0 && level < 1.0))
        throw ValidationError("noise level must lie in [0, 1)");
    if (level == 0.0) {
        if (absolute_out) *absolute_out = 0.0;
        return u;
    }
    std::mt19937_64 rng(seed);
    bool have_spare = false;
    double spare = 0.0;
    VectorField2 eta{ScalarField(u.ux.grid, u.ux.location),
                     ScalarField(u.uy.grid, u.uy.location)};
    for (Eigen::Index k = 0; k < eta.ux.values.size(); ++k)
        eta.ux.values[k] = standard_normal(rng, have_spare, spare);
    for (Eigen::Index k = 0; k < eta.uy.values.size(); ++k)
        eta.uy.values[k] = standard_normal(rng, have_spare, spare);
    const double target = level * l2_norm(u);
    const double scale = target / l2_norm(eta);
    if (absolute_out) *absolute_out = target;
    return u + scale * eta;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::uint8_t b : bytes) crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_payload(const std::filesystem::path& path, const Eigen::VectorXd& values,
                   std::uint32_t& crc_out) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(values.data());
    const size_t nbytes = size_t(values.size()) * sizeof(double);
    crc_out = crc32({bytes, nbytes});
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open payload for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes), std::streamsize(nbytes));
    if (!out) throw IoError("payload write failed: " + path.string());
}

Eigen::VectorXd read_payload(const std::filesystem::path& path, int expected_count,
                             std::uint32_t expected_crc) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open payload: " + path.string());
    const auto nbytes = size_t(in.tellg());
    if (nbytes != size_t(expected_count) * sizeof(double))
        throw IoError("payload length does not match the declared site count: " +
                      path.string());
    in.seekg(0);
    Eigen::VectorXd values(expected_count);
    in.read(reinterpret_cast<char*>(values.data()), std::streamsize(nbytes));
    if (!in) throw IoError("payload read failed: " + path.string());
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(values.data());
    if (crc32({bytes, nbytes}) != expected_crc)
        throw IoError("payload checksum mismatch: " + path.string());
    return values;
}

using Manifest = std::map<std::string, std::string, std::less<>>;

Manifest parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw IoError("malformed manifest line in " + path.string() + ": " + line);
        m[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return m;
}

std::string take(Manifest& m, const std::string& key, const std::filesystem::path& path) {
    auto it = m.find(key);
    if (it == m.end())
        throw IoError("manifest key missing in " + path.string() + ": " + key);
    std::string v = it->second;
    m.erase(it);
    return v;
}

void expect_empty(const Manifest& m, const std::filesystem::path& path) {
    if (!m.empty())
        throw IoError("unknown manifest key in " + path.string() + ": " + m.begin()->first);
}

void write_grid_keys(std::ostream& os, const Grid2& g) {
    os << "nx = " << g.nx << "\n";
    os << "ny = " << g.ny << "\n";
    os << "hx = " << fmt_double(g.hx) << "\n";
    os << "hy = " << fmt_double(g.hy) << "\n";
    os << "origin_x = " << fmt_double(g.x0) << "\n";
    os << "origin_y = " << fmt_double(g.y0) << "\n";
}

Grid2 read_grid_keys(Manifest& m, const std::filesystem::path& path) {
    const int nx = std::stoi(take(m, "nx", path));
    const int ny = std::stoi(take(m, "ny", path));
    const double hx = std::stod(take(m, "hx", path));
    const double hy = std::stod(take(m, "hy", path));
    const double x0 = std::stod(take(m, "origin_x", path));
    const double y0 = std::stod(take(m, "origin_y", path));
    return Grid2(nx, ny, hx, hy, x0, y0);
}

std::string hex(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
}

std::uint32_t parse_hex(const std::string& s) {
    return std::uint32_t(std::stoul(s, nullptr, 16));
}

} // namespace

void write_field(const std::filesystem::path& manifest_path, const ScalarField& f,
                 const std::string& name) {
    if (!f.finite()) throw ValidationError("refusing to write a non-finite field");
    std::filesystem::path payload = manifest_path;
    payload.replace_extension(".f64");
    std::uint32_t crc = 0;
    write_payload(payload, f.values, crc);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw IoError("cannot open manifest for writing: " + manifest_path.string());
    out << "format = stokeselast-field/1\n";
    out << "name = " << name << "\n";
    out << "element_type = f64le\n";
    write_grid_keys(out, f.grid);
    out << "stagger = " << stagger_name(f.location) << "\n";
    out << "count = " << f.values.size() << "\n";
    out << "payload = " << payload.filename().string() << "\n";
    out << "crc32 = " << hex(crc) << "\n";
    if (!out) throw IoError("manifest write failed: " + manifest_path.string());
}

void write_field(const std::filesystem::path& manifest_path, const VectorField2& u,
                 const std::string& name) {
    if (!u.finite()) throw ValidationError("refusing to write a non-finite field");
    const Grid2& g = u.grid();
    std::filesystem::path px = manifest_path, py = manifest_path;
    px.replace_extension(".ux.f64");
    py.replace_extension(".uy.f64");
    std::uint32_t crcx = 0, crcy = 0;
    write_payload(px, u.ux.values, crcx);
    write_payload(py, u.uy.values, crcy);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw IoError("cannot open manifest for writing: " + manifest_path.string());
    out << "format = stokeselast-vfield/1\n";
    out << "name = " << name << "\n";
    out << "element_type = f64le\n";
    write_grid_keys(out, g);
    out << "stagger_ux = " << stagger_name(u.ux.location) << "\n";
    out << "stagger_uy = " << stagger_name(u.uy.location) << "\n";
    out << "count_ux = " << u.ux.values.size() << "\n";
    out << "count_uy = " << u.uy.values.size() << "\n";
    out << "payload_ux = " << px.filename().string() << "\n";
    out << "payload_uy = " << py.filename().string() << "\n";
    out << "crc32_ux = " << hex(crcx) << "\n";
    out << "crc32_uy = " << hex(crcy) << "\n";
    if (!out) throw IoError("manifest write failed: " + manifest_path.string());
}

ScalarField read_scalar_field(const std::filesystem::path& manifest_path) {
    Manifest m = parse_manifest(manifest_path);
    if (take(m, "format", manifest_path) != "stokeselast-field/1")
        throw IoError("not a scalar field manifest: " + manifest_path.string());
    take(m, "name", manifest_path);
    if (take(m, "element_type", manifest_path) != "f64le")
        throw IoError("unsupported element type in " + manifest_path.string());
    const Grid2 grid = read_grid_keys(m, manifest_path);
    Stagger loc;
    try {
        loc = stagger_from_name(take(m, "stagger", manifest_path));
    } catch (const ValidationError& e) {
        throw IoError(std::string(e.what()) + " in " + manifest_path.string());
    }
    const int count = std::stoi(take(m, "count", manifest_path));
    if (count != site_count(grid, loc))
        throw IoError("declared count does not match grid and stagger: " +
                      manifest_path.string());
    const auto payload = manifest_path.parent_path() / take(m, "payload", manifest_path);
    const std::uint32_t crc = parse_hex(take(m, "crc32", manifest_path));
    expect_empty(m, manifest_path);

    ScalarField f(grid, loc);
    f.values = read_payload(payload, count, crc);
    return f;
}

VectorField2 read_vector_field(const std::filesystem::path& manifest_path) {
    Manifest m = parse_manifest(manifest_path);
    if (take(m, "format", manifest_path) != "stokeselast-vfield/1")
        throw IoError("not a vector field manifest: " + manifest_path.string());
    take(m, "name", manifest_path);
    if (take(m, "element_type", manifest_path) != "f64le")
        throw IoError("unsupported element type in " + manifest_path.string());
    const Grid2 grid = read_grid_keys(m, manifest_path);
    Stagger lx, ly;
    try {
        lx = stagger_from_name(take(m, "stagger_ux", manifest_path));
        ly = stagger_from_name(take(m, "stagger_uy", manifest_path));
    } catch (const ValidationError& e) {
        throw IoError(std::string(e.what()) + " in " + manifest_path.string());
    }
    const int cx = std::stoi(take(m, "count_ux", manifest_path));
    const int cy = std::stoi(take(m, "count_uy", manifest_path));
    if (cx != site_count(grid, lx) || cy != site_count(grid, ly))
        throw IoError("declared counts do not match grid and stagger: " +
                      manifest_path.string());
    const auto px = manifest_path.parent_path() / take(m, "payload_ux", manifest_path);
    const auto py = manifest_path.parent_path() / take(m, "payload_uy", manifest_path);
    const std::uint32_t crcx = parse_hex(take(m, "crc32_ux", manifest_path));
    const std::uint32_t crcy = parse_hex(take(m, "crc32_uy", manifest_path));
    expect_empty(m, manifest_path);

    VectorField2 u{ScalarField(grid, lx), ScalarField(grid, ly)};
    u.ux.values = read_payload(px, cx, crcx);
    u.uy.values = read_payload(py, cy, crcy);
    if (!(u.face_staggered() || u.collocated()))
        throw IoError("vector components carry an unsupported stagger pair: " +
                      manifest_path.string());
    return u;
}

FieldVariant read_field(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
    std::string first;
    std::getline(in, first);
    in.close();
    if (first == "format = stokeselast-field/1") return read_scalar_field(manifest_path);
    if (first == "format = stokeselast-vfield/1") return read_vector_field(manifest_path);
    throw IoError("unrecognized field manifest: " + manifest_path.string());
}

void write_measurement_set(const std::filesystem::path& directory,
                           const MeasurementSet& data, double omega2) {
    data.validate();
    std::filesystem::create_directories(directory);
    json records = json::array();
    for (const auto& rec : data.records) {
        const std::string fname = "F_" + rec.label + ".vfield";
        const std::string uname = "u_m_" + rec.label + ".vfield";
        write_field(directory / fname, rec.boundary_data, "F_" + rec.label);
        write_field(directory / uname, rec.measured, "u_m_" + rec.label);
        records.push_back({{"label", rec.label},
                           {"boundary_data", fname},
                           {"measured", uname}});
    }
    json manifest = {
        {"format", "stokeselast-measurements/1"},
        {"omega2", omega2},
        {"records", records},
        {"noise",
         {{"model", data.noise.model},
          {"level", data.noise.level},
          {"seed", data.noise.seed},
          {"absolute", data.noise.absolute}}},
    };
    std::ofstream out(directory / "measurements.json", std::ios::trunc);
    if (!out) throw IoError("cannot write measurement manifest");
    out << manifest.dump(2) << "\n";
}

LoadedMeasurements read_measurement_set(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open measurement manifest: " + manifest_path.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed measurement manifest: " + std::string(e.what()));
    }
    if (manifest.value("format", "") != "stokeselast-measurements/1")
        throw IoError("not a measurement manifest: " + manifest_path.string());

    LoadedMeasurements out;
    out.omega2 = manifest.at("omega2").get<double>();
    const auto dir = manifest_path.parent_path();
    for (const auto& rec : manifest.at("records")) {
        MeasurementRecord r;
        r.label = rec.at("label").get<std::string>();
        r.boundary_data = read_vector_field(dir / rec.at("boundary_data").get<std::string>());
        r.measured = read_vector_field(dir / rec.at("measured").get<std::string>());
        out.data.records.push_back(std::move(r));
    }
    if (manifest.contains("noise")) {
        const auto& n = manifest.at("noise");
        out.data.noise.model = n.value("model", "none");
        out.data.noise.level = n.value("level", 0.0);
        out.data.noise.seed = n.value("seed", std::uint64_t(0));
        out.data.noise.absolute = n.value("absolute", std::vector<double>{});
    }
    out.data.validate();
    return out;
}

} // namespace selast
