#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stokeselast/adjointgrad.hpp"
#include "stokeselast/fieldcore.hpp"

namespace selast {

struct Inclusion {
    double cx = 0.5, cy = 0.5;
    double width = 0.1;      // Gaussian sigma
    double amplitude = 1.0;
};

/// Synthetic coefficient field: background plus Gaussian inclusions sampled
/// at cell centers. Inclusions must keep a 3-sigma clearance from the
/// boundary so the field equals the background on the boundary ring up to
/// the Gaussian tail.
struct PhantomSpec {
    enum class Kind { Constant, GaussianInclusion, MultiInclusion };
    Kind kind = Kind::Constant;
    double background = 1.0;
    std::vector<Inclusion> inclusions;
    double mu_floor = 1e-3;
};

ScalarField generate_phantom(const Grid2& grid, const PhantomSpec& spec);

enum class BoundaryMode { ShearX, Rotation, Poiseuille };

const char* boundary_mode_name(BoundaryMode m);
BoundaryMode boundary_mode_from_name(std::string_view name);

/// Face-staggered trace extension of the chosen analytic mode:
/// shear-x (y, 0), rotation (-y, x), poiseuille (y(1-y), 0). The rotation
/// mode sets `warning`: its symmetric gradient vanishes, so it carries no
/// usable strain information for the 2D non-degeneracy check.
VectorField2 shear_boundary_data(const Grid2& grid, BoundaryMode mode,
                                 std::string* warning = nullptr);

/// u plus Gaussian noise scaled so that the L2 norm of the perturbation is
/// exactly level * ||u||. Deterministic per seed on every platform (own
/// normal sampler on top of mt19937_64). `absolute_out` receives the
/// realized L2 noise norm.
VectorField2 add_noise(const VectorField2& u, double level, std::uint64_t seed,
                       double* absolute_out = nullptr);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// field files: a line-oriented "key = value" manifest naming one raw
// little-endian f64 payload per component in a sibling file. Round trips are
// bit-exact; payload checksums are verified on read.

void write_field(const std::filesystem::path& manifest_path, const ScalarField& f,
                 const std::string& name);
void write_field(const std::filesystem::path& manifest_path, const VectorField2& u,
                 const std::string& name);

ScalarField read_scalar_field(const std::filesystem::path& manifest_path);
VectorField2 read_vector_field(const std::filesystem::path& manifest_path);

using FieldVariant = std::variant<ScalarField, VectorField2>;
FieldVariant read_field(const std::filesystem::path& manifest_path);

// ---------------------------------------------------------------------------
// measurement-set manifest: one JSON file naming the per-record field files

void write_measurement_set(const std::filesystem::path& directory,
                           const MeasurementSet& data, double omega2);

struct LoadedMeasurements {
    MeasurementSet data;
    double omega2 = 0.0;
};
LoadedMeasurements read_measurement_set(const std::filesystem::path& manifest_path);

} // namespace selast
