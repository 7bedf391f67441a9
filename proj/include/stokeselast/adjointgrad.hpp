#pragma once

#include <string>
#include <vector>

#include "stokeselast/fieldcore.hpp"
#include "stokeselast/stokesfwd.hpp"

namespace selast {

struct MeasurementRecord {
    VectorField2 boundary_data;  // face-staggered trace extension
    VectorField2 measured;       // face-staggered displacement data
    std::string label;
};

struct NoiseInfo {
    std::string model = "none";  // "none" or "gaussian-l2"
    double level = 0.0;          // relative L2 level
    std::uint64_t seed = 0;
    std::vector<double> absolute;  // realized L2 noise norm per record

    bool present() const { return model != "none" && level > 0.0; }
    /// Combined absolute noise magnitude (quadrature sum over records).
    double combined_absolute() const;
};

/// One or more (boundary data, measured displacement) pairs on a single
/// grid. Two or more records realize the two-functional discrepancy used in
/// three dimensions.
struct MeasurementSet {
    std::vector<MeasurementRecord> records;
    NoiseInfo noise;

    const Grid2& grid() const;
    void validate() const;
};

struct GradientResult {
    double objective = 0.0;
    ScalarField gradient;  // cell-centered; zero on the boundary cell ring
    std::vector<double> residual_norms;
    std::vector<SolveReport> forward_reports;
    std::vector<SolveReport> adjoint_reports;
};

/// Discrepancy between computed and measured displacements:
/// sum over records of 1/2 || u(mu; F) - u_m ||_{L2}^2.
double objective(const ScalarField& mu, double omega2, const MeasurementSet& data);

/// Forward sweep at the operator's current coefficient: per-record states,
/// the objective, and the residual norms. Feeds both the line search and the
/// gradient so an accepted trial's solves are not repeated.
struct ForwardCache {
    std::vector<StokesSolution> solutions;
    double objective = 0.0;
    std::vector<double> residual_norms;
};

ForwardCache evaluate_forward(const StokesOperator& op, const MeasurementSet& data);

/// Adjoint system: same operator as the forward solve with homogeneous
/// Dirichlet data, zero-mean adjoint pressure and the data residual as load:
///   2 div(mu grad^s v) + omega2 v + grad q = residual,  div v = 0,  v = 0 on
/// the boundary. All arithmetic is real.
std::pair<VectorField2, ScalarField> solve_adjoint(const ScalarField& mu, double omega2,
                                                   const VectorField2& residual);

/// Objective value plus its exact discrete derivative with respect to the
/// cell values of mu. The derivative is the assembly-consistent strain
/// product of the forward and adjoint states gathered at cell centers
/// (diagonal strains at the cell, shear products summed over the four
/// corner nodes), accumulated over measurements. The boundary cell ring is
/// forced to zero: mu is known on the boundary and must not be updated.
GradientResult gradient(const ScalarField& mu, double omega2, const MeasurementSet& data);

/// Same as gradient() but reusing a prebuilt forward operator.
GradientResult gradient(const StokesOperator& op, const MeasurementSet& data);

/// Same as gradient() with the forward sweep already done (adjoint solves
/// only); `cache` must come from evaluate_forward on the same operator.
GradientResult gradient_from_cache(const StokesOperator& op, const MeasurementSet& data,
                                   const ForwardCache& cache);

} // namespace selast
