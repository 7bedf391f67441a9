#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stokeselast/adjointgrad.hpp"
#include "stokeselast/fieldcore.hpp"

namespace selast {

struct LandweberConfig {
    double sigma = 1.0;                // step size; line-search starting scale
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;  // relative to the initial gradient norm,
                                       // doubling as an absolute floor
    double discrepancy_tau = 1.5;      // noisy-data stopping factor
    double mu_floor = 1e-3;
    bool line_search = true;           // halving backtracking, simple decrease
    std::uint64_t seed = 0;

    int snapshot_cadence = 0;          // 0 disables snapshots
    std::function<void(int, const ScalarField&)> snapshot_hook;
    const ScalarField* ground_truth = nullptr;  // enables error columns

    void validate() const;
};

enum class StopReason {
    GradientTolerance,
    MaxIterations,
    Discrepancy,
    LineSearchFailed,
    Diverged,
    SolverFailure,
};

const char* stop_reason_name(StopReason r);

struct IterationRow {
    int n = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
    double step = 0.0;        // accepted step that produced the next iterate
    double error_l2 = std::numeric_limits<double>::quiet_NaN();
    double error_h4 = std::numeric_limits<double>::quiet_NaN();
};

struct IterationTrace {
    std::vector<IterationRow> rows;
    ScalarField mu_final;
    StopReason stop = StopReason::MaxIterations;
    bool diverged = false;
    std::string message;
};

/// Gradient-descent iteration on the discrepancy functional:
/// mu_{n+1} = clamp(mu_n - sigma * DJ[mu_n], mu_floor), boundary cell ring
/// frozen at the initial values. In line-search mode sigma comes from
/// halving backtracking on a simple decrease, seeded with a spectral
/// (Barzilai-Borwein) step once a secant pair exists. Stops on relative
/// gradient norm, iteration budget, or (when noise metadata is present) the
/// discrepancy principle J <= (tau * delta)^2 / 2 with delta the recorded
/// absolute noise norm. In fixed-step mode an objective increase stops the
/// run and flags divergence. Solver failures return the trace accumulated
/// so far.
IterationTrace run_landweber(const ScalarField& mu0, double omega2,
                             const MeasurementSet& data, const LandweberConfig& cfg);

} // namespace selast
