#include "stokeselast/landweber.hpp"

#include <cmath>

namespace selast {

void LandweberConfig::validate() const {
    if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
    if (!(gradient_tolerance > 0.0))
        throw ValidationError("gradient_tolerance must be positive");
    if (!(discrepancy_tau >= 1.0)) throw ValidationError("discrepancy_tau must be >= 1");
    if (!(mu_floor > 0.0)) throw ValidationError("mu_floor must be positive");
    if (snapshot_cadence < 0) throw ValidationError("snapshot_cadence must be >= 0");
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::GradientTolerance: return "gradient-tolerance";
        case StopReason::MaxIterations: return "max-iterations";
        case StopReason::Discrepancy: return "discrepancy";
        case StopReason::LineSearchFailed: return "line-search-failed";
        case StopReason::Diverged: return "diverged";
        case StopReason::SolverFailure: return "solver-failure";
    }
    return "?";
}

namespace {

/// Descent update with floor clamp; the boundary cell ring is copied from
/// the reference field bit-for-bit.
ScalarField descend(const ScalarField& mu, const ScalarField& grad, double step,
                    double floor, const ScalarField& ring_source) {
    ScalarField next = mu;
    next.values -= step * grad.values;
    next.values = next.values.cwiseMax(floor);
    const Grid2& g = mu.grid;
    for (int i = 0; i < g.nx; ++i) {
        next(i, 0) = ring_source(i, 0);
        next(i, g.ny - 1) = ring_source(i, g.ny - 1);
    }
    for (int j = 0; j < g.ny; ++j) {
        next(0, j) = ring_source(0, j);
        next(g.nx - 1, j) = ring_source(g.nx - 1, j);
    }
    return next;
}

} // namespace

IterationTrace run_landweber(const ScalarField& mu0, double omega2,
                             const MeasurementSet& data, const LandweberConfig& cfg) {
    cfg.validate();
    data.validate();
    if (mu0.location != Stagger::CellCenter || !(mu0.grid == data.grid()))
        throw ValidationError("mu0 must be cell-centered on the measurement grid");
    if (mu0.values.minCoeff() < cfg.mu_floor)
        throw ValidationError("mu0 violates the positivity floor");

    IterationTrace trace;
    ScalarField mu = mu0;

    const double delta = data.noise.present() ? data.noise.combined_absolute() : 0.0;
    const double discrepancy_level =
        delta > 0.0 ? 0.5 * (cfg.discrepancy_tau * delta) * (cfg.discrepancy_tau * delta)
                    : -1.0;

    double gradient_scale = -1.0;
    double step = cfg.sigma;
    bool have_previous = false;
    ScalarField prev_mu, prev_grad;

    auto record_errors = [&](IterationRow& row, const ScalarField& m) {
        if (!cfg.ground_truth) return;
        const ScalarField diff = m - *cfg.ground_truth;
        row.error_l2 = l2_norm(diff);
        row.error_h4 = sobolev_norm(diff, 4, NormMode::Full);
    };

    try {
        StokesOperator op(data.grid(), mu, omega2, 1e-10, cfg.mu_floor);
        ForwardCache cache = evaluate_forward(op, data);

        for (int n = 0;; ++n) {
            const GradientResult gr = gradient_from_cache(op, data, cache);
            IterationRow row;
            row.n = n;
            row.objective = gr.objective;
            row.gradient_norm = l2_norm(gr.gradient);
            record_errors(row, mu);
            trace.rows.push_back(row);

            if (cfg.snapshot_hook && cfg.snapshot_cadence > 0 &&
                n % cfg.snapshot_cadence == 0)
                cfg.snapshot_hook(n, mu);

            if (gradient_scale < 0.0) gradient_scale = row.gradient_norm;

            if (!cfg.line_search && n > 0 &&
                row.objective > trace.rows[n - 1].objective) {
                trace.diverged = true;
                trace.stop = StopReason::Diverged;
                trace.message = "objective increased under the fixed step";
                break;
            }
            if (row.gradient_norm <= cfg.gradient_tolerance * gradient_scale ||
                row.gradient_norm <= cfg.gradient_tolerance) {
                trace.stop = StopReason::GradientTolerance;
                break;
            }
            if (discrepancy_level >= 0.0 && row.objective <= discrepancy_level) {
                trace.stop = StopReason::Discrepancy;
                break;
            }
            if (n >= cfg.max_iterations) {
                trace.stop = StopReason::MaxIterations;
                break;
            }

            if (cfg.line_search) {
                // halving backtracking on a simple decrease; the first trial
                // is the spectral (Barzilai-Borwein) step when the secant
                // pair is usable, otherwise a doubling of the last accepted
                // step
                double trial = 2.0 * step;
                if (have_previous) {
                    ScalarField s = mu - prev_mu;
                    ScalarField y = gr.gradient - prev_grad;
                    const double sy = inner(s, y);
                    if (sy > 0.0 && std::isfinite(sy)) {
                        // alternate the two spectral step lengths
                        const double bb = (n % 2 == 0) ? inner(s, s) / sy
                                                       : sy / inner(y, y);
                        if (std::isfinite(bb) && bb > 0.0) trial = bb;
                    }
                }
                bool accepted = false;
                for (int k = 0; k < 45; ++k) {
                    const ScalarField candidate =
                        descend(mu, gr.gradient, trial, cfg.mu_floor, mu0);
                    op.reset_mu(candidate);
                    ForwardCache cand_cache = evaluate_forward(op, data);
                    if (cand_cache.objective < row.objective) {
                        prev_mu = mu;
                        prev_grad = gr.gradient;
                        have_previous = true;
                        mu = candidate;
                        cache = std::move(cand_cache);
                        step = trial;
                        accepted = true;
                        break;
                    }
                    trial *= 0.5;
                }
                if (!accepted) {
                    trace.stop = StopReason::LineSearchFailed;
                    trace.message = "no decrease along the gradient direction";
                    break;
                }
                trace.rows.back().step = step;
            } else {
                mu = descend(mu, gr.gradient, cfg.sigma, cfg.mu_floor, mu0);
                op.reset_mu(mu);
                cache = evaluate_forward(op, data);
                trace.rows.back().step = cfg.sigma;
            }
        }
    } catch (const SolverError& e) {
        trace.stop = StopReason::SolverFailure;
        trace.message = e.what();
    }

    trace.mu_final = mu;
    return trace;
}

} // namespace selast
