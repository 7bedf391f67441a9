#include "stokeselast/adjointgrad.hpp"

#include <cmath>

namespace selast {

double NoiseInfo::combined_absolute() const {
    double acc = 0.0;
    for (double a : absolute) acc += a * a;
    return std::sqrt(acc);
}

const Grid2& MeasurementSet::grid() const {
    validate();
    return records.front().boundary_data.grid();
}

void MeasurementSet::validate() const {
    if (records.empty()) throw ValidationError("measurement set needs at least one record");
    const Grid2& g = records.front().boundary_data.grid();
    for (const auto& rec : records) {
        if (!rec.boundary_data.face_staggered() || !rec.measured.face_staggered())
            throw ValidationError("measurement fields must be face-staggered");
        if (!(rec.boundary_data.grid() == g) || !(rec.measured.grid() == g))
            throw ValidationError("all measurement records must share one grid");
    }
}

double objective(const ScalarField& mu, double omega2, const MeasurementSet& data) {
    data.validate();
    StokesOperator op(data.grid(), mu, omega2);
    double J = 0.0;
    for (const auto& rec : data.records) {
        const StokesSolution sol = op.solve(rec.boundary_data);
        const VectorField2 r = sol.u - rec.measured;
        J += 0.5 * inner(r, r);
    }
    return J;
}

std::pair<VectorField2, ScalarField> solve_adjoint(const ScalarField& mu, double omega2,
                                                   const VectorField2& residual) {
    StokesOperator op(residual.grid(), mu, omega2);
    StokesSolution sol = op.solve_homogeneous(residual);
    return {std::move(sol.u), std::move(sol.p)};
}

ForwardCache evaluate_forward(const StokesOperator& op, const MeasurementSet& data) {
    data.validate();
    if (!(data.grid() == op.grid()))
        throw ValidationError("operator grid does not match measurement grid");
    ForwardCache cache;
    for (const auto& rec : data.records) {
        StokesSolution fwd = op.solve(rec.boundary_data);
        const VectorField2 r = fwd.u - rec.measured;
        cache.objective += 0.5 * inner(r, r);
        cache.residual_norms.push_back(l2_norm(r));
        cache.solutions.push_back(std::move(fwd));
    }
    return cache;
}

GradientResult gradient_from_cache(const StokesOperator& op, const MeasurementSet& data,
                                   const ForwardCache& cache) {
    data.validate();
    const Grid2& g = data.grid();
    if (cache.solutions.size() != data.records.size())
        throw ValidationError("forward cache does not match the measurement set");

    GradientResult out;
    out.objective = cache.objective;
    out.residual_norms = cache.residual_norms;
    out.gradient = ScalarField(g, Stagger::CellCenter);

    for (size_t k = 0; k < data.records.size(); ++k) {
        const StokesSolution& fwd = cache.solutions[k];
        out.forward_reports.push_back(fwd.report);

        const VectorField2 r = fwd.u - data.records[k].measured;
        StokesSolution adj = op.solve_homogeneous(r);
        out.adjoint_reports.push_back(adj.report);

        // d/dmu_c of the discrete objective: diagonal strain products at the
        // cell plus shear products over the cell's four nodes (each node
        // carries 1/4 of the cell's contribution to the node average of mu;
        // gamma = 2 * txy cancels the 1/4 against the factor 4).
        const SymTensorField2 su = sym_gradient(fwd.u);
        const SymTensorField2 sv = sym_gradient(adj.u);
        for (int cj = 1; cj < g.ny - 1; ++cj)
            for (int ci = 1; ci < g.nx - 1; ++ci) {
                double acc = 2.0 * (su.txx(ci, cj) * sv.txx(ci, cj) +
                                    su.tyy(ci, cj) * sv.tyy(ci, cj));
                acc += su.txy(ci, cj) * sv.txy(ci, cj);
                acc += su.txy(ci + 1, cj) * sv.txy(ci + 1, cj);
                acc += su.txy(ci, cj + 1) * sv.txy(ci, cj + 1);
                acc += su.txy(ci + 1, cj + 1) * sv.txy(ci + 1, cj + 1);
                out.gradient(ci, cj) += acc;
            }
    }
    return out;
}

GradientResult gradient(const StokesOperator& op, const MeasurementSet& data) {
    return gradient_from_cache(op, data, evaluate_forward(op, data));
}

GradientResult gradient(const ScalarField& mu, double omega2, const MeasurementSet& data) {
    data.validate();
    StokesOperator op(data.grid(), mu, omega2);
    return gradient(op, data);
}

} // namespace selast
