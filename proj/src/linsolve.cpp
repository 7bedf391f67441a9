#include "stokeselast/linsolve.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>

namespace selast {

SparseMatrix::SparseMatrix(int n, const std::vector<Eigen::Triplet<double>>& triplets,
                           bool symmetric)
    : mat_(n, n), symmetric_(symmetric) {
    if (n <= 0) throw ValidationError("matrix dimension must be positive");
    for (const auto& t : triplets)
        if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= n)
            throw ValidationError("triplet index out of range");
    mat_.setFromTriplets(triplets.begin(), triplets.end());
    mat_.makeCompressed();
#ifndef NDEBUG
    if (symmetric_ && symmetry_defect() > 1e-14)
        throw ValidationError("matrix flagged symmetric is not symmetric");
#endif
}

double SparseMatrix::symmetry_defect() const {
    Storage diff = Storage(mat_ - Storage(mat_.transpose()));
    const double denom = mat_.norm();
    return denom > 0.0 ? diff.norm() / denom : 0.0;
}

namespace {

double relative_residual(const SparseMatrix::Storage& A, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b, double bnorm) {
    return (b - A * x).norm() / bnorm;
}

} // namespace

struct Factorization::Impl {
    Eigen::SparseMatrix<double> A;  // column-major copy for the LU backend
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

Factorization::Factorization(const SparseMatrix& A) : impl_(std::make_unique<Impl>()) {
    impl_->A = A.storage();
    impl_->lu.analyzePattern(impl_->A);
    impl_->lu.factorize(impl_->A);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("sparse factorization failed (singular or near-singular matrix)",
                          true);
}

void Factorization::refactorize(const SparseMatrix& A) {
    if (A.size() != impl_->A.rows())
        throw ValidationError("refactorize requires a matrix of the original size");
    impl_->A = A.storage();
    impl_->lu.factorize(impl_->A);
    if (impl_->lu.info() != Eigen::Success)
        throw SolverError("sparse factorization failed (singular or near-singular matrix)",
                          true);
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

std::pair<Eigen::VectorXd, SolveReport> Factorization::solve(const Eigen::VectorXd& b,
                                                             double tol) const {
    if (b.size() != impl_->A.rows())
        throw ValidationError("right-hand side length does not match matrix");
    if (!(tol > 0.0 && tol <= 1e-6))
        throw ValidationError("solve tolerance must lie in (0, 1e-6]");

    SolveReport report;
    report.method = SolveMethod::Direct;

    const double bnorm = b.norm();
    if (bnorm == 0.0)
        return {Eigen::VectorXd::Zero(b.size()), report};

    Eigen::VectorXd x = impl_->lu.solve(b);
    if (!x.allFinite())
        throw SolverError("direct solve produced non-finite values (near-singular matrix)",
                          true);

    double res = relative_residual(impl_->A, x, b, bnorm);
    const int max_refinements = 4;
    while (res > tol && report.iterations < max_refinements) {
        Eigen::VectorXd r = b - impl_->A * x;
        Eigen::VectorXd dx = impl_->lu.solve(r);
        if (!dx.allFinite()) break;
        x += dx;
        ++report.iterations;
        const double next = relative_residual(impl_->A, x, b, bnorm);
        if (next >= res) break;  // refinement stalled
        res = next;
    }
    if (res > tol)
        throw SolverError("residual stalled above tolerance (near-singular matrix)", true);

    report.relative_residual = res;
    return {x, report};
}

namespace {

std::pair<Eigen::VectorXd, SolveReport> solve_minres(const SparseMatrix& A,
                                                     const Eigen::VectorXd& b,
                                                     const SolveOptions& opts) {
    if (!A.symmetric())
        throw ValidationError("iterative path requires a symmetric matrix");

    SolveReport report;
    report.method = SolveMethod::Iterative;

    const double bnorm = b.norm();
    if (bnorm == 0.0)
        return {Eigen::VectorXd::Zero(b.size()), report};

    Eigen::SparseMatrix<double> Acol = A.storage();
    Eigen::MINRES<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                  Eigen::IdentityPreconditioner>
        minres;
    minres.setTolerance(0.1 * opts.tol);
    minres.setMaxIterations(opts.max_iterations);
    minres.compute(Acol);
    Eigen::VectorXd x = minres.solve(b);

    report.iterations = int(minres.iterations());
    const double res = (b - Acol * x).norm() / bnorm;
    if (!x.allFinite() || res > opts.tol)
        throw SolverError("iterative solve did not reach tolerance within budget "
                          "(near-singular matrix)",
                          true);
    report.relative_residual = res;
    return {x, report};
}

} // namespace

std::pair<Eigen::VectorXd, SolveReport> solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                                              const SolveOptions& opts) {
    if (b.size() != A.size())
        throw ValidationError("right-hand side length does not match matrix");
    if (opts.method == SolveMethod::Iterative) return solve_minres(A, b, opts);
    return Factorization(A).solve(b, opts.tol);
}

} // namespace selast
