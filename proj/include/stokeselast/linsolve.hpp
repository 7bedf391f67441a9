#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <optional>
#include <vector>

#include "stokeselast/errors.hpp"

namespace selast {

enum class SolveMethod { Direct, Iterative };

struct SolveReport {
    double relative_residual = 0.0;
    SolveMethod method = SolveMethod::Direct;
    int iterations = 0;  // refinement passes (direct) or Krylov iterations
    std::optional<double> condition_estimate;
};

/// Square sparse matrix assembled from (row, col, value) triplets; duplicates
/// are summed during consolidation. Storage is compressed row-major.
class SparseMatrix {
public:
    using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    SparseMatrix(int n, const std::vector<Eigen::Triplet<double>>& triplets,
                 bool symmetric = false);

    int size() const { return int(mat_.rows()); }
    bool symmetric() const { return symmetric_; }
    const Storage& storage() const { return mat_; }

    /// ||A - A^T|| / ||A|| in Frobenius norm.
    double symmetry_defect() const;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mat_ * x; }

private:
    Storage mat_;
    bool symmetric_ = false;
};

struct SolveOptions {
    double tol = 1e-10;
    SolveMethod method = SolveMethod::Direct;
    int max_iterations = 20000;  // Krylov budget
};

/// Reusable sparse LU factorization with deterministic pivot order. Solves
/// against many right-hand sides with iterative refinement until the
/// relative residual meets the tolerance. `refactorize` reuses the symbolic
/// analysis for a matrix with the same sparsity pattern.
class Factorization {
public:
    explicit Factorization(const SparseMatrix& A);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;

    void refactorize(const SparseMatrix& A);

    std::pair<Eigen::VectorXd, SolveReport> solve(const Eigen::VectorXd& b,
                                                  double tol = 1e-10) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solve A x = b to relative residual <= tol. Direct path: sparse LU plus
/// refinement. Iterative path: MINRES (symmetric indefinite), same residual
/// contract. Throws SolverError on structural singularity or when the
/// residual cannot be achieved (near-singular system).
std::pair<Eigen::VectorXd, SolveReport> solve(const SparseMatrix& A,
                                              const Eigen::VectorXd& b,
                                              const SolveOptions& opts = {});

} // namespace selast
