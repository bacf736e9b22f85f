#pragma once

#include <vector>

#include "ih/common.hpp"

namespace ih {

using Vector = std::vector<double>;

struct Triplet {
    int row;
    int col;
    double value;
};

struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets;   // size n_rows + 1
    std::vector<int> col_indices;   // sorted and unique per row
    std::vector<double> values;
    bool structurally_symmetric = false;

    int nnz() const { return static_cast<int>(col_indices.size()); }
};

// Duplicate (i,j) entries are summed; rows come out sorted. Detects and flags
// a structurally symmetric pattern.
CsrMatrix csr_from_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets);

void spmv(const CsrMatrix& A, const Vector& x, Vector& y);
Vector spmv(const CsrMatrix& A, const Vector& x);

enum class Preconditioner { None, Jacobi };

struct SolveReport {
    int iterations = 0;
    double final_relative_residual = 0.0;
    bool converged = false;
};

// Preconditioned conjugate gradients; A must be symmetric positive definite
// (caller-asserted). x carries the initial guess in and the solution out.
SolveReport cg_solve(const CsrMatrix& A, const Vector& b, Vector& x, double tol, int max_iter,
                     Preconditioner precond = Preconditioner::Jacobi);

// Preconditioned BiCGStab for general matrices. On a rho-breakdown the method
// restarts once from the current iterate, then reports failure.
SolveReport bicgstab_solve(const CsrMatrix& A, const Vector& b, Vector& x, double tol,
                           int max_iter, Preconditioner precond = Preconditioner::Jacobi);

struct ConstrainedSolution {
    Vector x;
    double multiplier = 0.0;
    SolveReport report;
};

// Solves the bordered system [A m; m^T 0][x; lambda] = [b; 0] for a singular
// symmetric A with constant kernel (pure-Neumann stiffness). The weight vector
// m is typically the lumped-mass vector, so m^T x ~ integral of x.
ConstrainedSolution solve_with_mean_constraint(const CsrMatrix& A, const Vector& b,
                                               const Vector& weight, double tol, int max_iter);

// Small dense helpers shared by solvers and tests.
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

}  // namespace ih
