#include "ih/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ih {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

CsrMatrix csr_from_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
            throw ValidationError("csr_from_triplets: index (" + std::to_string(t.row) + "," +
                                  std::to_string(t.col) + ") out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix A;
    A.n_rows = n_rows;
    A.n_cols = n_cols;
    A.row_offsets.assign(n_rows + 1, 0);
    A.col_indices.reserve(triplets.size());
    A.values.reserve(triplets.size());
    size_t i = 0;
    for (int row = 0; row < n_rows; ++row) {
        while (i < triplets.size() && triplets[i].row == row) {
            const int col = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && triplets[i].row == row && triplets[i].col == col)
                v += triplets[i++].value;
            A.col_indices.push_back(col);
            A.values.push_back(v);
        }
        A.row_offsets[row + 1] = static_cast<int>(A.col_indices.size());
    }

    // pattern symmetry check
    if (n_rows == n_cols) {
        bool sym = true;
        for (int row = 0; row < n_rows && sym; ++row) {
            for (int k = A.row_offsets[row]; k < A.row_offsets[row + 1]; ++k) {
                const int col = A.col_indices[k];
                const auto begin = A.col_indices.begin() + A.row_offsets[col];
                const auto end = A.col_indices.begin() + A.row_offsets[col + 1];
                if (!std::binary_search(begin, end, row)) {
                    sym = false;
                    break;
                }
            }
        }
        A.structurally_symmetric = sym;
    }
    return A;
}

void spmv(const CsrMatrix& A, const Vector& x, Vector& y) {
    if (static_cast<int>(x.size()) != A.n_cols)
        throw ValidationError("spmv: dimension mismatch");
    y.assign(A.n_rows, 0.0);
    for (int row = 0; row < A.n_rows; ++row) {
        double s = 0.0;
        for (int k = A.row_offsets[row]; k < A.row_offsets[row + 1]; ++k)
            s += A.values[k] * x[A.col_indices[k]];
        y[row] = s;
    }
}

Vector spmv(const CsrMatrix& A, const Vector& x) {
    Vector y;
    spmv(A, x, y);
    return y;
}

namespace {

// Inverse diagonal for Jacobi; unit entries where the diagonal vanishes.
Vector inverse_diagonal(const CsrMatrix& A) {
    Vector d(A.n_rows, 1.0);
    for (int row = 0; row < A.n_rows; ++row) {
        for (int k = A.row_offsets[row]; k < A.row_offsets[row + 1]; ++k) {
            if (A.col_indices[k] == row && A.values[k] != 0.0) {
                d[row] = 1.0 / A.values[k];
                break;
            }
        }
    }
    return d;
}

void check_finite(const Vector& v, const char* where) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericError(std::string(where) + ": non-finite value");
}

}  // namespace

SolveReport cg_solve(const CsrMatrix& A, const Vector& b, Vector& x, double tol, int max_iter,
                     Preconditioner precond) {
    if (A.n_rows != A.n_cols || static_cast<int>(b.size()) != A.n_rows)
        throw ValidationError("cg_solve: dimension mismatch");
    check_finite(b, "cg_solve");
    if (static_cast<int>(x.size()) != A.n_rows) x.assign(A.n_rows, 0.0);

    SolveReport report;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(A.n_rows, 0.0);
        report.converged = true;
        return report;
    }
    const Vector dinv = precond == Preconditioner::Jacobi ? inverse_diagonal(A)
                                                          : Vector(A.n_rows, 1.0);
    Vector r = spmv(A, x);
    for (int i = 0; i < A.n_rows; ++i) r[i] = b[i] - r[i];
    Vector z(A.n_rows), p(A.n_rows), Ap(A.n_rows);
    for (int i = 0; i < A.n_rows; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);

    while (report.iterations < max_iter) {
        if (rnorm / bnorm <= tol) break;
        spmv(A, p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) throw NumericError("cg_solve: matrix is not positive definite");
        const double alpha = rz / pAp;
        for (int i = 0; i < A.n_rows; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        for (int i = 0; i < A.n_rows; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < A.n_rows; ++i) p[i] = z[i] + beta * p[i];
        rnorm = norm2(r);
        if (!std::isfinite(rnorm)) throw NumericError("cg_solve: residual diverged to NaN/inf");
        ++report.iterations;
    }
    report.final_relative_residual = rnorm / bnorm;
    report.converged = report.final_relative_residual <= tol;
    return report;
}

SolveReport bicgstab_solve(const CsrMatrix& A, const Vector& b, Vector& x, double tol,
                           int max_iter, Preconditioner precond) {
    if (A.n_rows != A.n_cols || static_cast<int>(b.size()) != A.n_rows)
        throw ValidationError("bicgstab_solve: dimension mismatch");
    check_finite(b, "bicgstab_solve");
    if (static_cast<int>(x.size()) != A.n_rows) x.assign(A.n_rows, 0.0);

    SolveReport report;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(A.n_rows, 0.0);
        report.converged = true;
        return report;
    }
    const Vector dinv = precond == Preconditioner::Jacobi ? inverse_diagonal(A)
                                                          : Vector(A.n_rows, 1.0);
    const int n = A.n_rows;
    Vector r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);

    int restarts = 0;
    auto initialize = [&]() {
        r = spmv(A, x);
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        rhat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
    };
    initialize();
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double rnorm = norm2(r);

    while (report.iterations < max_iter) {
        if (rnorm / bnorm <= tol) break;
        const double rho_new = dot(rhat, r);
        if (std::abs(rho_new) < 1e-300 * bnorm * bnorm || omega == 0.0) {
            if (restarts++ >= 1) break;  // restart once, then give up
            initialize();
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            rnorm = norm2(r);
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (int i = 0; i < n; ++i) phat[i] = dinv[i] * p[i];
        spmv(A, phat, v);
        const double rhat_v = dot(rhat, v);
        if (rhat_v == 0.0) {
            if (restarts++ >= 1) break;
            initialize();
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            rnorm = norm2(r);
            continue;
        }
        alpha = rho / rhat_v;
        for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) / bnorm <= tol) {
            for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
            r = s;
            rnorm = norm2(r);
            ++report.iterations;
            break;
        }
        for (int i = 0; i < n; ++i) shat[i] = dinv[i] * s[i];
        spmv(A, shat, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(r);
        if (!std::isfinite(rnorm)) throw NumericError("bicgstab_solve: residual diverged to NaN/inf");
        ++report.iterations;
    }
    report.final_relative_residual = rnorm / bnorm;
    report.converged = report.final_relative_residual <= tol;
    return report;
}

ConstrainedSolution solve_with_mean_constraint(const CsrMatrix& A, const Vector& b,
                                               const Vector& weight, double tol, int max_iter) {
    if (A.n_rows != A.n_cols || static_cast<int>(b.size()) != A.n_rows ||
        static_cast<int>(weight.size()) != A.n_rows)
        throw ValidationError("solve_with_mean_constraint: dimension mismatch");
    const int n = A.n_rows;

    // Scale the constraint row/column into the magnitude range of A, otherwise
    // the bordered system is badly balanced for Krylov iterations.
    double diag_scale = 0.0;
    for (int row = 0; row < n; ++row)
        for (int k = A.row_offsets[row]; k < A.row_offsets[row + 1]; ++k)
            if (A.col_indices[k] == row) diag_scale += std::abs(A.values[k]);
    diag_scale = diag_scale > 0.0 ? diag_scale / n : 1.0;
    double wmax = 0.0;
    for (double w : weight) wmax = std::max(wmax, std::abs(w));
    if (wmax == 0.0) throw ValidationError("solve_with_mean_constraint: zero weight vector");
    const double scale = diag_scale / wmax;

    std::vector<Triplet> triplets;
    triplets.reserve(A.nnz() + 2 * n);
    for (int row = 0; row < n; ++row)
        for (int k = A.row_offsets[row]; k < A.row_offsets[row + 1]; ++k)
            triplets.push_back({row, A.col_indices[k], A.values[k]});
    for (int i = 0; i < n; ++i) {
        triplets.push_back({i, n, scale * weight[i]});
        triplets.push_back({n, i, scale * weight[i]});
    }
    const CsrMatrix bordered = csr_from_triplets(n + 1, n + 1, std::move(triplets));

    Vector rhs(n + 1, 0.0);
    std::copy(b.begin(), b.end(), rhs.begin());
    Vector y(n + 1, 0.0);
    ConstrainedSolution sol;
    sol.report = bicgstab_solve(bordered, rhs, y, tol, max_iter);
    if (!sol.report.converged)
        throw NumericError("solve_with_mean_constraint: bordered solve stalled at relative residual " +
                           std::to_string(sol.report.final_relative_residual));

    sol.x.assign(y.begin(), y.begin() + n);
    sol.multiplier = y[n] * scale;

    // The kernel of A is the constant vector, so shifting x leaves A x intact;
    // use it to zero the constraint exactly.
    double wx = 0.0, wsum = 0.0;
    for (int i = 0; i < n; ++i) {
        wx += weight[i] * sol.x[i];
        wsum += weight[i];
    }
    if (wsum != 0.0) {
        const double shift = wx / wsum;
        for (int i = 0; i < n; ++i) sol.x[i] -= shift;
    }
    return sol;
}

}  // namespace ih
