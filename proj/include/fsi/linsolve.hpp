/**
 * @file linsolve.hpp
 * @brief Sparse solvers for the structure, Stokes and advection sub-problems.
 *
 * Every solve re-checks ||Ax - b|| <= tol ||b|| by an explicit product before
 * returning and throws SolveError otherwise. Direct factorizations get up to
 * three steps of iterative refinement first.
 *
 * Defining FSI_HAVE_UMFPACK switches the general LU backend to UMFPACK; the
 * default is Eigen's SparseLU.
 */
#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#ifdef FSI_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "fem.hpp"

namespace fsi {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using SpMatCol = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool used_fallback = false;
};

namespace detail {

inline double rel_residual(const SpMat& A, const Vec& x, const Vec& b) {
    const double nb = b.norm();
    const double nr = (b - A * x).norm();
    return nb > 0.0 ? nr / nb : nr;
}

inline void require_square(const SpMat& A, const Vec& b) {
    if (A.rows() != A.cols()) throw std::invalid_argument("matrix is not square");
    if (A.rows() != b.size()) throw std::invalid_argument("right-hand side size mismatch");
}

}  // namespace detail

/// Reusable LU factorization of a general square sparse matrix.
class LuSolver {
public:
    LuSolver() = default;
    explicit LuSolver(const SpMat& A) { factor(A); }

    void factor(const SpMat& A) {
        if (A.rows() != A.cols()) throw std::invalid_argument("matrix is not square");
        A_ = A;
        // UmfPackLU keeps pointers into the factored matrix, so the copy must outlive it
        Ac_ = A;
        Ac_.makeCompressed();
        lu_ = std::make_unique<Backend>();
        lu_->compute(Ac_);
        if (lu_->info() != Eigen::Success) throw SolveError("LU factorization failed (singular matrix)");
    }

    bool ready() const { return static_cast<bool>(lu_); }
    const SpMat& matrix() const { return A_; }

    Vec solve(const Vec& b, double tol, SolveStats* st = nullptr) const {
        if (!lu_) throw std::logic_error("LuSolver used before factor()");
        detail::require_square(A_, b);
        if (b.squaredNorm() == 0.0) return Vec::Zero(b.size());
        Vec x = lu_->solve(b);
        double res = detail::rel_residual(A_, x, b);
        int it = 0;
        while (!(res <= tol) && it < 3) {
            Vec r = b - A_ * x;
            x += lu_->solve(r);
            res = detail::rel_residual(A_, x, b);
            ++it;
        }
        if (st) *st = {it, res, false};
        if (!(res <= tol))
            throw SolveError("LU solve residual " + std::to_string(res) + " exceeds tolerance " + std::to_string(tol));
        return x;
    }

private:
#ifdef FSI_HAVE_UMFPACK
    using Backend = Eigen::UmfPackLU<SpMatCol>;
#else
    using Backend = Eigen::SparseLU<SpMatCol, Eigen::COLAMDOrdering<int>>;
#endif
    SpMat A_;
    SpMatCol Ac_;
    std::unique_ptr<Backend> lu_;
};

/// Reusable LDL^T factorization of a symmetric positive definite matrix.
class SpdSolver {
public:
    SpdSolver() = default;
    explicit SpdSolver(const SpMat& A) { factor(A); }

    void factor(const SpMat& A) {
        if (A.rows() != A.cols()) throw std::invalid_argument("matrix is not square");
        A_ = A;
        SpMatCol Ac = A;
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMatCol>>();
        ldlt_->compute(Ac);
        if (ldlt_->info() != Eigen::Success) throw SolveError("LDLT factorization failed");
        if ((ldlt_->vectorD().array() <= 0.0).any()) throw SolveError("breakdown: matrix is not positive definite");
    }

    bool ready() const { return static_cast<bool>(ldlt_); }

    Vec solve(const Vec& b, double tol, SolveStats* st = nullptr) const {
        if (!ldlt_) throw std::logic_error("SpdSolver used before factor()");
        detail::require_square(A_, b);
        if (b.squaredNorm() == 0.0) return Vec::Zero(b.size());
        Vec x = ldlt_->solve(b);
        double res = detail::rel_residual(A_, x, b);
        int it = 0;
        while (!(res <= tol) && it < 3) {
            Vec r = b - A_ * x;
            x += ldlt_->solve(r);
            res = detail::rel_residual(A_, x, b);
            ++it;
        }
        if (st) *st = {it, res, false};
        if (!(res <= tol))
            throw SolveError("LDLT solve residual " + std::to_string(res) + " exceeds tolerance " + std::to_string(tol));
        return x;
    }

private:
    SpMat A_;
    std::unique_ptr<Eigen::SimplicialLDLT<SpMatCol>> ldlt_;
};

/// Conjugate gradients with a diagonal preconditioner; falls back to LDL^T if the iteration stalls.
inline Vec solve_spd(const SpMat& A, const Vec& b, double tol = 1e-10, SolveStats* st = nullptr) {
    detail::require_square(A, b);
    if (b.squaredNorm() == 0.0) {
        if (st) *st = {};
        return Vec::Zero(b.size());
    }
    for (int i = 0; i < A.rows(); ++i)
        if (!(A.coeff(i, i) > 0.0)) throw SolveError("breakdown: non-positive diagonal entry, matrix is not SPD");
    SpMatCol Ac = A;
    Eigen::ConjugateGradient<SpMatCol, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(0.1 * tol);
    cg.setMaxIterations(std::max<int>(1000, 10 * static_cast<int>(A.rows())));
    cg.compute(Ac);
    Vec x = cg.solve(b);
    double res = detail::rel_residual(A, x, b);
    if (cg.info() == Eigen::Success && res <= tol) {
        if (st) *st = {static_cast<int>(cg.iterations()), res, false};
        return x;
    }
    SpdSolver direct(A);
    SolveStats inner;
    x = direct.solve(b, tol, &inner);
    if (st) *st = {static_cast<int>(cg.iterations()), inner.relative_residual, true};
    return x;
}

/// Restarted GMRES with an incomplete LU preconditioner; falls back to sparse LU.
inline Vec solve_nonsym(const SpMat& A, const Vec& b, double tol = 1e-10, SolveStats* st = nullptr) {
    detail::require_square(A, b);
    if (b.squaredNorm() == 0.0) {
        if (st) *st = {};
        return Vec::Zero(b.size());
    }
    SpMatCol Ac = A;
    Eigen::GMRES<SpMatCol, Eigen::IncompleteLUT<double>> gmres;
    gmres.setTolerance(0.1 * tol);
    gmres.set_restart(50);
    gmres.setMaxIterations(500);
    gmres.compute(Ac);
    Vec x;
    if (gmres.info() == Eigen::Success) {
        x = gmres.solve(b);
        const double res = detail::rel_residual(A, x, b);
        if (gmres.info() == Eigen::Success && res <= tol) {
            if (st) *st = {static_cast<int>(gmres.iterations()), res, false};
            return x;
        }
    }
    LuSolver lu(A);
    SolveStats inner;
    x = lu.solve(b, tol, &inner);
    if (st) *st = {inner.iterations, inner.relative_residual, true};
    return x;
}

/// Block system [A BT; B 0] [v; p] = [f; g] by sparse LU of the assembled block.
inline std::pair<Vec, Vec> solve_saddle(const SpMat& A, const SpMat& BT, const SpMat& B, const Vec& f, const Vec& g,
                                        double tol = 1e-10) {
    const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.rows());
    if (BT.rows() != n || BT.cols() != m || B.cols() != n || f.size() != n || g.size() != m)
        throw std::invalid_argument("saddle block sizes mismatch");
    if (f.squaredNorm() == 0.0 && g.squaredNorm() == 0.0) return {Vec::Zero(n), Vec::Zero(m)};
    Triplets t;
    t.reserve(static_cast<std::size_t>(A.nonZeros() + BT.nonZeros() + B.nonZeros()));
    append_triplets(t, A);
    append_triplets(t, BT, 1.0, 0, n);
    append_triplets(t, B, 1.0, n, 0);
    SpMat K = from_triplets(n + m, n + m, t);
    Vec rhs(n + m);
    rhs << f, g;
    // The block residual bound is stated against ||f|| + ||g||.
    LuSolver lu(K);
    const double scale = (f.norm() + g.norm()) / rhs.norm();
    Vec x = lu.solve(rhs, tol * scale);
    return {x.head(n), x.tail(m)};
}

/// Dirichlet elimination on a square system: constrained rows become identity rows with
/// b_i = g_i, constrained columns are moved to the right-hand side. Symmetry is preserved.
inline void apply_dirichlet(SpMat& A, Vec& b, const std::vector<char>& mask, const Vec& g) {
    for (int i = 0; i < A.outerSize(); ++i)
        for (SpMat::InnerIterator it(A, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (mask[i]) continue;
            if (mask[j]) {
                b[i] -= it.value() * g[j];
                it.valueRef() = 0.0;
            }
        }
    for (int i = 0; i < A.outerSize(); ++i) {
        if (!mask[i]) continue;
        bool diag = false;
        for (SpMat::InnerIterator it(A, i); it; ++it) {
            if (it.col() == i) {
                it.valueRef() = 1.0;
                diag = true;
            } else {
                it.valueRef() = 0.0;
            }
        }
        if (!diag) A.coeffRef(i, i) = 1.0;
        b[i] = g[i];
    }
    A.prune(0.0);
}

/// Same elimination for a matrix only (the constant-operator case); returns the lifting
/// operator C such that the reduced right-hand side is b - C g on free rows.
inline SpMat dirichlet_matrix(const SpMat& A, const std::vector<char>& mask, SpMat* lifting = nullptr) {
    Triplets keep, lift;
    for (int i = 0; i < A.outerSize(); ++i) {
        if (mask[i]) {
            keep.emplace_back(i, i, 1.0);
            continue;
        }
        for (SpMat::InnerIterator it(A, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (mask[j]) lift.emplace_back(i, j, it.value());
            else keep.emplace_back(i, j, it.value());
        }
    }
    if (lifting) *lifting = from_triplets(static_cast<int>(A.rows()), static_cast<int>(A.cols()), lift);
    return from_triplets(static_cast<int>(A.rows()), static_cast<int>(A.cols()), keep);
}

/// Right-hand side matching dirichlet_matrix: b - C g on free rows, g on constrained rows.
inline Vec dirichlet_rhs(const Vec& b, const std::vector<char>& mask, const Vec& g, const SpMat& lifting) {
    Vec out = b - lifting * g;
    for (int i = 0; i < out.size(); ++i)
        if (mask[i]) out[i] = g[i];
    return out;
}

}  // namespace fsi
