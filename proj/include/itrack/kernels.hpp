#pragma once

// Dense linear-algebra kernels used by the solvers.
//
// Each kernel exists twice: a serial reference in `serial::` and an OpenMP
// version in `parallel::`. Work is split across outputs only, never inside a
// reduction, so every output entry is accumulated in the same order by both
// versions and the results are bitwise identical for any thread count.
// The unqualified functions dispatch to the parallel versions.

#include "itrack/types.hpp"

#include <span>

namespace itrack::kernels {

namespace serial {

/// XᵀX (N×N, symmetric).
Matrix gram(const Matrix& X);
/// Xᵀr.
Vector tmul(const Matrix& X, const Vector& r);
/// Xw.
Vector mul(const Matrix& X, const Vector& w);
/// Pw for symmetric P.
Vector symv(const Matrix& P, const Vector& w);
/// Σ_j P(:, ids[j]) · vals[j]; the sparse counterpart of symv.
Vector sparse_symv(const Matrix& P, std::span<const Index> ids, std::span<const double> vals);

}  // namespace serial

namespace parallel {

Matrix gram(const Matrix& X);
Vector tmul(const Matrix& X, const Vector& r);
Vector mul(const Matrix& X, const Vector& w);
Vector symv(const Matrix& P, const Vector& w);
Vector sparse_symv(const Matrix& P, std::span<const Index> ids, std::span<const double> vals);

}  // namespace parallel

inline Matrix gram(const Matrix& X) { return parallel::gram(X); }
inline Vector tmul(const Matrix& X, const Vector& r) { return parallel::tmul(X, r); }
inline Vector mul(const Matrix& X, const Vector& w) { return parallel::mul(X, w); }
inline Vector symv(const Matrix& P, const Vector& w) { return parallel::symv(P, w); }
inline Vector sparse_symv(const Matrix& P, std::span<const Index> ids,
                          std::span<const double> vals) {
    return parallel::sparse_symv(P, ids, vals);
}

/// Sequential dot product; the single reduction primitive shared by both variants.
double dot(const double* a, const double* b, Index n) noexcept;

/// Number of OpenMP threads the parallel kernels will use.
int max_threads() noexcept;

}  // namespace itrack::kernels
