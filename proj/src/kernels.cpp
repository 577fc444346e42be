#include "itrack/kernels.hpp"

#include <omp.h>

namespace itrack::kernels {

namespace {

// Problems below this many multiply-adds are not worth a parallel region.
constexpr Index kParallelThreshold = 1 << 14;

void check_mul(const Matrix& X, Index n) {
    if (X.cols() != n) throw Error("kernel shape mismatch");
}

}  // namespace

double dot(const double* a, const double* b, Index n) noexcept {
    double s = 0.0;
    for (Index t = 0; t < n; ++t) s += a[t] * b[t];
    return s;
}

int max_threads() noexcept { return omp_get_max_threads(); }

namespace serial {

Matrix gram(const Matrix& X) {
    const Index n = X.cols();
    const Index d = X.rows();
    Matrix G(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            const double v = dot(X.col(i).data(), X.col(j).data(), d);
            G(i, j) = v;
            G(j, i) = v;
        }
    }
    return G;
}

Vector tmul(const Matrix& X, const Vector& r) {
    if (X.rows() != r.size()) throw Error("kernel shape mismatch");
    Vector out(X.cols());
    for (Index j = 0; j < X.cols(); ++j) out[j] = dot(X.col(j).data(), r.data(), X.rows());
    return out;
}

Vector mul(const Matrix& X, const Vector& w) {
    check_mul(X, w.size());
    Vector out = Vector::Zero(X.rows());
    for (Index j = 0; j < X.cols(); ++j) {
        const double wj = w[j];
        const double* col = X.col(j).data();
        for (Index t = 0; t < X.rows(); ++t) out[t] += col[t] * wj;
    }
    return out;
}

Vector symv(const Matrix& P, const Vector& w) {
    check_mul(P, w.size());
    Vector out(P.rows());
    for (Index i = 0; i < P.rows(); ++i) out[i] = dot(P.col(i).data(), w.data(), P.rows());
    return out;
}

Vector sparse_symv(const Matrix& P, std::span<const Index> ids, std::span<const double> vals) {
    if (ids.size() != vals.size()) throw Error("kernel shape mismatch");
    Vector out = Vector::Zero(P.rows());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const double* col = P.col(ids[k]).data();
        const double v = vals[k];
        for (Index i = 0; i < P.rows(); ++i) out[i] += col[i] * v;
    }
    return out;
}

}  // namespace serial

namespace parallel {

Matrix gram(const Matrix& X) {
    const Index n = X.cols();
    const Index d = X.rows();
    Matrix G(n, n);
    // Triangular work: dynamic schedule balances the rows.
#pragma omp parallel for schedule(dynamic, 4) if (n * n * d > kParallelThreshold)
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            const double v = dot(X.col(i).data(), X.col(j).data(), d);
            G(i, j) = v;
            G(j, i) = v;
        }
    }
    return G;
}

Vector tmul(const Matrix& X, const Vector& r) {
    if (X.rows() != r.size()) throw Error("kernel shape mismatch");
    const Index n = X.cols();
    Vector out(n);
#pragma omp parallel for schedule(static) if (n * X.rows() > kParallelThreshold)
    for (Index j = 0; j < n; ++j) out[j] = dot(X.col(j).data(), r.data(), X.rows());
    return out;
}

Vector mul(const Matrix& X, const Vector& w) {
    check_mul(X, w.size());
    const Index d = X.rows();
    const Index n = X.cols();
    Vector out = Vector::Zero(d);
    // Rows are partitioned across threads; within a row the column order is
    // the same as the serial loop.
#pragma omp parallel if (n * d > kParallelThreshold)
    {
        const int nt = omp_get_num_threads();
        const int tid = omp_get_thread_num();
        const Index chunk = (d + nt - 1) / nt;
        const Index lo = std::min<Index>(d, chunk * tid);
        const Index hi = std::min<Index>(d, lo + chunk);
        for (Index j = 0; j < n; ++j) {
            const double wj = w[j];
            const double* col = X.col(j).data();
            for (Index t = lo; t < hi; ++t) out[t] += col[t] * wj;
        }
    }
    return out;
}

Vector symv(const Matrix& P, const Vector& w) {
    check_mul(P, w.size());
    const Index n = P.rows();
    Vector out(n);
#pragma omp parallel for schedule(static) if (n * n > kParallelThreshold)
    for (Index i = 0; i < n; ++i) out[i] = dot(P.col(i).data(), w.data(), n);
    return out;
}

Vector sparse_symv(const Matrix& P, std::span<const Index> ids, std::span<const double> vals) {
    if (ids.size() != vals.size()) throw Error("kernel shape mismatch");
    const Index n = P.rows();
    const auto nnz = static_cast<Index>(ids.size());
    Vector out = Vector::Zero(n);
#pragma omp parallel if (n * nnz > kParallelThreshold)
    {
        const int nt = omp_get_num_threads();
        const int tid = omp_get_thread_num();
        const Index chunk = (n + nt - 1) / nt;
        const Index lo = std::min<Index>(n, chunk * tid);
        const Index hi = std::min<Index>(n, lo + chunk);
        for (Index k = 0; k < nnz; ++k) {
            const double* col = P.col(ids[k]).data();
            const double v = vals[k];
            for (Index i = lo; i < hi; ++i) out[i] += col[i] * v;
        }
    }
    return out;
}

}  // namespace parallel

}  // namespace itrack::kernels
