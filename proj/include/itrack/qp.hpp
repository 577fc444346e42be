#pragma once

// Simplex-constrained least squares:
//
//     minimise ‖Xw − y‖²   subject to  w ≥ 0,  Σw = 1
//
// held in quadratic form ½wᵀPw + qᵀw with P = 2XᵀX and q = −2Xᵀy. The
// inequality and equality constraints are fixed (G = −I, h = 0, A = 1ᵀ, b = 1)
// so they are not stored.

#include "itrack/market_data.hpp"
#include "itrack/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace itrack::qp {

struct SimplexLsProblem {
    Matrix P;  // 2XᵀX
    Vector q;  // −2Xᵀy
    Matrix X;
    Vector y;

    Index size() const { return P.rows(); }
    /// ‖Xw − y‖² evaluated from the residual, not the quadratic form.
    double objective(const Vector& w) const;
    void validate() const;
};

/// All residuals are dimensionless (gradients are scaled by 1/L, L = λmax(P)).
struct KktResiduals {
    double stationarity = 0.0;          // ‖w − Π(w − ∇f/L)‖∞
    double primal_infeasibility = 0.0;  // max(|Σw − 1|, max_i −w_i)
    double complementarity = 0.0;       // max_i w_i·|∇f_i − wᵀ∇f| / L

    double max() const;
};

struct SimplexSolution {
    Vector w;
    double objective = 0.0;  // ‖Xw − y‖²
    KktResiduals kkt;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // ½wᵀPw + qᵀw per accepted iterate, when requested
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 50'000;
    std::optional<Vector> warm_start;
    bool record_history = false;
};

SimplexLsProblem build_problem(const Matrix& X, const Vector& y);
SimplexLsProblem build_problem(const ReturnsMatrix& data);
SimplexLsProblem build_problem(const ReturnsMatrix& data, std::span<const Index> cols);

/// Restricts an assembled problem to a column subset without recomputing XᵀX.
SimplexLsProblem subproblem(const SimplexLsProblem& full, std::span<const Index> cols);

/// Accelerated projected gradient with function-value restart. Deterministic.
/// Throws on NaN input; returns converged = false when max_iter runs out.
SimplexSolution solve(const SimplexLsProblem& problem, const SolveOptions& options = {});

KktResiduals kkt_check(const SimplexLsProblem& problem, const Vector& w);

/// Euclidean projection onto {w ≥ 0, Σw = 1} by sorting.
Vector project_to_simplex(const Vector& v);

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD matrix.
double largest_eigenvalue(const Matrix& P, int max_iter = 50, double tol = 1e-6);

}  // namespace itrack::qp
