#include "itrack/qp.hpp"

#include "itrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace itrack::qp {

namespace {

// ½wᵀPw + qᵀw given g = Pw + q.
double quad_value(const Vector& w, const Vector& g, const Vector& q) {
    return 0.5 * (w.dot(g) + q.dot(w));
}

KktResiduals residuals(const Vector& w, const Vector& g, double lipschitz) {
    KktResiduals r;
    const Vector step = project_to_simplex(w - g / lipschitz);
    r.stationarity = (w - step).cwiseAbs().maxCoeff();
    r.primal_infeasibility = std::abs(w.sum() - 1.0);
    r.primal_infeasibility = std::max(r.primal_infeasibility, std::max(0.0, -w.minCoeff()));
    const double nu = w.dot(g);
    double comp = 0.0;
    for (Index i = 0; i < w.size(); ++i) comp = std::max(comp, std::abs(w[i]) * std::abs(g[i] - nu));
    r.complementarity = comp / lipschitz;
    return r;
}

double lipschitz_of(const Matrix& P) {
    const double l = largest_eigenvalue(P);
    // Zero P: every feasible point is optimal; any positive step works.
    return l > 0.0 ? l : 1.0;
}

}  // namespace

double KktResiduals::max() const { return std::max({stationarity, primal_infeasibility, complementarity}); }

double SimplexLsProblem::objective(const Vector& w) const {
    return (kernels::mul(X, w) - y).squaredNorm();
}

void SimplexLsProblem::validate() const {
    if (P.rows() == 0 || P.rows() != P.cols() || q.size() != P.rows()) throw Error("qp: malformed problem");
    if (X.cols() != P.rows() || X.rows() != y.size()) throw Error("qp: design matrix does not match problem");
    if (P.hasNaN() || q.hasNaN() || X.hasNaN() || y.hasNaN()) throw Error("qp: NaN in problem data");
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw Error("qp: P is not symmetric");
}

SimplexLsProblem build_problem(const Matrix& X, const Vector& y) {
    if (X.rows() < 1 || X.cols() < 1) throw Error("qp: empty matrix");
    if (X.rows() != y.size()) throw Error("qp: X and y row counts differ");
    SimplexLsProblem p;
    p.P = 2.0 * kernels::gram(X);
    p.q = -2.0 * kernels::tmul(X, y);
    p.X = X;
    p.y = y;
    return p;
}

SimplexLsProblem build_problem(const ReturnsMatrix& data) { return build_problem(data.X, data.y); }

SimplexLsProblem build_problem(const ReturnsMatrix& data, std::span<const Index> cols) {
    if (cols.empty()) throw Error("qp: empty matrix");
    Matrix X(data.X.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) X.col(static_cast<Index>(k)) = data.X.col(cols[k]);
    return build_problem(X, data.y);
}

SimplexLsProblem subproblem(const SimplexLsProblem& full, std::span<const Index> cols) {
    if (cols.empty()) throw Error("qp: empty matrix");
    const auto n = static_cast<Index>(cols.size());
    SimplexLsProblem p;
    p.P.resize(n, n);
    p.q.resize(n);
    p.X.resize(full.X.rows(), n);
    for (Index b = 0; b < n; ++b) {
        const Index cb = cols[static_cast<std::size_t>(b)];
        if (cb < 0 || cb >= full.size()) throw Error("qp: column index out of range");
        for (Index a = 0; a < n; ++a) p.P(a, b) = full.P(cols[static_cast<std::size_t>(a)], cb);
        p.q[b] = full.q[cb];
        p.X.col(b) = full.X.col(cb);
    }
    p.y = full.y;
    return p;
}

Vector project_to_simplex(const Vector& v) {
    const Index n = v.size();
    if (n == 0) throw Error("qp: cannot project an empty vector");
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (Index j = 0; j < n; ++j) {
        cum += u[static_cast<std::size_t>(j)];
        const double candidate = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

double largest_eigenvalue(const Matrix& P, int max_iter, double tol) {
    const Index n = P.rows();
    if (n == 0) return 0.0;
    Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector pv = kernels::symv(P, v);
        const double norm = pv.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(pv);
        v = pv / norm;
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return std::max(next, norm);
        lambda = next;
    }
    return lambda;
}

KktResiduals kkt_check(const SimplexLsProblem& problem, const Vector& w) {
    if (w.size() != problem.size()) throw Error("kkt_check: weight length mismatch");
    const Vector g = kernels::symv(problem.P, w) + problem.q;
    return residuals(w, g, lipschitz_of(problem.P));
}

SimplexSolution solve(const SimplexLsProblem& problem, const SolveOptions& options) {
    problem.validate();
    const Index n = problem.size();
    const Matrix& P = problem.P;
    const Vector& q = problem.q;

    SimplexSolution sol;
    // The residual scale stays fixed at the power-iteration estimate so that
    // kkt_check reproduces the convergence test; the step size may grow.
    const double l0 = lipschitz_of(P);
    double step_l = l0;

    Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
    if (options.warm_start) {
        if (options.warm_start->size() != n) throw Error("qp: warm start length mismatch");
        if (options.warm_start->hasNaN()) throw Error("qp: NaN in warm start");
        x = project_to_simplex(*options.warm_start);
    }
    Vector gx = kernels::symv(P, x) + q;
    double fx = quad_value(x, gx, q);
    if (options.record_history) sol.history.push_back(fx);

    KktResiduals kkt = residuals(x, gx, l0);
    bool converged = kkt.max() <= options.tol;

    Vector y = x, gy = gx;
    double fy = fx;
    double t = 1.0;
    bool momentum_free = true;
    int it = 0;
    while (!converged && it < options.max_iter) {
        ++it;
        Vector xn, gn;
        double fn = 0.0;
        for (;;) {
            xn = project_to_simplex(y - gy / step_l);
            gn = kernels::symv(P, xn) + q;
            fn = quad_value(xn, gn, q);
            const Vector d = xn - y;
            const double model = fy + gy.dot(d) + 0.5 * step_l * d.squaredNorm();
            if (fn <= model + 1e-12 * std::max(1.0, std::abs(model))) break;
            step_l *= 2.0;
        }
        if (fn > fx) {
            // Objective went up: drop the momentum and retry from x. A step
            // from x itself that still fails means we are at rounding level.
            if (momentum_free) break;
            y = x;
            gy = gx;
            fy = fx;
            t = 1.0;
            momentum_free = true;
            continue;
        }
        if (options.record_history) sol.history.push_back(fn);
        kkt = residuals(xn, gn, l0);
        converged = kkt.max() <= options.tol;

        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / tn;
        y = xn + beta * (xn - x);
        momentum_free = beta == 0.0;
        if (momentum_free) {
            gy = gn;
            fy = fn;
        } else {
            gy = kernels::symv(P, y) + q;
            fy = quad_value(y, gy, q);
        }
        x = std::move(xn);
        gx = std::move(gn);
        fx = fn;
        t = tn;
    }

    sol.w = std::move(x);
    sol.kkt = kkt;
    sol.iterations = it;
    sol.converged = converged;
    sol.objective = problem.objective(sol.w);
    return sol;
}

}  // namespace itrack::qp
