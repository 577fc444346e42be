#include "itrack/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace itrack::baselines {

namespace {

void check_k(const ReturnsMatrix& data, int k) {
    data.validate();
    if (k < 1) throw Error("baselines: K must be >= 1");
    if (k > data.num_assets()) throw Error("baselines: K must not exceed the number of assets");
}

FittedPortfolio refit(std::string method, const ReturnsMatrix& data, const qp::SimplexLsProblem& full,
                      std::vector<Index> ids, int k, const qp::SolveOptions& options) {
    const auto sol = qp::solve(qp::subproblem(full, ids), options);
    return make_portfolio(std::move(method), data, std::move(ids), sol.w, k);
}

Index argmax_lowest(const Vector& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

Index argmin_lowest(const Vector& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i) {
        if (v[i] < v[best]) best = i;
    }
    return best;
}

}  // namespace

std::string_view to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Forward: return "forward";
        case BaselineKind::Backward: return "backward";
        case BaselineKind::LargestCap: return "largest_cap";
        case BaselineKind::ExhaustiveOracle: return "oracle";
    }
    return "unknown";
}

std::optional<BaselineKind> baseline_from_string(std::string_view name) {
    if (name == "forward") return BaselineKind::Forward;
    if (name == "backward") return BaselineKind::Backward;
    if (name == "largest_cap") return BaselineKind::LargestCap;
    if (name == "oracle") return BaselineKind::ExhaustiveOracle;
    return std::nullopt;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return std::round(c);
}

FittedPortfolio forward_selection(const ReturnsMatrix& data, int k, const qp::SolveOptions& options) {
    check_k(data, k);
    const auto full = qp::build_problem(data);
    std::vector<Index> remaining(static_cast<std::size_t>(data.num_assets()));
    std::iota(remaining.begin(), remaining.end(), Index{0});
    std::vector<Index> selected;
    while (static_cast<int>(selected.size()) < k) {
        const auto sol = qp::solve(qp::subproblem(full, remaining), options);
        const auto pos = static_cast<std::size_t>(argmax_lowest(sol.w));
        selected.push_back(remaining[pos]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    return refit("forward", data, full, std::move(selected), k, options);
}

FittedPortfolio backward_selection(const ReturnsMatrix& data, int k, const qp::SolveOptions& options) {
    check_k(data, k);
    const auto full = qp::build_problem(data);
    std::vector<Index> remaining(static_cast<std::size_t>(data.num_assets()));
    std::iota(remaining.begin(), remaining.end(), Index{0});
    std::optional<Vector> warm;
    while (static_cast<int>(remaining.size()) > k) {
        qp::SolveOptions opts = options;
        opts.warm_start = warm;
        const auto sol = qp::solve(qp::subproblem(full, remaining), opts);
        const Index drop = argmin_lowest(sol.w);
        remaining.erase(remaining.begin() + drop);
        // Warm start the next round from the survivors' weights.
        Vector next(sol.w.size() - 1);
        next << sol.w.head(drop), sol.w.tail(sol.w.size() - drop - 1);
        if (next.sum() > 0.0) {
            warm = next / next.sum();
        } else {
            warm.reset();
        }
    }
    return refit("backward", data, full, std::move(remaining), k, options);
}

FittedPortfolio largest_cap(const ReturnsMatrix& data, const Vector& caps, int k, const qp::SolveOptions& options) {
    check_k(data, k);
    if (caps.size() != data.num_assets()) throw Error("largest_cap: one market cap per asset required");
    for (Index j = 0; j < caps.size(); ++j) {
        if (std::isnan(caps[j])) throw Error("largest_cap: missing market cap for " + data.tickers[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> order(static_cast<std::size_t>(caps.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return caps[a] > caps[b]; });
    order.resize(static_cast<std::size_t>(k));
    const auto full = qp::build_problem(data);
    return refit("largest_cap", data, full, std::move(order), k, options);
}

FittedPortfolio exhaustive_oracle(const ReturnsMatrix& data, int k, const qp::SolveOptions& options) {
    check_k(data, k);
    const int n = static_cast<int>(data.num_assets());
    const double count = binomial(n, k);
    if (count > kMaxSubsets) throw Error("exhaustive_oracle: C(N, K) exceeds the enumeration guard");

    // Enumerate subsets up front in lexicographic order.
    std::vector<std::vector<Index>> subsets;
    subsets.reserve(static_cast<std::size_t>(count));
    std::vector<Index> comb(static_cast<std::size_t>(k));
    std::iota(comb.begin(), comb.end(), Index{0});
    for (;;) {
        subsets.push_back(comb);
        int i = k - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }

    const auto full = qp::build_problem(data);
    const auto m = static_cast<std::ptrdiff_t>(subsets.size());
    std::vector<double> objective(subsets.size());
    std::vector<Vector> weights(subsets.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t s = 0; s < m; ++s) {
        const auto sol = qp::solve(qp::subproblem(full, subsets[static_cast<std::size_t>(s)]), options);
        objective[static_cast<std::size_t>(s)] = sol.objective;
        weights[static_cast<std::size_t>(s)] = sol.w;
    }
    std::size_t best = 0;
    for (std::size_t s = 1; s < subsets.size(); ++s) {
        if (objective[s] < objective[best]) best = s;
    }
    auto p = make_portfolio("oracle", data, subsets[best], weights[best], k);
    p.config = {{"subsets_evaluated", subsets.size()}};
    return p;
}

FittedPortfolio full_qp(const ReturnsMatrix& data, const qp::SolveOptions& options) {
    data.validate();
    const auto sol = qp::solve(qp::build_problem(data), options);
    std::vector<Index> ids;
    std::vector<double> w;
    for (Index j = 0; j < sol.w.size(); ++j) {
        if (sol.w[j] > 0.0) {
            ids.push_back(j);
            w.push_back(sol.w[j]);
        }
    }
    Vector wv = Eigen::Map<Vector>(w.data(), static_cast<Index>(w.size()));
    wv /= wv.sum();
    auto p = make_portfolio("qp", data, std::move(ids), std::move(wv), 0);
    p.config = {{"converged", sol.converged}, {"iterations", sol.iterations}};
    return p;
}

}  // namespace itrack::baselines
