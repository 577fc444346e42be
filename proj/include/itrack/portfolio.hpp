#pragma once

#include "itrack/market_data.hpp"
#include "itrack/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace itrack {

/// A long-only, fully invested portfolio on at most K assets of a universe.
struct FittedPortfolio {
    std::string method;
    std::vector<Index> asset_ids;  // columns of the universe, unique
    std::vector<std::string> tickers;
    Vector weights;  // aligned with asset_ids; non-negative, sums to one
    double in_sample_mse = 0.0;  // ‖X'w' − y‖² / D
    int k_requested = 0;
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();

    int k_effective() const { return static_cast<int>(asset_ids.size()); }
    /// Weights scattered back onto a universe of `n` assets.
    Vector dense(Index n) const;
    /// Throws when the weights leave the simplex (tol 1e-9) or ‖w‖₀ > k_requested.
    void check(double tol = 1e-9) const;
};

/// Builds a portfolio from a solution over `ids`, computing the in-sample MSE.
FittedPortfolio make_portfolio(std::string method, const ReturnsMatrix& data, std::vector<Index> ids,
                               Vector weights, int k_requested);

nlohmann::json to_json(const FittedPortfolio& p);
FittedPortfolio portfolio_from_json(const nlohmann::json& j);

}  // namespace itrack
