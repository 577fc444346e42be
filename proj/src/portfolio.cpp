#include "itrack/portfolio.hpp"

#include "itrack/kernels.hpp"

#include <cmath>
#include <unordered_set>

namespace itrack {

Vector FittedPortfolio::dense(Index n) const {
    Vector out = Vector::Zero(n);
    for (std::size_t k = 0; k < asset_ids.size(); ++k) {
        if (asset_ids[k] < 0 || asset_ids[k] >= n) throw Error("portfolio: asset id outside universe");
        out[asset_ids[k]] = weights[static_cast<Index>(k)];
    }
    return out;
}

void FittedPortfolio::check(double tol) const {
    if (static_cast<std::size_t>(weights.size()) != asset_ids.size()) throw Error("portfolio: weights/ids length mismatch");
    std::unordered_set<Index> seen(asset_ids.begin(), asset_ids.end());
    if (seen.size() != asset_ids.size()) throw Error("portfolio: duplicate asset id");
    if (weights.size() == 0) throw Error("portfolio: empty");
    if (weights.minCoeff() < -tol) throw Error("portfolio: negative weight");
    if (std::abs(weights.sum() - 1.0) > tol) throw Error("portfolio: weights do not sum to one");
    if (k_requested > 0 && (weights.array() > 0.0).count() > k_requested) {
        throw Error("portfolio: more than K non-zero weights");
    }
}

FittedPortfolio make_portfolio(std::string method, const ReturnsMatrix& data, std::vector<Index> ids,
                               Vector weights, int k_requested) {
    FittedPortfolio p;
    p.method = std::move(method);
    p.asset_ids = std::move(ids);
    p.weights = std::move(weights);
    p.k_requested = k_requested;
    for (Index id : p.asset_ids) p.tickers.push_back(data.tickers.at(static_cast<std::size_t>(id)));
    Matrix sub(data.X.rows(), static_cast<Index>(p.asset_ids.size()));
    for (std::size_t k = 0; k < p.asset_ids.size(); ++k) sub.col(static_cast<Index>(k)) = data.X.col(p.asset_ids[k]);
    p.in_sample_mse = (kernels::mul(sub, p.weights) - data.y).squaredNorm() / static_cast<double>(data.X.rows());
    return p;
}

nlohmann::json to_json(const FittedPortfolio& p) {
    nlohmann::json j;
    j["method"] = p.method;
    j["tickers"] = p.tickers;
    j["asset_ids"] = p.asset_ids;
    j["weights"] = std::vector<double>(p.weights.data(), p.weights.data() + p.weights.size());
    j["k_requested"] = p.k_requested;
    j["k_effective"] = p.k_effective();
    j["in_sample_mse"] = p.in_sample_mse;
    j["seed"] = p.seed;
    j["config"] = p.config;
    return j;
}

FittedPortfolio portfolio_from_json(const nlohmann::json& j) {
    FittedPortfolio p;
    p.method = j.value("method", std::string{});
    p.tickers = j.at("tickers").get<std::vector<std::string>>();
    p.asset_ids = j.at("asset_ids").get<std::vector<Index>>();
    const auto w = j.at("weights").get<std::vector<double>>();
    p.weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
    p.k_requested = j.at("k_requested").get<int>();
    p.in_sample_mse = j.at("in_sample_mse").get<double>();
    p.seed = j.value("seed", std::uint64_t{0});
    p.config = j.value("config", nlohmann::json::object());
    if (j.at("k_effective").get<int>() != p.k_effective()) throw Error("portfolio json: k_effective mismatch");
    return p;
}

}  // namespace itrack
