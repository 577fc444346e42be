#include "itrack/strategy.hpp"

#include "itrack/baselines.hpp"

namespace itrack {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Ours: return "ours";
        case Method::Forward: return "forward";
        case Method::Backward: return "backward";
        case Method::LargestCap: return "largest_cap";
        case Method::FullQp: return "qp";
    }
    return "unknown";
}

std::optional<Method> method_from_string(std::string_view name) {
    if (name == "ours") return Method::Ours;
    if (name == "forward") return Method::Forward;
    if (name == "backward") return Method::Backward;
    if (name == "largest_cap") return Method::LargestCap;
    if (name == "qp") return Method::FullQp;
    return std::nullopt;
}

FittedPortfolio fit_with(Method method, const ReturnsMatrix& data, int k, const Vector* caps,
                         const selector::TrainConfig& train) {
    switch (method) {
        case Method::Ours: return selector::fit_portfolio(data, k, train);
        case Method::Forward: return baselines::forward_selection(data, k);
        case Method::Backward: return baselines::backward_selection(data, k);
        case Method::LargestCap:
            if (!caps) throw Error("largest_cap requires market caps in the price data");
            return baselines::largest_cap(data, *caps, k);
        case Method::FullQp: return baselines::full_qp(data);
    }
    throw Error("unknown method");
}

}  // namespace itrack
