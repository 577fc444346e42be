#pragma once

#include "itrack/market_data.hpp"
#include "itrack/portfolio.hpp"
#include "itrack/selector.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace itrack {

/// Every way this library can turn a returns window into a portfolio.
enum class Method { Ours, Forward, Backward, LargestCap, FullQp };

std::string_view to_string(Method m);
std::optional<Method> method_from_string(std::string_view name);

/// `caps` is required for LargestCap and ignored otherwise.
FittedPortfolio fit_with(Method method, const ReturnsMatrix& data, int k, const Vector* caps,
                         const selector::TrainConfig& train);

}  // namespace itrack
