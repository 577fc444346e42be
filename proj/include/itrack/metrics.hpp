#pragma once

#include "itrack/types.hpp"

#include <optional>
#include <span>

namespace itrack::metrics {

/// (tracker − index) / index, element-wise. Throws on a zero index value.
Vector percentage_error(const Vector& tracker, const Vector& index);

/// Sample standard deviation (divisor n − 1). Needs at least two observations.
double volatility(const Vector& returns);

/// mean / volatility, with no risk-free rate and no annualisation.
/// Empty when the volatility is zero.
std::optional<double> sharpe(const Vector& returns);

/// min_t (V_t − peak_t) / peak_t; in [−1, 0].
double max_drawdown(const Vector& curve);

/// Simple returns of `curve` between consecutive marks.
Vector period_returns(const Vector& curve, std::span<const Index> marks);

}  // namespace itrack::metrics
