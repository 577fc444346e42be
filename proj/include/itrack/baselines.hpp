#pragma once

// Comparison selectors. All of them choose a subset of at most K assets and
// then refit simplex-constrained weights on that subset.

#include "itrack/market_data.hpp"
#include "itrack/portfolio.hpp"
#include "itrack/qp.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace itrack::baselines {

enum class BaselineKind { Forward, Backward, LargestCap, ExhaustiveOracle };

std::string_view to_string(BaselineKind kind);
std::optional<BaselineKind> baseline_from_string(std::string_view name);

/// Largest C(N, K) the exhaustive oracle will enumerate.
inline constexpr double kMaxSubsets = 1e6;

/// Repeatedly solve on the remaining universe and move the largest-weight
/// asset into the selection; refit on the K selected assets.
FittedPortfolio forward_selection(const ReturnsMatrix& data, int k, const qp::SolveOptions& options = {});

/// Repeatedly solve and drop the smallest-weight asset (lowest index on ties)
/// until K remain; refit.
FittedPortfolio backward_selection(const ReturnsMatrix& data, int k, const qp::SolveOptions& options = {});

/// Top K by market cap (ties by column order); refit. `caps` is aligned with
/// the columns of `data`; a NaN cap is an error.
FittedPortfolio largest_cap(const ReturnsMatrix& data, const Vector& caps, int k,
                            const qp::SolveOptions& options = {});

/// Minimum-MSE portfolio over every K-subset. Throws when C(N, K) exceeds
/// kMaxSubsets. Subsets are solved in parallel and reduced in lexicographic
/// order, so the result does not depend on the thread count.
FittedPortfolio exhaustive_oracle(const ReturnsMatrix& data, int k, const qp::SolveOptions& options = {});

/// Plain simplex QP on every asset, no cardinality limit.
FittedPortfolio full_qp(const ReturnsMatrix& data, const qp::SolveOptions& options = {});

double binomial(int n, int k);

}  // namespace itrack::baselines
