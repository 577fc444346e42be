#pragma once

#include "itrack/date.hpp"
#include "itrack/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace itrack {

/// Adjusted closing prices on a shared date axis, one column per ticker.
/// A missing observation is stored as NaN.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix prices;                      // dates × tickers
    std::optional<Matrix> market_caps;  // same shape when present

    Index num_dates() const { return static_cast<Index>(dates.size()); }
    Index num_assets() const { return static_cast<Index>(tickers.size()); }

    /// Strictly increasing dates, unique tickers, shapes agree, every present
    /// price strictly positive.
    void validate() const;

    /// True when column `col` has a price on every date in [first, last].
    bool complete(Index col, Index first, Index last) const;

    /// Rows [first, last] inclusive.
    PricePanel rows(Index first, Index last) const;
    PricePanel columns(std::span<const Index> cols) const;

    std::optional<Index> find_ticker(const std::string& ticker) const;
};

/// D log-returns for N assets and the aligned benchmark.
struct ReturnsMatrix {
    Matrix X;  // D × N
    Vector y;  // D
    std::vector<Date> dates;
    std::vector<std::string> tickers;

    Index num_periods() const { return X.rows(); }
    Index num_assets() const { return X.cols(); }

    void validate() const;
    ReturnsMatrix select(std::span<const Index> cols) const;
    /// Periods [first, first + count).
    ReturnsMatrix periods(Index first, Index count) const;
};

struct ToySpec {
    int n_groups = 5;
    int series_length = 750;
    int dup_min = 50;
    int dup_max = 200;
    double noise_scale = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ToyDataset {
    ReturnsMatrix returns;
    std::vector<int> group_labels;  // one per column of returns.X
    std::vector<int> group_sizes;
    Vector true_weights;            // one per group
};

/// Sector-structured equity market with a capitalisation-weighted index.
/// Used for backtests and method comparisons where no real data is available.
struct MarketSpec {
    int n_assets = 100;
    int n_groups = 10;
    int n_days = 1000;        // price rows
    std::string start_date = "2010-01-04";
    double market_vol = 0.010;
    double sector_vol = 0.008;
    double idio_vol = 0.010;
    double start_price_min = 20.0;
    double start_price_max = 200.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticMarket {
    PricePanel panel;      // with market_caps
    PricePanel benchmark;  // single column "INDEX"
    std::vector<int> group_labels;
};

// --- loading / writing ------------------------------------------------------

/// Long-format CSV: `date,ticker,adj_close[,market_cap]`, rows grouped by
/// non-decreasing date. Ticker columns appear in first-seen order.
PricePanel load_prices(const std::filesystem::path& path);
/// `date,level`. Returns a one-column panel whose ticker is "INDEX".
PricePanel load_benchmark(const std::filesystem::path& path);

void write_prices(const std::filesystem::path& path, const PricePanel& panel);
void write_benchmark(const std::filesystem::path& path, const PricePanel& benchmark);

// --- transforms ---------------------------------------------------------------

/// X[t][i] = ln(p[t+1][i] / p[t][i]). Assets with any missing price are
/// dropped from the universe. Throws on a date-axis mismatch or when no asset
/// survives.
ReturnsMatrix compute_log_returns(const PricePanel& panel, const PricePanel& benchmark);

/// Inverse of compute_log_returns for a complete matrix: prices start at
/// `start_level` on `start_date`'s business day and follow exp(cumsum).
struct PricedReturns {
    PricePanel panel;
    PricePanel benchmark;
};
PricedReturns prices_from_returns(const ReturnsMatrix& returns, double start_level = 100.0);

ToyDataset generate_toy(const ToySpec& spec);
SyntheticMarket generate_market(const MarketSpec& spec);

}  // namespace itrack
