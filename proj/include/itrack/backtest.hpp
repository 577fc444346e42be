#pragma once

// Sliding-window backtest with quarterly rebalancing.
//
// On the last trading day of each calendar quarter the chosen method is fitted
// on the trailing `train_window` log-returns of every asset with complete data
// in that window. Target weights become whole share counts at that day's
// close; each ticker whose share count changes is charged a flat fee. The book
// is then held and marked to market daily until the next rebalance.

#include "itrack/date.hpp"
#include "itrack/market_data.hpp"
#include "itrack/portfolio.hpp"
#include "itrack/selector.hpp"
#include "itrack/strategy.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace itrack::backtest {

struct BacktestConfig {
    int train_window = 750;  // return periods
    double fee_per_trade = 5.0;
    double initial_capital = 1'000'000.0;
    int k = 30;
    Method method = Method::Ours;
    std::uint64_t seed = 0;  // overrides train.seed
    selector::TrainConfig train;
    std::optional<Date> start_date;  // first rebalance on or after
    std::optional<Date> end_date;    // last marked date

    void validate() const;
};

struct Trade {
    std::string ticker;
    std::int64_t shares_delta = 0;
    double price = 0.0;
    double fee = 0.0;
};

struct RebalanceEvent {
    Date date;
    Index row = 0;  // row of the price panel
    FittedPortfolio portfolio;
    std::vector<Trade> trades;
    double fees_paid = 0.0;
    double pre_trade_value = 0.0;   // holdings + cash before trading
    double post_trade_market_value = 0.0;
    double cash = 0.0;              // after trading and fees
    std::vector<std::int64_t> holdings;  // shares per panel column after trading
};

struct SideMetrics {
    double volatility = 0.0;
    std::optional<double> sharpe;
    double max_drawdown = 0.0;
    double total_return = 0.0;
};

struct MetricsReport {
    Vector percentage_error;  // per marked date
    double mean_pe = 0.0;
    double mean_abs_pe = 0.0;
    double max_abs_pe = 0.0;
    double tracking_mse = 0.0;  // of daily log-returns, tracker vs index
    Vector tracker_period_returns;
    Vector index_period_returns;
    SideMetrics tracker;
    SideMetrics index;
    double total_fees = 0.0;
};

struct BacktestResult {
    std::vector<Date> dates;
    Vector equity_curve;
    Vector index_curve;
    std::vector<RebalanceEvent> events;
    MetricsReport metrics;
};

/// Rows whose date is the last trading day of its calendar quarter. The final
/// row counts only if no later weekday remains in its quarter.
std::vector<Index> quarter_end_rows(const std::vector<Date>& dates);

BacktestResult run_backtest(const PricePanel& panel, const PricePanel& benchmark, const BacktestConfig& config);

MetricsReport compute_metrics(const BacktestResult& result);

nlohmann::json metrics_to_json(const MetricsReport& m);
nlohmann::json config_to_json(const BacktestConfig& c);
BacktestConfig config_from_json(const nlohmann::json& j);

std::string equity_csv(const BacktestResult& r);
std::string events_csv(const BacktestResult& r);

struct EquityRow {
    Date date;
    double tracker_value;
    double index_value;
    double pe;
};
std::vector<EquityRow> parse_equity_csv(const std::string& text);
std::string equity_csv(const std::vector<EquityRow>& rows);

/// equity.csv, events.csv and metrics.json under `dir`; returns the paths.
std::vector<std::filesystem::path> write_result(const std::filesystem::path& dir, const BacktestResult& r);

}  // namespace itrack::backtest
