#include "itrack/backtest.hpp"

#include "itrack/io.hpp"
#include "itrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace itrack::backtest {

namespace {

bool last_weekday_of_quarter(Date d) {
    using namespace std::chrono;
    sys_days next = sys_days{d} + days{1};
    while (weekday{next} == Saturday || weekday{next} == Sunday) next += days{1};
    const Date n{next};
    return n.year() != d.year() || quarter_of(n) != quarter_of(d);
}

double price_or_last(const Matrix& prices, Vector& last, Index t, Index j) {
    const double p = prices(t, j);
    if (!std::isnan(p)) last[j] = p;
    return last[j];
}

}  // namespace

void BacktestConfig::validate() const {
    if (train_window < 2) throw Error("backtest: train_window must be >= 2");
    if (!(fee_per_trade >= 0.0)) throw Error("backtest: fee_per_trade must be >= 0");
    if (!(initial_capital > 0.0)) throw Error("backtest: initial_capital must be > 0");
    if (k < 1 && method != Method::FullQp) throw Error("backtest: K must be >= 1");
    train.validate();
}

std::vector<Index> quarter_end_rows(const std::vector<Date>& dates) {
    std::vector<Index> rows;
    for (std::size_t t = 0; t < dates.size(); ++t) {
        bool end = false;
        if (t + 1 < dates.size()) {
            end = dates[t + 1].year() != dates[t].year() || quarter_of(dates[t + 1]) != quarter_of(dates[t]);
        } else {
            end = last_weekday_of_quarter(dates[t]);
        }
        if (end) rows.push_back(static_cast<Index>(t));
    }
    return rows;
}

BacktestResult run_backtest(const PricePanel& panel, const PricePanel& benchmark, const BacktestConfig& config) {
    config.validate();
    panel.validate();
    benchmark.validate();
    if (panel.dates != benchmark.dates) throw Error("backtest: panel and benchmark date axes differ");
    if (benchmark.num_assets() != 1) throw Error("backtest: benchmark must have one column");
    if (config.method == Method::LargestCap && !panel.market_caps) {
        throw Error("backtest: largest_cap requires market caps in the price data");
    }

    const Index n_dates = panel.num_dates();
    const Index n_assets = panel.num_assets();
    Index last_row = n_dates - 1;
    if (config.end_date) {
        while (last_row >= 0 && *config.end_date < panel.dates[static_cast<std::size_t>(last_row)]) --last_row;
    }

    std::vector<Index> rebalances;
    for (Index r : quarter_end_rows(panel.dates)) {
        if (r < config.train_window || r > last_row) continue;
        if (config.start_date && panel.dates[static_cast<std::size_t>(r)] < *config.start_date) continue;
        rebalances.push_back(r);
    }
    if (rebalances.empty()) throw Error("backtest: insufficient history before the first rebalance date");

    selector::TrainConfig train = config.train;
    train.seed = config.seed;

    const Index first = rebalances.front();
    BacktestResult result;
    std::vector<std::int64_t> shares(static_cast<std::size_t>(n_assets), 0);
    double cash = config.initial_capital;
    Vector last_price = Vector::Constant(n_assets, std::numeric_limits<double>::quiet_NaN());
    for (Index t = 0; t < first; ++t) {
        for (Index j = 0; j < n_assets; ++j) price_or_last(panel.prices, last_price, t, j);
    }
    const double bench0 = benchmark.prices(first, 0);
    if (std::isnan(bench0)) throw Error("backtest: benchmark level missing on the first rebalance date");

    std::size_t next_event = 0;
    for (Index t = first; t <= last_row; ++t) {
        for (Index j = 0; j < n_assets; ++j) price_or_last(panel.prices, last_price, t, j);

        if (next_event < rebalances.size() && rebalances[next_event] == t) {
            ++next_event;
            RebalanceEvent ev;
            ev.date = panel.dates[static_cast<std::size_t>(t)];
            ev.row = t;

            double pre = cash;
            for (Index j = 0; j < n_assets; ++j) {
                if (shares[static_cast<std::size_t>(j)] != 0) pre += static_cast<double>(shares[static_cast<std::size_t>(j)]) * last_price[j];
            }
            ev.pre_trade_value = pre;

            const Index lo = t - config.train_window;
            std::vector<Index> universe;
            for (Index j = 0; j < n_assets; ++j) {
                if (panel.complete(j, lo, t)) universe.push_back(j);
            }
            if (universe.empty()) {
                throw Error("backtest: universe empty after missing-data exclusion on " + format_date(ev.date));
            }
            const PricePanel window = panel.rows(lo, t).columns(universe);
            const ReturnsMatrix returns = compute_log_returns(window, benchmark.rows(lo, t));

            Vector caps;
            if (panel.market_caps) {
                caps.resize(static_cast<Index>(universe.size()));
                for (std::size_t u = 0; u < universe.size(); ++u) caps[static_cast<Index>(u)] = (*panel.market_caps)(t, universe[u]);
            }
            const int k = std::min<int>(config.k, static_cast<int>(universe.size()));
            ev.portfolio = fit_with(config.method, returns, k, panel.market_caps ? &caps : nullptr, train);
            ev.portfolio.seed = config.seed;

            Vector target_w = Vector::Zero(n_assets);
            for (std::size_t q = 0; q < ev.portfolio.asset_ids.size(); ++q) {
                target_w[universe[static_cast<std::size_t>(ev.portfolio.asset_ids[q])]] = ev.portfolio.weights[static_cast<Index>(q)];
            }

            // Reserve the worst-case fee bill before sizing so cash stays >= 0.
            int may_trade = 0;
            for (Index j = 0; j < n_assets; ++j) {
                if (shares[static_cast<std::size_t>(j)] != 0 || target_w[j] > 0.0) ++may_trade;
            }
            const double budget = std::max(0.0, pre - config.fee_per_trade * may_trade);

            std::vector<std::int64_t> target(static_cast<std::size_t>(n_assets), 0);
            for (Index j = 0; j < n_assets; ++j) {
                if (target_w[j] <= 0.0) continue;
                const double p = panel.prices(t, j);
                target[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(budget * target_w[j] / p + 1e-9));
            }

            double mv = 0.0;
            for (Index j = 0; j < n_assets; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                const std::int64_t delta = target[ju] - shares[ju];
                if (delta != 0) {
                    ev.trades.push_back({panel.tickers[ju], delta, last_price[j], config.fee_per_trade});
                    ev.fees_paid += config.fee_per_trade;
                }
                mv += static_cast<double>(target[ju]) * last_price[j];
            }
            shares = target;
            cash = pre - mv - ev.fees_paid;
            ev.post_trade_market_value = mv;
            ev.cash = cash;
            ev.holdings = shares;
            result.events.push_back(std::move(ev));
        }

        double value = cash;
        for (Index j = 0; j < n_assets; ++j) {
            if (shares[static_cast<std::size_t>(j)] != 0) value += static_cast<double>(shares[static_cast<std::size_t>(j)]) * last_price[j];
        }
        result.dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
        result.equity_curve.conservativeResize(result.equity_curve.size() + 1);
        result.equity_curve[result.equity_curve.size() - 1] = value;
        result.index_curve.conservativeResize(result.index_curve.size() + 1);
        result.index_curve[result.index_curve.size() - 1] = config.initial_capital * benchmark.prices(t, 0) / bench0;
    }
    result.metrics = compute_metrics(result);
    return result;
}

MetricsReport compute_metrics(const BacktestResult& r) {
    MetricsReport m;
    m.percentage_error = metrics::percentage_error(r.equity_curve, r.index_curve);
    m.mean_pe = m.percentage_error.mean();
    m.mean_abs_pe = m.percentage_error.cwiseAbs().mean();
    m.max_abs_pe = m.percentage_error.cwiseAbs().maxCoeff();

    const Index n = r.equity_curve.size();
    if (n >= 2) {
        double s = 0.0;
        for (Index t = 1; t < n; ++t) {
            const double d = std::log(r.equity_curve[t] / r.equity_curve[t - 1]) -
                             std::log(r.index_curve[t] / r.index_curve[t - 1]);
            s += d * d;
        }
        m.tracking_mse = s / static_cast<double>(n - 1);
    }

    // Marks: every rebalance date plus the final date when it is not one.
    std::vector<Index> marks;
    const Index first_row = r.events.empty() ? 0 : r.events.front().row;
    for (const auto& ev : r.events) marks.push_back(ev.row - first_row);
    if (marks.empty() || marks.back() != n - 1) marks.push_back(n - 1);
    m.tracker_period_returns = metrics::period_returns(r.equity_curve, marks);
    m.index_period_returns = metrics::period_returns(r.index_curve, marks);

    auto side = [](const Vector& curve, const Vector& period) {
        SideMetrics s;
        s.max_drawdown = metrics::max_drawdown(curve);
        s.total_return = curve[curve.size() - 1] / curve[0] - 1.0;
        if (period.size() >= 2) {
            s.volatility = metrics::volatility(period);
            s.sharpe = metrics::sharpe(period);
        }
        return s;
    };
    m.tracker = side(r.equity_curve, m.tracker_period_returns);
    m.index = side(r.index_curve, m.index_period_returns);
    for (const auto& ev : r.events) m.total_fees += ev.fees_paid;
    return m;
}

namespace {

nlohmann::json side_json(const SideMetrics& s) {
    return {
        {"volatility", s.volatility},
        {"sharpe", s.sharpe ? nlohmann::json(*s.sharpe) : nlohmann::json(nullptr)},
        {"max_drawdown", s.max_drawdown},
        {"total_return", s.total_return},
    };
}

}  // namespace

nlohmann::json metrics_to_json(const MetricsReport& m) {
    return {
        {"mean_pe", m.mean_pe},
        {"mean_abs_pe", m.mean_abs_pe},
        {"max_abs_pe", m.max_abs_pe},
        {"tracking_mse", m.tracking_mse},
        {"periods", m.tracker_period_returns.size()},
        {"total_fees", io::format_currency(m.total_fees)},
        {"tracker", side_json(m.tracker)},
        {"index", side_json(m.index)},
    };
}

nlohmann::json config_to_json(const BacktestConfig& c) {
    nlohmann::json j = {
        {"train_window", c.train_window},
        {"fee_per_trade", c.fee_per_trade},
        {"initial_capital", c.initial_capital},
        {"k", c.k},
        {"method", std::string(to_string(c.method))},
        {"seed", c.seed},
        {"train", selector::to_json(c.train)},
    };
    if (c.start_date) j["start_date"] = format_date(*c.start_date);
    if (c.end_date) j["end_date"] = format_date(*c.end_date);
    return j;
}

BacktestConfig config_from_json(const nlohmann::json& j) {
    BacktestConfig c;
    c.train_window = j.value("train_window", c.train_window);
    c.fee_per_trade = j.value("fee_per_trade", c.fee_per_trade);
    c.initial_capital = j.value("initial_capital", c.initial_capital);
    c.k = j.value("k", c.k);
    if (j.contains("method")) {
        const auto m = method_from_string(j.at("method").get<std::string>());
        if (!m) throw Error("backtest: unknown method '" + j.at("method").get<std::string>() + "'");
        c.method = *m;
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("train")) c.train = selector::train_config_from_json(j.at("train"));
    if (j.contains("start_date")) c.start_date = parse_date(j.at("start_date").get<std::string>());
    if (j.contains("end_date")) c.end_date = parse_date(j.at("end_date").get<std::string>());
    c.validate();
    return c;
}

std::string equity_csv(const std::vector<EquityRow>& rows) {
    std::ostringstream out;
    out << "date,tracker_value,index_value,pe\n";
    for (const auto& r : rows) {
        out << format_date(r.date) << ',' << io::format_currency(r.tracker_value) << ','
            << io::format_currency(r.index_value) << ',' << io::format_double(r.pe) << '\n';
    }
    return out.str();
}

std::string equity_csv(const BacktestResult& r) {
    std::vector<EquityRow> rows;
    for (std::size_t t = 0; t < r.dates.size(); ++t) {
        const auto ti = static_cast<Index>(t);
        rows.push_back({r.dates[t], r.equity_curve[ti], r.index_curve[ti], r.metrics.percentage_error[ti]});
    }
    return equity_csv(rows);
}

std::vector<EquityRow> parse_equity_csv(const std::string& text) {
    std::vector<EquityRow> rows;
    const auto lines = io::split(text, '\n');
    if (lines.empty() || io::trim(lines[0]) != "date,tracker_value,index_value,pe") {
        throw Error("equity.csv: unexpected header");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = io::trim(lines[i]);
        if (line.empty()) continue;
        const auto f = io::split(line);
        if (f.size() != 4) throw Error("equity.csv: wrong field count on line " + std::to_string(i + 1));
        rows.push_back({parse_date(f[0]), io::parse_double(f[1]), io::parse_double(f[2]), io::parse_double(f[3])});
    }
    return rows;
}

std::string events_csv(const BacktestResult& r) {
    std::ostringstream out;
    out << "date,ticker,shares_delta,fee\n";
    for (const auto& ev : r.events) {
        for (const auto& tr : ev.trades) {
            out << format_date(ev.date) << ',' << tr.ticker << ',' << tr.shares_delta << ','
                << io::format_currency(tr.fee) << '\n';
        }
    }
    return out.str();
}

std::vector<std::filesystem::path> write_result(const std::filesystem::path& dir, const BacktestResult& r) {
    std::vector<std::filesystem::path> paths = {dir / "equity.csv", dir / "events.csv", dir / "metrics.json"};
    io::write_file_atomic(paths[0], equity_csv(r));
    io::write_file_atomic(paths[1], events_csv(r));
    nlohmann::json m = metrics_to_json(r.metrics);
    m["rebalances"] = r.events.size();
    io::write_file_atomic(paths[2], m.dump(2) + "\n");
    return paths;
}

}  // namespace itrack::backtest
