#include "itrack/cli.hpp"

#include "itrack/baselines.hpp"
#include "itrack/io.hpp"
#include "itrack/metrics.hpp"
#include "itrack/plot.hpp"
#include "itrack/strategy.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace itrack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve_out(const std::optional<fs::path>& flag, const std::optional<fs::path>& from_config) {
    if (flag) return *flag;
    if (from_config) return *from_config;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "out";
}

std::string utc_timestamp() {
    using namespace std::chrono;
    const auto now = floor<seconds>(system_clock::now());
    const auto day = floor<days>(now);
    const year_month_day ymd{day};
    const hh_mm_ss hms{now - day};
    std::ostringstream s;
    s << format_date(ymd) << 'T' << std::setfill('0') << std::setw(2) << hms.hours().count() << ':' << std::setw(2)
      << hms.minutes().count() << ':' << std::setw(2) << hms.seconds().count() << 'Z';
    return s.str();
}

void emit(Manifest& manifest, const fs::path& path, std::string_view content) {
    io::write_file_atomic(path, content);
    manifest.add(path);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> iota_x(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
    return x;
}

std::vector<std::pair<double, std::string>> date_ticks(const std::vector<Date>& dates, int count = 5) {
    std::vector<std::pair<double, std::string>> ticks;
    if (dates.empty()) return ticks;
    const std::size_t last = dates.size() - 1;
    for (int i = 0; i < count; ++i) {
        const std::size_t t = last * static_cast<std::size_t>(i) / static_cast<std::size_t>(count - 1);
        ticks.emplace_back(static_cast<double>(t), format_date(dates[t]));
    }
    return ticks;
}

std::string method_label(Method m) { return std::string(to_string(m)); }

std::vector<int> groups_for(const std::vector<std::string>& tickers, const std::vector<std::pair<std::string, int>>& table) {
    std::map<std::string, int> lookup(table.begin(), table.end());
    std::vector<int> out;
    for (const auto& t : tickers) {
        const auto it = lookup.find(t);
        out.push_back(it == lookup.end() ? 0 : it->second);
    }
    return out;
}

// --- gen-toy --------------------------------------------------------------------

struct GenToyArgs {
    std::optional<int> groups;
    int length = 750;
    int dup_min = 50;
    int dup_max = 200;
    double noise = 0.01;
    bool market = false;
    int assets = 100;
    int days = 1000;
    std::uint64_t seed = 0;
    std::optional<fs::path> out;
};

int cmd_gen_toy(const GenToyArgs& a, std::ostream& out) {
    const fs::path dir = resolve_out(a.out, std::nullopt);
    fs::create_directories(dir);
    Manifest manifest(dir, "gen-toy");
    manifest.set("seed", a.seed);

    if (a.market) {
        MarketSpec spec;
        spec.n_assets = a.assets;
        spec.n_groups = a.groups.value_or(spec.n_groups);
        spec.n_days = a.days;
        spec.seed = a.seed;
        const SyntheticMarket m = generate_market(spec);
        write_prices(dir / "prices.csv", m.panel);
        manifest.add(dir / "prices.csv");
        write_benchmark(dir / "benchmark.csv", m.benchmark);
        manifest.add(dir / "benchmark.csv");
        write_groups(dir / "groups.csv", m.panel.tickers, m.group_labels);
        manifest.add(dir / "groups.csv");
        manifest.set("kind", "market");
        out << "synthetic market: " << spec.n_assets << " assets in " << spec.n_groups << " sectors, "
            << spec.n_days << " trading days from " << format_date(m.panel.dates.front()) << " to "
            << format_date(m.panel.dates.back()) << "\n";
    } else {
        ToySpec spec;
        spec.n_groups = a.groups.value_or(spec.n_groups);
        spec.series_length = a.length;
        spec.dup_min = a.dup_min;
        spec.dup_max = a.dup_max;
        spec.noise_scale = a.noise;
        spec.seed = a.seed;
        const ToyDataset toy = generate_toy(spec);
        const PricedReturns priced = prices_from_returns(toy.returns);
        write_prices(dir / "prices.csv", priced.panel);
        manifest.add(dir / "prices.csv");
        write_benchmark(dir / "benchmark.csv", priced.benchmark);
        manifest.add(dir / "benchmark.csv");
        write_groups(dir / "groups.csv", toy.returns.tickers, toy.group_labels);
        manifest.add(dir / "groups.csv");
        manifest.set("kind", "toy");
        out << "toy dataset: " << spec.n_groups << " groups, " << toy.returns.num_assets() << " assets, "
            << toy.returns.num_periods() << " return periods\n";
        out << "group sizes:";
        for (int s : toy.group_sizes) out << ' ' << s;
        out << "\n";
    }
    manifest.write();
    out << "wrote " << dir.string() << "\n";
    return kOk;
}

// --- fit --------------------------------------------------------------------------

struct FitArgs {
    fs::path prices;
    fs::path benchmark;
    std::optional<fs::path> groups;
    std::optional<int> k;
    std::string method = "ours";
    std::uint64_t seed = 0;
    std::optional<int> iters;
    std::optional<double> lr;
    bool no_postprocess = false;
    std::optional<int> window;
    std::optional<fs::path> out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const auto method = method_from_string(a.method);
    if (!method) throw CLI::ValidationError("--method", "unknown method '" + a.method + "'");
    if (*method != Method::FullQp && !a.k) throw CLI::RequiredError("--k");

    const PricePanel panel = load_prices(a.prices);
    const PricePanel bench = load_benchmark(a.benchmark);
    std::vector<std::pair<std::string, int>> group_table;
    if (a.groups) group_table = load_groups(*a.groups);

    Index first = 0;
    if (a.window) {
        if (*a.window >= panel.num_dates()) throw Error("--window exceeds the available history");
        first = panel.num_dates() - 1 - *a.window;
    }
    const Index last = panel.num_dates() - 1;
    const ReturnsMatrix data = compute_log_returns(panel.rows(first, last), bench.rows(first, last));

    Vector caps;
    if (panel.market_caps) {
        caps.resize(data.num_assets());
        for (Index j = 0; j < data.num_assets(); ++j) {
            caps[j] = (*panel.market_caps)(last, *panel.find_ticker(data.tickers[static_cast<std::size_t>(j)]));
        }
    }

    selector::TrainConfig train;
    train.seed = a.seed;
    if (a.iters) train.iters = *a.iters;
    if (a.lr) train.learning_rate = *a.lr;
    train.postprocess = !a.no_postprocess;
    train.validate();

    const int k = a.k.value_or(0);
    if (*method != Method::FullQp && k > data.num_assets()) throw Error("K exceeds the number of usable assets");
    FittedPortfolio p = fit_with(*method, data, k, panel.market_caps ? &caps : nullptr, train);
    p.seed = a.seed;
    p.check(1e-8);

    const fs::path dir = resolve_out(a.out, std::nullopt);
    fs::create_directories(dir);
    Manifest manifest(dir, "fit");
    manifest.set("seed", a.seed);
    emit(manifest, dir / "portfolio.json", to_json(p).dump(2) + "\n");

    const std::vector<int> groups = group_table.empty() ? std::vector<int>{} : groups_for(data.tickers, group_table);
    plot::Axes axes{"Capital allocation (" + p.method + ", K'=" + std::to_string(p.k_effective()) + ")", "asset",
                    "weight", {}};
    emit(manifest, dir / "allocation.svg", plot::bar_chart(axes, to_std(p.dense(data.num_assets())), groups));
    manifest.write();

    out << "method " << p.method << ": " << p.k_effective() << " assets, in-sample MSE "
        << io::format_double(p.in_sample_mse) << "\n";
    for (std::size_t q = 0; q < p.tickers.size(); ++q) {
        if (q >= 20) {
            out << "  ... " << p.tickers.size() - q << " more\n";
            break;
        }
        out << "  " << p.tickers[q] << ' ' << io::format_double(p.weights[static_cast<Index>(q)]) << "\n";
    }
    return kOk;
}

// --- backtest ---------------------------------------------------------------------

struct RunArgs {
    fs::path config;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> k;
    int n_seeds = 100;
};

struct Pair {
    Method method;
    int k;
    std::string name;
};

std::string optional_num(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

int cmd_backtest(const RunArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load_run_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.k) cfg.k = {*a.k};
    if (!cfg.prices || !cfg.benchmark) throw Error("backtest needs 'prices' and 'benchmark' in the config");
    const PricePanel panel = load_prices(*cfg.prices);
    const PricePanel bench = load_benchmark(*cfg.benchmark);

    std::vector<Pair> pairs;
    for (Method m : cfg.methods) {
        if (m == Method::FullQp) {
            pairs.push_back({m, 0, "qp"});
            continue;
        }
        for (int k : cfg.k) pairs.push_back({m, k, method_label(m) + "_k" + std::to_string(k)});
    }

    const fs::path dir = resolve_out(a.out, cfg.output_dir);
    fs::create_directories(dir);
    Manifest manifest(dir, "backtest");
    manifest.set("seed", cfg.seed);
    manifest.set("config", a.config.string());

    std::vector<std::optional<backtest::BacktestResult>> results(pairs.size());
    std::vector<std::string> errors(pairs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        try {
            backtest::BacktestConfig bc = cfg.backtest;
            bc.method = pairs[i].method;
            bc.k = pairs[i].k;
            bc.seed = cfg.seed;
            bc.train = cfg.train;
            results[i] = backtest::run_backtest(panel, bench, bc);
        } catch (const std::exception& e) {
            errors[i] = pairs[i].name + ": " + e.what();
        }
    }

    std::ostringstream table;
    table << "method,k,rebalances,mean_k_effective,mean_pe,mean_abs_pe,max_abs_pe,tracking_mse,"
             "tracker_volatility,tracker_sharpe,tracker_mdd,tracker_total_return,"
             "index_volatility,index_sharpe,index_mdd,index_total_return,total_fees\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!results[i]) {
            manifest.add_error(errors[i]);
            err << "error: " << errors[i] << "\n";
            continue;
        }
        const auto& r = *results[i];
        const fs::path sub = dir / pairs[i].name;
        fs::create_directories(sub);
        for (const auto& p : backtest::write_result(sub, r)) manifest.add(p);
        json portfolios = json::array();
        double k_sum = 0.0;
        for (const auto& ev : r.events) {
            portfolios.push_back({{"date", format_date(ev.date)}, {"portfolio", to_json(ev.portfolio)}});
            k_sum += ev.portfolio.k_effective();
        }
        emit(manifest, sub / "portfolios.json", portfolios.dump(2) + "\n");

        const auto& m = r.metrics;
        table << method_label(pairs[i].method) << ',' << pairs[i].k << ',' << r.events.size() << ','
              << io::format_double(k_sum / static_cast<double>(r.events.size())) << ','
              << io::format_double(m.mean_pe) << ',' << io::format_double(m.mean_abs_pe) << ','
              << io::format_double(m.max_abs_pe) << ',' << io::format_double(m.tracking_mse) << ','
              << io::format_double(m.tracker.volatility) << ',' << optional_num(m.tracker.sharpe) << ','
              << io::format_double(m.tracker.max_drawdown) << ',' << io::format_double(m.tracker.total_return) << ','
              << io::format_double(m.index.volatility) << ',' << optional_num(m.index.sharpe) << ','
              << io::format_double(m.index.max_drawdown) << ',' << io::format_double(m.index.total_return) << ','
              << io::format_currency(m.total_fees) << "\n";
        out << pairs[i].name << ": " << r.events.size() << " rebalances, mean |PE| "
            << io::format_double(m.mean_abs_pe) << ", fees " << io::format_currency(m.total_fees) << "\n";
    }
    emit(manifest, dir / "comparison.csv", table.str());

    // Equity curves per K with the PE trace underneath.
    std::set<int> ks;
    for (const auto& p : pairs) ks.insert(p.k);
    for (int k : ks) {
        if (k == 0 && ks.size() > 1) continue;
        std::vector<plot::Series> equity, pe;
        const backtest::BacktestResult* any = nullptr;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (!results[i] || (pairs[i].k != k && pairs[i].k != 0)) continue;
            const auto& r = *results[i];
            any = &r;
            equity.push_back({pairs[i].name, iota_x(r.dates.size()), to_std(r.equity_curve)});
            pe.push_back({pairs[i].name, iota_x(r.dates.size()), to_std(r.metrics.percentage_error)});
        }
        if (!any) continue;
        equity.insert(equity.begin(), plot::Series{"index", iota_x(any->dates.size()), to_std(any->index_curve)});
        const auto ticks = date_ticks(any->dates);
        const std::string suffix = k == 0 ? "qp" : "k" + std::to_string(k);
        const std::string svg = plot::stack({
            plot::line_chart({"Equity curves, " + suffix, "date", "value", ticks}, equity),
            plot::line_chart({"Percentage error (tracker - index) / index", "date", "PE", ticks}, pe),
        });
        emit(manifest, dir / ("equity_" + suffix + ".svg"), svg);
    }

    // Metrics against K, one line per method.
    if (cfg.k.size() > 1) {
        struct Metric {
            const char* title;
            double (*get)(const backtest::MetricsReport&);
        };
        const Metric metrics[] = {
            {"mean |PE|", [](const backtest::MetricsReport& m) { return m.mean_abs_pe; }},
            {"tracking MSE of daily log-returns", [](const backtest::MetricsReport& m) { return m.tracking_mse; }},
            {"volatility", [](const backtest::MetricsReport& m) { return m.tracker.volatility; }},
            {"Sharpe ratio",
             [](const backtest::MetricsReport& m) { return m.tracker.sharpe.value_or(std::nan("")); }},
            {"maximum drawdown", [](const backtest::MetricsReport& m) { return m.tracker.max_drawdown; }},
        };
        std::vector<std::string> panels;
        for (const auto& metric : metrics) {
            std::vector<plot::Series> lines;
            for (Method m : cfg.methods) {
                plot::Series s{method_label(m), {}, {}};
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    if (pairs[i].method != m || !results[i]) continue;
                    if (m == Method::FullQp) {
                        for (int k : cfg.k) {
                            s.x.push_back(k);
                            s.y.push_back(metric.get(results[i]->metrics));
                        }
                    } else {
                        s.x.push_back(pairs[i].k);
                        s.y.push_back(metric.get(results[i]->metrics));
                    }
                }
                if (!s.x.empty()) lines.push_back(std::move(s));
            }
            panels.push_back(plot::line_chart({metric.title, "K", metric.title, {}}, lines));
        }
        emit(manifest, dir / "metrics_vs_k.svg", plot::stack(panels));
    }

    manifest.write();
    return manifest.failed() ? kRunFailed : kOk;
}

// --- sweep ------------------------------------------------------------------------

int cmd_sweep(const RunArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load_run_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.k) cfg.k = {*a.k};

    ReturnsMatrix data;
    std::vector<int> groups;
    if (cfg.toy) {
        const ToyDataset toy = generate_toy(*cfg.toy);
        data = toy.returns;
        groups = toy.group_labels;
    } else {
        if (!cfg.prices || !cfg.benchmark) throw Error("sweep needs 'toy' or 'prices' and 'benchmark' in the config");
        data = compute_log_returns(load_prices(*cfg.prices), load_benchmark(*cfg.benchmark));
        if (cfg.groups) groups = groups_for(data.tickers, load_groups(*cfg.groups));
    }
    for (int k : cfg.k) {
        if (k > data.num_assets()) throw Error("K exceeds the number of usable assets");
    }

    const fs::path dir = resolve_out(a.out, cfg.output_dir);
    fs::create_directories(dir);
    Manifest manifest(dir, "sweep");
    manifest.set("seed", cfg.seed);
    manifest.set("n_seeds", a.n_seeds);
    manifest.set("config", a.config.string());

    const auto n = static_cast<std::size_t>(a.n_seeds);
    json summary = json::object();
    for (int k : cfg.k) {
        std::vector<std::optional<FittedPortfolio>> fits(n);
        std::vector<std::vector<double>> losses(n);
        std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
        for (std::size_t s = 0; s < n; ++s) {
            try {
                selector::TrainConfig tc = cfg.train;
                tc.seed = cfg.seed + s;
                fits[s] = selector::fit_portfolio(data, k, tc, &losses[s]);
            } catch (const std::exception& e) {
                errors[s] = "K=" + std::to_string(k) + " seed " + std::to_string(cfg.seed + s) + ": " + e.what();
            }
        }

        const std::string tag = "k" + std::to_string(k);
        std::ostringstream per_seed;
        per_seed << "seed,k_effective,in_sample_mse,final_train_loss" << (groups.empty() ? "" : ",groups_covered")
                 << "\n";
        std::vector<double> mses;
        int full_cover = 0;
        std::vector<const std::vector<double>*> ok_losses;
        for (std::size_t s = 0; s < n; ++s) {
            if (!fits[s]) {
                manifest.add_error(errors[s]);
                err << "error: " << errors[s] << "\n";
                continue;
            }
            const auto& p = *fits[s];
            mses.push_back(p.in_sample_mse);
            ok_losses.push_back(&losses[s]);
            per_seed << cfg.seed + s << ',' << p.k_effective() << ',' << io::format_double(p.in_sample_mse) << ','
                     << io::format_double(losses[s].back());
            if (!groups.empty()) {
                std::set<int> covered;
                for (Index id : p.asset_ids) covered.insert(groups[static_cast<std::size_t>(id)]);
                per_seed << ',' << covered.size();
                const std::set<int> all(groups.begin(), groups.end());
                if (covered.size() == all.size() && p.k_effective() == static_cast<int>(all.size())) ++full_cover;
            }
            per_seed << "\n";
        }
        emit(manifest, dir / ("sweep_" + tag + ".csv"), per_seed.str());
        if (mses.size() < 2) continue;

        // Loss band over iterations.
        const std::size_t iters = ok_losses.front()->size();
        std::vector<double> mean(iters), sd(iters);
        std::ostringstream band;
        band << "iteration,mean,std,min,max\n";
        for (std::size_t t = 0; t < iters; ++t) {
            Vector col(static_cast<Index>(ok_losses.size()));
            for (std::size_t s = 0; s < ok_losses.size(); ++s) col[static_cast<Index>(s)] = (*ok_losses[s])[t];
            mean[t] = col.mean();
            sd[t] = metrics::volatility(col);
            band << t << ',' << io::format_double(mean[t]) << ',' << io::format_double(sd[t]) << ','
                 << io::format_double(col.minCoeff()) << ',' << io::format_double(col.maxCoeff()) << "\n";
        }
        emit(manifest, dir / ("loss_band_" + tag + ".csv"), band.str());

        std::vector<double> lo(iters), hi(iters);
        for (std::size_t t = 0; t < iters; ++t) {
            lo[t] = mean[t] - sd[t];
            hi[t] = mean[t] + sd[t];
        }
        plot::Axes axes{"Training loss over " + std::to_string(ok_losses.size()) + " seeds, K=" + std::to_string(k),
                        "iteration", "loss", {}};
        emit(manifest, dir / ("band_" + tag + ".svg"),
             plot::line_chart(axes, {{"mean", iota_x(iters), mean}}, plot::Band{"mean ± std", iota_x(iters), lo, hi}));

        const Vector v = Eigen::Map<const Vector>(mses.data(), static_cast<Index>(mses.size()));
        const double m = v.mean();
        const double s = metrics::volatility(v);
        json entry = {
            {"runs", mses.size()},
            {"mean_mse", m},
            {"std_mse", s},
            {"cv_mse", s / m},
            {"min_mse", v.minCoeff()},
            {"max_mse", v.maxCoeff()},
        };
        if (!groups.empty()) entry["runs_covering_all_groups"] = full_cover;
        summary[tag] = entry;
        out << "K=" << k << ": " << mses.size() << " runs, in-sample MSE mean " << io::format_double(m) << " std "
            << io::format_double(s) << " cv " << io::format_double(s / m);
        if (!groups.empty()) out << ", " << full_cover << " runs cover every group";
        out << "\n";
    }
    emit(manifest, dir / "summary.json", summary.dump(2) + "\n");
    manifest.write();
    return manifest.failed() ? kRunFailed : kOk;
}

}  // namespace

// --- RunConfig ----------------------------------------------------------------------

void RunConfig::validate() const {
    if (toy) {
        toy->validate();
    } else if (!prices || !benchmark) {
        throw Error("config: give either 'toy' or both 'prices' and 'benchmark'");
    }
    for (const auto* p : {&prices, &benchmark, &groups}) {
        if (*p && !fs::exists(**p)) throw Error("config: file not found: " + (*p)->string());
    }
    if (methods.empty()) throw Error("config: 'methods' is empty");
    if (k.empty()) throw Error("config: 'k' is empty");
    for (int v : k) {
        if (v < 1) throw Error("config: K values must be >= 1");
    }
    train.validate();
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw Error("config: top level must be an object");
    static const std::set<std::string> known = {"prices", "benchmark", "groups", "toy", "methods", "k",
                                                "seed", "train", "backtest", "output_dir"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw Error("config: unknown key '" + key + "'");
    }
    auto path = [&](const char* key) -> std::optional<fs::path> {
        if (!j.contains(key)) return std::nullopt;
        const fs::path p = j.at(key).get<std::string>();
        return p.is_absolute() ? p : base_dir / p;
    };
    RunConfig c;
    c.prices = path("prices");
    c.benchmark = path("benchmark");
    c.groups = path("groups");
    c.output_dir = path("output_dir");
    if (j.contains("toy")) {
        const auto& t = j.at("toy");
        ToySpec s;
        s.n_groups = t.value("n_groups", s.n_groups);
        s.series_length = t.value("series_length", s.series_length);
        s.dup_min = t.value("dup_min", s.dup_min);
        s.dup_max = t.value("dup_max", s.dup_max);
        s.noise_scale = t.value("noise_scale", s.noise_scale);
        s.seed = t.value("seed", s.seed);
        c.toy = s;
    }
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods")) {
            const auto parsed = method_from_string(m.get<std::string>());
            if (!parsed) throw Error("config: unknown method '" + m.get<std::string>() + "'");
            c.methods.push_back(*parsed);
        }
    }
    if (j.contains("k")) {
        const auto& k = j.at("k");
        c.k = k.is_array() ? k.get<std::vector<int>>() : std::vector<int>{k.get<int>()};
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("train")) c.train = selector::train_config_from_json(j.at("train"));
    if (j.contains("backtest")) c.backtest = backtest::config_from_json(j.at("backtest"));
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) throw Error("config not found: " + path.string());
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        return run_config_from_json(j, path.parent_path());
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::vector<std::pair<std::string, int>> load_groups(const fs::path& path) {
    const std::string text = io::read_file(path);
    const auto lines = io::split(text, '\n');
    if (lines.empty() || io::trim(lines[0]) != "ticker,group") throw Error(path.string() + ":1: expected header ticker,group");
    std::vector<std::pair<std::string, int>> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = io::trim(lines[i]);
        if (line.empty()) continue;
        const auto f = io::split(line);
        if (f.size() != 2) throw Error(path.string() + ":" + std::to_string(i + 1) + ": expected 2 fields");
        out.emplace_back(std::string(f[0]), static_cast<int>(io::parse_double(f[1])));
    }
    return out;
}

void write_groups(const fs::path& path, const std::vector<std::string>& tickers, const std::vector<int>& groups) {
    if (tickers.size() != groups.size()) throw Error("write_groups: length mismatch");
    std::ostringstream s;
    s << "ticker,group\n";
    for (std::size_t i = 0; i < tickers.size(); ++i) s << tickers[i] << ',' << groups[i] << "\n";
    io::write_file_atomic(path, s.str());
}

// --- Manifest -------------------------------------------------------------------------

Manifest::Manifest(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {}

void Manifest::add(const fs::path& file) { files_.push_back(file); }
void Manifest::add_error(const std::string& message) { errors_.push_back(message); }
void Manifest::set(const std::string& key, json value) { extra_[key] = std::move(value); }

fs::path Manifest::write() const {
    json artifacts = json::array();
    for (const auto& f : files_) {
        const std::string bytes = io::read_file(f);
        artifacts.push_back({
            {"path", fs::relative(f, dir_).generic_string()},
            {"bytes", bytes.size()},
            {"sha256", io::sha256_hex(bytes)},
        });
    }
    json j = {
        {"command", command_},
        {"status", errors_.empty() ? "ok" : "failed"},
        {"created_utc", utc_timestamp()},
        {"artifacts", artifacts},
        {"errors", errors_},
    };
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    const fs::path path = dir_ / "manifest.json";
    io::write_file_atomic(path, j.dump(2) + "\n");
    return path;
}

// --- entry point --------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse index tracking by stochastic asset selection", "itrack"};
    const CLI::Range at_least_one(1, std::numeric_limits<int>::max());
    app.require_subcommand(1);
    app.set_version_flag("--version", "itrack 0.1");

    GenToyArgs toy;
    auto* gen = app.add_subcommand("gen-toy", "Write a synthetic dataset (grouped duplicates, or a sector market)");
    gen->add_option("--groups", toy.groups, "Number of groups (default 5, or 10 with --market)")
        ->check(at_least_one);
    gen->add_option("--length", toy.length, "Return periods of the toy series")->check(CLI::Range(2, 1'000'000));
    gen->add_option("--dup-min", toy.dup_min, "Fewest copies per group")->check(at_least_one);
    gen->add_option("--dup-max", toy.dup_max, "Most copies per group")->check(at_least_one);
    gen->add_option("--noise", toy.noise, "Std of the Gaussian noise added to X and y")->check(CLI::NonNegativeNumber);
    gen->add_flag("--market", toy.market, "Generate a sector market with caps instead of the toy problem");
    gen->add_option("--assets", toy.assets, "Assets in the market")->check(at_least_one);
    gen->add_option("--days", toy.days, "Trading days in the market")->check(CLI::Range(2, 1'000'000));
    gen->add_option("--seed", toy.seed, "Random seed");
    gen->add_option("--out", toy.out, std::string("Output directory (default $") + kOutDirEnv + " or ./out)");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Fit one portfolio on a price file and plot the allocation");
    fitc->add_option("--prices", fit.prices, "Long-format price CSV")->required()->check(CLI::ExistingFile);
    fitc->add_option("--benchmark", fit.benchmark, "Benchmark level CSV")->required()->check(CLI::ExistingFile);
    fitc->add_option("--groups", fit.groups, "ticker,group CSV used to colour the plot")->check(CLI::ExistingFile);
    fitc->add_option("--k", fit.k, "Cardinality K (not used by qp)")->check(at_least_one);
    fitc->add_option("--method", fit.method, "ours | forward | backward | largest_cap | qp")
        ->check(CLI::IsMember({"ours", "forward", "backward", "largest_cap", "qp"}));
    fitc->add_option("--seed", fit.seed, "Random seed");
    fitc->add_option("--iters", fit.iters, "Training iterations")->check(at_least_one);
    fitc->add_option("--lr", fit.lr, "Learning rate")->check(CLI::PositiveNumber);
    fitc->add_flag("--no-postprocess", fit.no_postprocess, "Keep the network weights instead of the QP refit");
    fitc->add_option("--window", fit.window, "Use only the last N return periods")->check(CLI::Range(1, 1'000'000));
    fitc->add_option("--out", fit.out, "Output directory");

    RunArgs bt;
    auto* btc = app.add_subcommand("backtest", "Run every (method, K) backtest in a config file");
    btc->add_option("config", bt.config, "JSON run config")->required();
    btc->add_option("--out", bt.out, "Output directory (overrides the config)");
    btc->add_option("--seed", bt.seed, "Random seed (overrides the config)");
    btc->add_option("--k", bt.k, "Run a single K")->check(at_least_one);

    RunArgs sw;
    auto* swc = app.add_subcommand("sweep", "Repeat the selector across seeds and report the spread");
    swc->add_option("config", sw.config, "JSON run config")->required();
    swc->add_option("--n-seeds", sw.n_seeds, "Number of seeds (>= 2)")->check(CLI::Range(2, 1'000'000));
    swc->add_option("--out", sw.out, "Output directory (overrides the config)");
    swc->add_option("--seed", sw.seed, "First seed (overrides the config)");
    swc->add_option("--k", sw.k, "Run a single K")->check(at_least_one);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (*gen) return cmd_gen_toy(toy, out);
        if (*fitc) return cmd_fit(fit, out);
        if (*btc) return cmd_backtest(bt, out, err);
        if (*swc) return cmd_sweep(sw, out, err);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRunFailed;
    }
    return kUsage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace itrack::cli
