#include "itrack/market_data.hpp"

#include "itrack/io.hpp"
#include "itrack/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace itrack {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    throw Error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> lines_of(const std::string& text) {
    std::vector<std::string_view> out;
    std::string_view all(text);
    for (auto part : io::split(all, '\n')) out.push_back(part);
    return out;
}

std::string header_of(std::string_view line) {
    std::string h;
    for (auto f : io::split(io::trim(line))) {
        if (!h.empty()) h += ',';
        h += io::trim(f);
    }
    return h;
}

}  // namespace

// --- PricePanel ----------------------------------------------------------------

void PricePanel::validate() const {
    if (prices.rows() != num_dates() || prices.cols() != num_assets()) {
        throw Error("price matrix shape does not match dates × tickers");
    }
    if (market_caps && (market_caps->rows() != prices.rows() || market_caps->cols() != prices.cols())) {
        throw Error("market cap matrix shape does not match prices");
    }
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (!(dates[t - 1] < dates[t])) throw Error("unsorted dates at " + format_date(dates[t]));
    }
    std::unordered_set<std::string> seen;
    for (const auto& tk : tickers) {
        if (!seen.insert(tk).second) throw Error("duplicate ticker '" + tk + "'");
    }
    for (Index j = 0; j < prices.cols(); ++j) {
        for (Index t = 0; t < prices.rows(); ++t) {
            const double p = prices(t, j);
            if (std::isnan(p)) continue;
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw Error("non-positive price for " + tickers[j] + " on " + format_date(dates[t]));
            }
        }
    }
}

bool PricePanel::complete(Index col, Index first, Index last) const {
    for (Index t = first; t <= last; ++t) {
        if (std::isnan(prices(t, col))) return false;
    }
    return true;
}

PricePanel PricePanel::rows(Index first, Index last) const {
    if (first < 0 || last >= num_dates() || first > last) throw Error("row range out of bounds");
    PricePanel out;
    out.dates.assign(dates.begin() + first, dates.begin() + last + 1);
    out.tickers = tickers;
    out.prices = prices.middleRows(first, last - first + 1);
    if (market_caps) out.market_caps = market_caps->middleRows(first, last - first + 1);
    return out;
}

PricePanel PricePanel::columns(std::span<const Index> cols) const {
    PricePanel out;
    out.dates = dates;
    out.prices.resize(num_dates(), static_cast<Index>(cols.size()));
    if (market_caps) out.market_caps = Matrix(num_dates(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const Index j = cols[k];
        out.tickers.push_back(tickers.at(static_cast<std::size_t>(j)));
        out.prices.col(static_cast<Index>(k)) = prices.col(j);
        if (market_caps) out.market_caps->col(static_cast<Index>(k)) = market_caps->col(j);
    }
    return out;
}

std::optional<Index> PricePanel::find_ticker(const std::string& ticker) const {
    const auto it = std::find(tickers.begin(), tickers.end(), ticker);
    if (it == tickers.end()) return std::nullopt;
    return static_cast<Index>(it - tickers.begin());
}

// --- ReturnsMatrix ---------------------------------------------------------------

void ReturnsMatrix::validate() const {
    if (X.rows() != y.size() || static_cast<std::size_t>(X.rows()) != dates.size()) {
        throw Error("returns: row count of X must equal length of y and dates");
    }
    if (static_cast<std::size_t>(X.cols()) != tickers.size()) {
        throw Error("returns: column count of X must equal number of tickers");
    }
    if (!X.allFinite() || !y.allFinite()) throw Error("returns: non-finite entry");
}

ReturnsMatrix ReturnsMatrix::select(std::span<const Index> cols) const {
    ReturnsMatrix out;
    out.X.resize(X.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.X.col(static_cast<Index>(k)) = X.col(cols[k]);
        out.tickers.push_back(tickers.at(static_cast<std::size_t>(cols[k])));
    }
    out.y = y;
    out.dates = dates;
    return out;
}

ReturnsMatrix ReturnsMatrix::periods(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > X.rows()) throw Error("period range out of bounds");
    ReturnsMatrix out;
    out.X = X.middleRows(first, count);
    out.y = y.segment(first, count);
    out.dates.assign(dates.begin() + first, dates.begin() + first + count);
    out.tickers = tickers;
    return out;
}

// --- CSV -------------------------------------------------------------------------

PricePanel load_prices(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    const auto lines = lines_of(text);
    if (lines.empty()) fail_at(path, 1, "empty file");

    const std::string header = header_of(lines[0]);
    bool with_caps = false;
    if (header == "date,ticker,adj_close,market_cap") {
        with_caps = true;
    } else if (header != "date,ticker,adj_close") {
        fail_at(path, 1, "expected header 'date,ticker,adj_close[,market_cap]'");
    }

    std::vector<Date> dates;
    std::vector<std::string> tickers;
    std::unordered_map<std::string, std::size_t> column;
    // Sparse cells, expanded once every ticker is known.
    struct Cell {
        std::size_t row, col;
        double price, cap;
    };
    std::vector<Cell> cells;
    std::unordered_set<std::string> row_tickers;

    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = io::trim(lines[ln]);
        if (line.empty()) continue;
        const auto f = io::split(line);
        if (f.size() != (with_caps ? 4u : 3u)) fail_at(path, ln + 1, "wrong field count");

        Date d;
        try {
            d = parse_date(io::trim(f[0]));
        } catch (const Error& e) {
            fail_at(path, ln + 1, e.what());
        }
        if (dates.empty() || dates.back() < d) {
            dates.push_back(d);
            row_tickers.clear();
        } else if (d < dates.back()) {
            fail_at(path, ln + 1, "unsorted dates");
        }

        const std::string ticker(io::trim(f[1]));
        if (ticker.empty()) fail_at(path, ln + 1, "empty ticker");
        if (!row_tickers.insert(ticker).second) fail_at(path, ln + 1, "duplicate row for " + ticker);
        auto [it, inserted] = column.try_emplace(ticker, tickers.size());
        if (inserted) tickers.push_back(ticker);

        double price = kNaN;
        if (!io::trim(f[2]).empty()) {
            try {
                price = io::parse_double(f[2]);
            } catch (const Error& e) {
                fail_at(path, ln + 1, e.what());
            }
            if (!(price > 0.0) || !std::isfinite(price)) fail_at(path, ln + 1, "non-positive price");
        }
        double cap = kNaN;
        if (with_caps && !io::trim(f[3]).empty()) {
            try {
                cap = io::parse_double(f[3]);
            } catch (const Error& e) {
                fail_at(path, ln + 1, e.what());
            }
            if (!(cap >= 0.0) || !std::isfinite(cap)) fail_at(path, ln + 1, "invalid market cap");
        }
        cells.push_back({dates.size() - 1, it->second, price, cap});
    }
    if (dates.empty()) fail_at(path, 2, "no data rows");

    PricePanel panel;
    panel.dates = std::move(dates);
    panel.tickers = std::move(tickers);
    panel.prices = Matrix::Constant(panel.num_dates(), panel.num_assets(), kNaN);
    if (with_caps) panel.market_caps = Matrix::Constant(panel.num_dates(), panel.num_assets(), kNaN);
    for (const auto& c : cells) {
        panel.prices(static_cast<Index>(c.row), static_cast<Index>(c.col)) = c.price;
        if (with_caps) (*panel.market_caps)(static_cast<Index>(c.row), static_cast<Index>(c.col)) = c.cap;
    }
    panel.validate();
    return panel;
}

PricePanel load_benchmark(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    const auto lines = lines_of(text);
    if (lines.empty() || header_of(lines[0]) != "date,level") fail_at(path, 1, "expected header 'date,level'");

    std::vector<Date> dates;
    std::vector<double> levels;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = io::trim(lines[ln]);
        if (line.empty()) continue;
        const auto f = io::split(line);
        if (f.size() != 2) fail_at(path, ln + 1, "wrong field count");
        Date d;
        double level = 0.0;
        try {
            d = parse_date(io::trim(f[0]));
            level = io::parse_double(f[1]);
        } catch (const Error& e) {
            fail_at(path, ln + 1, e.what());
        }
        if (!dates.empty() && d == dates.back()) fail_at(path, ln + 1, "duplicate date");
        if (!dates.empty() && d < dates.back()) fail_at(path, ln + 1, "unsorted dates");
        if (!(level > 0.0) || !std::isfinite(level)) fail_at(path, ln + 1, "non-positive price");
        dates.push_back(d);
        levels.push_back(level);
    }
    if (dates.empty()) fail_at(path, 2, "no data rows");

    PricePanel out;
    out.dates = std::move(dates);
    out.tickers = {"INDEX"};
    out.prices = Eigen::Map<Vector>(levels.data(), static_cast<Index>(levels.size()));
    return out;
}

void write_prices(const std::filesystem::path& path, const PricePanel& panel) {
    panel.validate();
    std::ostringstream out;
    out << (panel.market_caps ? "date,ticker,adj_close,market_cap\n" : "date,ticker,adj_close\n");
    for (Index t = 0; t < panel.num_dates(); ++t) {
        const std::string date = format_date(panel.dates[static_cast<std::size_t>(t)]);
        for (Index j = 0; j < panel.num_assets(); ++j) {
            const double p = panel.prices(t, j);
            const double cap = panel.market_caps ? (*panel.market_caps)(t, j) : kNaN;
            if (std::isnan(p) && std::isnan(cap)) continue;
            out << date << ',' << panel.tickers[static_cast<std::size_t>(j)] << ','
                << (std::isnan(p) ? std::string() : io::format_double(p));
            if (panel.market_caps) out << ',' << (std::isnan(cap) ? std::string() : io::format_double(cap));
            out << '\n';
        }
    }
    io::write_file_atomic(path, out.str());
}

void write_benchmark(const std::filesystem::path& path, const PricePanel& benchmark) {
    benchmark.validate();
    if (benchmark.num_assets() != 1) throw Error("benchmark must have exactly one column");
    std::ostringstream out;
    out << "date,level\n";
    for (Index t = 0; t < benchmark.num_dates(); ++t) {
        if (std::isnan(benchmark.prices(t, 0))) throw Error("benchmark has a missing level");
        out << format_date(benchmark.dates[static_cast<std::size_t>(t)]) << ','
            << io::format_double(benchmark.prices(t, 0)) << '\n';
    }
    io::write_file_atomic(path, out.str());
}

// --- transforms -------------------------------------------------------------------

ReturnsMatrix compute_log_returns(const PricePanel& panel, const PricePanel& benchmark) {
    if (panel.dates != benchmark.dates) throw Error("date-axis mismatch between panel and benchmark");
    if (panel.num_dates() < 2) throw Error("need at least two dates to form returns");
    if (benchmark.num_assets() != 1) throw Error("benchmark must have exactly one column");
    const Index last = panel.num_dates() - 1;
    if (!benchmark.complete(0, 0, last)) throw Error("benchmark has a missing level");

    std::vector<Index> keep;
    for (Index j = 0; j < panel.num_assets(); ++j) {
        if (panel.complete(j, 0, last)) keep.push_back(j);
    }
    if (keep.empty()) throw Error("universe empty after missing-data exclusion");

    const Index d = last;
    ReturnsMatrix out;
    out.X.resize(d, static_cast<Index>(keep.size()));
    out.y.resize(d);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const Index j = keep[k];
        for (Index t = 0; t < d; ++t) {
            out.X(t, static_cast<Index>(k)) = std::log(panel.prices(t + 1, j) / panel.prices(t, j));
        }
        out.tickers.push_back(panel.tickers[static_cast<std::size_t>(j)]);
    }
    for (Index t = 0; t < d; ++t) out.y[t] = std::log(benchmark.prices(t + 1, 0) / benchmark.prices(t, 0));
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.validate();
    return out;
}

PricedReturns prices_from_returns(const ReturnsMatrix& returns, double start_level) {
    returns.validate();
    if (returns.dates.empty()) throw Error("no periods to price");
    // Business day preceding the first return date.
    std::chrono::sys_days start{returns.dates.front()};
    do {
        start -= std::chrono::days{1};
    } while (std::chrono::weekday{start} == std::chrono::Saturday ||
             std::chrono::weekday{start} == std::chrono::Sunday);

    const Index d = returns.num_periods();
    PricedReturns out;
    out.panel.dates.reserve(static_cast<std::size_t>(d + 1));
    out.panel.dates.emplace_back(start);
    out.panel.dates.insert(out.panel.dates.end(), returns.dates.begin(), returns.dates.end());
    out.panel.tickers = returns.tickers;
    out.panel.prices.resize(d + 1, returns.num_assets());
    for (Index j = 0; j < returns.num_assets(); ++j) {
        double cum = 0.0;
        out.panel.prices(0, j) = start_level;
        for (Index t = 0; t < d; ++t) {
            cum += returns.X(t, j);
            out.panel.prices(t + 1, j) = start_level * std::exp(cum);
        }
    }
    out.benchmark.dates = out.panel.dates;
    out.benchmark.tickers = {"INDEX"};
    out.benchmark.prices.resize(d + 1, 1);
    double cum = 0.0;
    out.benchmark.prices(0, 0) = start_level;
    for (Index t = 0; t < d; ++t) {
        cum += returns.y[t];
        out.benchmark.prices(t + 1, 0) = start_level * std::exp(cum);
    }
    return out;
}

// --- generators ---------------------------------------------------------------------

void ToySpec::validate() const {
    if (n_groups < 1) throw Error("toy: n_groups must be >= 1");
    if (series_length < 1) throw Error("toy: series_length must be >= 1");
    if (dup_min < 1 || dup_max < dup_min) throw Error("toy: dup_range must satisfy 1 <= min <= max");
    if (!(noise_scale >= 0.0)) throw Error("toy: noise_scale must be >= 0");
}

ToyDataset generate_toy(const ToySpec& spec) {
    spec.validate();
    const Index len = spec.series_length;
    const Index groups = spec.n_groups;

    // Base series: independent standard normals (identity covariance).
    Engine base_rng = make_engine(spec.seed, Stream::ToyBase);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix base(len, groups);
    for (Index g = 0; g < groups; ++g) {
        for (Index t = 0; t < len; ++t) base(t, g) = normal(base_rng);
    }

    Engine dup_rng = make_engine(spec.seed, Stream::ToyDuplicates);
    std::uniform_int_distribution<int> dup(spec.dup_min, spec.dup_max);
    ToyDataset out;
    for (Index g = 0; g < groups; ++g) out.group_sizes.push_back(dup(dup_rng));

    Index n = 0;
    for (int s : out.group_sizes) n += s;
    auto& r = out.returns;
    r.X.resize(len, n);
    r.y.resize(len);
    Index col = 0;
    for (Index g = 0; g < groups; ++g) {
        for (int k = 0; k < out.group_sizes[static_cast<std::size_t>(g)]; ++k, ++col) {
            r.X.col(col) = base.col(g);
            out.group_labels.push_back(static_cast<int>(g));
            r.tickers.push_back("G" + std::to_string(g + 1) + "_" + std::to_string(k + 1));
        }
    }
    for (Index t = 0; t < len; ++t) {
        double s = 0.0;
        for (Index g = 0; g < groups; ++g) s += base(t, g);
        r.y[t] = s / static_cast<double>(groups);
    }
    out.true_weights = Vector::Constant(groups, 1.0 / static_cast<double>(groups));

    if (spec.noise_scale > 0.0) {
        Engine noise_rng = make_engine(spec.seed, Stream::ToyNoise);
        std::normal_distribution<double> noise(0.0, spec.noise_scale);
        for (Index j = 0; j < n; ++j) {
            for (Index t = 0; t < len; ++t) r.X(t, j) += noise(noise_rng);
        }
        for (Index t = 0; t < len; ++t) r.y[t] += noise(noise_rng);
    }

    const auto days = business_days(parse_date("2010-01-04"), static_cast<std::size_t>(len + 1));
    r.dates.assign(days.begin() + 1, days.end());
    r.validate();
    return out;
}

void MarketSpec::validate() const {
    if (n_assets < 1 || n_groups < 1 || n_groups > n_assets) throw Error("market: need 1 <= n_groups <= n_assets");
    if (n_days < 2) throw Error("market: n_days must be >= 2");
    if (market_vol < 0 || sector_vol < 0 || idio_vol < 0) throw Error("market: volatilities must be >= 0");
    if (!(start_price_min > 0) || start_price_max < start_price_min) throw Error("market: bad start price range");
}

SyntheticMarket generate_market(const MarketSpec& spec) {
    spec.validate();
    const Index n = spec.n_assets;
    const Index days = spec.n_days;
    Engine rng = make_engine(spec.seed, Stream::Market);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SyntheticMarket out;
    std::vector<double> beta_m(n), beta_s(n), idio(n), shares(n);
    Vector p0(n);
    for (Index i = 0; i < n; ++i) {
        out.group_labels.push_back(static_cast<int>(i * spec.n_groups / n));
        beta_m[i] = 0.8 + 0.4 * unit(rng);
        beta_s[i] = 0.5 + 1.0 * unit(rng);
        idio[i] = spec.idio_vol * (0.7 + 0.6 * unit(rng));
        p0[i] = spec.start_price_min + (spec.start_price_max - spec.start_price_min) * unit(rng);
        const double cap0 = std::exp(std::log(1e10) + normal(rng));
        shares[i] = cap0 / p0[i];
    }

    auto& panel = out.panel;
    panel.dates = business_days(parse_date(spec.start_date), static_cast<std::size_t>(days));
    for (Index i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "S%02d_%03d", out.group_labels[i] + 1, static_cast<int>(i + 1));
        panel.tickers.emplace_back(buf);
    }
    panel.prices.resize(days, n);
    panel.market_caps = Matrix(days, n);
    panel.prices.row(0) = p0.transpose();

    std::vector<double> sector(static_cast<std::size_t>(spec.n_groups));
    for (Index t = 1; t < days; ++t) {
        const double m = 0.0002 + spec.market_vol * normal(rng);
        for (auto& s : sector) s = spec.sector_vol * normal(rng);
        for (Index i = 0; i < n; ++i) {
            const double r = beta_m[i] * m + beta_s[i] * sector[static_cast<std::size_t>(out.group_labels[i])] +
                             idio[i] * normal(rng);
            panel.prices(t, i) = panel.prices(t - 1, i) * std::exp(r);
        }
    }
    for (Index i = 0; i < n; ++i) panel.market_caps->col(i) = panel.prices.col(i) * shares[i];

    out.benchmark.dates = panel.dates;
    out.benchmark.tickers = {"INDEX"};
    const Vector caps_total = panel.market_caps->rowwise().sum();
    out.benchmark.prices = caps_total * (1000.0 / caps_total[0]);
    panel.validate();
    out.benchmark.validate();
    return out;
}

}  // namespace itrack
