#include "itrack/io.hpp"
#include "itrack/market_data.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

namespace itrack {
namespace {

std::filesystem::path write_csv(const std::string& name, const std::string& text) {
    const auto dir = test::scratch_dir("md_" + name);
    const auto path = dir / (name + ".csv");
    io::write_file_atomic(path, text);
    return path;
}

void expect_error_containing(const std::function<void()>& f, const std::string& needle) {
    try {
        f();
        ADD_FAILURE() << "expected an error containing '" << needle << "'";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

PricePanel one_column(std::vector<double> prices) {
    PricePanel p;
    p.dates = business_days(parse_date("2020-01-01"), prices.size());
    p.tickers = {"A"};
    p.prices = Eigen::Map<Matrix>(prices.data(), static_cast<Index>(prices.size()), 1);
    return p;
}

TEST(LoadPrices, ConstantPanel) {
    const auto path = write_csv("const",
                                "date,ticker,adj_close\n"
                                "2020-01-02,A,10\n2020-01-02,B,20\n"
                                "2020-01-03,A,10\n2020-01-03,B,20\n"
                                "2020-01-06,A,10\n2020-01-06,B,20\n");
    const PricePanel p = load_prices(path);
    EXPECT_EQ(p.num_dates(), 3);
    ASSERT_EQ(p.tickers, (std::vector<std::string>{"A", "B"}));
    EXPECT_TRUE((p.prices.col(0).array() == 10.0).all());
    EXPECT_TRUE((p.prices.col(1).array() == 20.0).all());
    EXPECT_FALSE(p.market_caps.has_value());
}

TEST(LoadPrices, RejectsZeroPrice) {
    const auto path = write_csv("zero", "date,ticker,adj_close\n2020-01-02,A,10\n2020-01-03,A,0\n");
    expect_error_containing([&] { load_prices(path); }, "non-positive price");
    expect_error_containing([&] { load_prices(path); }, ":3:");
}

TEST(LoadPrices, RejectsUnsortedDates) {
    const auto path = write_csv("unsorted", "date,ticker,adj_close\n2020-01-03,A,10\n2020-01-02,A,11\n");
    expect_error_containing([&] { load_prices(path); }, "unsorted dates");
}

TEST(LoadPrices, RejectsDuplicateRows) {
    const auto path = write_csv("dup", "date,ticker,adj_close\n2020-01-02,A,10\n2020-01-02,A,11\n");
    expect_error_containing([&] { load_prices(path); }, "duplicate");
}

TEST(LoadPrices, RejectsBadHeader) {
    const auto path = write_csv("hdr", "day,ticker,price\n2020-01-02,A,10\n");
    EXPECT_THROW(load_prices(path), Error);
}

TEST(LoadPrices, MissingCellsBecomeNaN) {
    const auto path = write_csv("gap",
                                "date,ticker,adj_close\n2020-01-02,A,10\n2020-01-02,B,5\n2020-01-03,A,11\n");
    const PricePanel p = load_prices(path);
    EXPECT_TRUE(std::isnan(p.prices(1, 1)));
    EXPECT_FALSE(p.complete(1, 0, 1));
    EXPECT_TRUE(p.complete(0, 0, 1));
}

TEST(LoadPrices, WriteThenLoadIsIdentity) {
    MarketSpec spec;
    spec.n_assets = 6;
    spec.n_groups = 2;
    spec.n_days = 40;
    spec.seed = 3;
    SyntheticMarket m = generate_market(spec);
    m.panel.prices(5, 2) = std::nan("");  // a gap must survive too
    (*m.panel.market_caps)(5, 2) = std::nan("");
    const auto dir = test::scratch_dir("roundtrip");
    write_prices(dir / "p.csv", m.panel);
    write_benchmark(dir / "b.csv", m.benchmark);
    const PricePanel p = load_prices(dir / "p.csv");
    const PricePanel b = load_benchmark(dir / "b.csv");
    EXPECT_EQ(p.dates, m.panel.dates);
    EXPECT_EQ(p.tickers, m.panel.tickers);
    for (Index t = 0; t < p.num_dates(); ++t)
        for (Index j = 0; j < p.num_assets(); ++j) {
            const double a = p.prices(t, j), e = m.panel.prices(t, j);
            if (std::isnan(e)) {
                EXPECT_TRUE(std::isnan(a));
            } else {
                EXPECT_EQ(a, e);
                EXPECT_EQ((*p.market_caps)(t, j), (*m.panel.market_caps)(t, j));
            }
        }
    EXPECT_EQ(b.prices, m.benchmark.prices);
    // Rewriting the loaded panel gives identical bytes.
    write_prices(dir / "p2.csv", p);
    EXPECT_EQ(io::read_file(dir / "p.csv"), io::read_file(dir / "p2.csv"));
}

TEST(LogReturns, PowersOfE) {
    const auto r = compute_log_returns(one_column({1.0, std::numbers::e, std::exp(2.0)}),
                                       one_column({1.0, 1.0, 1.0}));
    ASSERT_EQ(r.num_periods(), 2);
    EXPECT_NEAR(r.X(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(r.X(1, 0), 1.0, 1e-15);
    EXPECT_EQ(r.y, Vector::Zero(2));
}

TEST(LogReturns, ConstantAndSingleStep) {
    EXPECT_EQ(compute_log_returns(one_column({10, 10, 10}), one_column({1, 1, 1})).X, Matrix::Zero(2, 1));
    const auto r = compute_log_returns(one_column({100, 110}), one_column({1, 1}));
    EXPECT_NEAR(r.X(0, 0), 0.09531017980432486, 1e-15);
}

TEST(LogReturns, DateAxisMismatch) {
    PricePanel b = one_column({1, 1, 1});
    b.dates = business_days(parse_date("2021-01-01"), 3);
    try {
        compute_log_returns(one_column({1, 2, 3}), b);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("date-axis mismatch"), std::string::npos);
    }
}

TEST(LogReturns, DropsIncompleteColumnsAndFailsWhenNoneLeft) {
    PricePanel p = one_column({1, 2, 3});
    p.tickers = {"A", "B"};
    p.prices.conservativeResize(3, 2);
    p.prices.col(1) << 4, std::nan(""), 5;
    const auto r = compute_log_returns(p, one_column({1, 1, 1}));
    EXPECT_EQ(r.tickers, std::vector<std::string>{"A"});

    PricePanel q = one_column({1, std::nan(""), 3});
    EXPECT_THROW(compute_log_returns(q, one_column({1, 1, 1})), Error);
}

TEST(LogReturns, CumulativeSumRecoversPriceRatios) {
    MarketSpec spec;
    spec.n_assets = 5;
    spec.n_groups = 1;
    spec.n_days = 300;
    const SyntheticMarket m = generate_market(spec);
    const ReturnsMatrix r = compute_log_returns(m.panel, m.benchmark);
    for (Index j = 0; j < r.num_assets(); ++j) {
        double acc = 0.0;
        for (Index t = 0; t < r.num_periods(); ++t) {
            acc += r.X(t, j);
            const double ratio = m.panel.prices(t + 1, j) / m.panel.prices(0, j);
            EXPECT_NEAR(std::exp(acc) / ratio, 1.0, 1e-12);
        }
    }
}

TEST(LogReturns, PricesFromReturnsInverts) {
    const ReturnsMatrix r = test::make_returns(test::random_matrix(50, 4, 9, 0.01), test::random_vector(50, 10, 0.01));
    const PricedReturns priced = prices_from_returns(r);
    const ReturnsMatrix back = compute_log_returns(priced.panel, priced.benchmark);
    EXPECT_LE((back.X - r.X).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((back.y - r.y).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(back.dates, r.dates);
}

TEST(Toy, DefaultShape) {
    ToySpec spec;
    spec.seed = 11;
    const ToyDataset toy = generate_toy(spec);
    EXPECT_EQ(toy.returns.num_periods(), 750);
    EXPECT_GE(toy.returns.num_assets(), 250);
    EXPECT_LE(toy.returns.num_assets(), 1000);
    ASSERT_EQ(toy.group_sizes.size(), 5u);
    int total = 0;
    for (int s : toy.group_sizes) {
        EXPECT_GE(s, 50);
        EXPECT_LE(s, 200);
        total += s;
    }
    EXPECT_EQ(total, toy.returns.num_assets());
    ASSERT_EQ(toy.group_labels.size(), static_cast<std::size_t>(total));
    EXPECT_EQ(std::set<int>(toy.group_labels.begin(), toy.group_labels.end()).size(), 5u);
    EXPECT_LE((toy.true_weights.array() - 0.2).abs().maxCoeff(), 1e-15);
}

TEST(Toy, SingleNoiselessGroupCopiesY) {
    ToySpec spec;
    spec.n_groups = 1;
    spec.dup_min = spec.dup_max = 1;
    spec.noise_scale = 0.0;
    const ToyDataset toy = generate_toy(spec);
    ASSERT_EQ(toy.returns.num_assets(), 1);
    EXPECT_EQ(toy.returns.X.col(0), toy.returns.y);
}

TEST(Toy, NoiselessGroupsAreIdenticalAndYIsTheirMean) {
    ToySpec spec;
    spec.noise_scale = 0.0;
    spec.dup_min = 2;
    spec.dup_max = 4;
    spec.series_length = 60;
    const ToyDataset toy = generate_toy(spec);
    std::vector<Index> rep(5, -1);
    for (Index j = 0; j < toy.returns.num_assets(); ++j) {
        const int g = toy.group_labels[static_cast<std::size_t>(j)];
        if (rep[static_cast<std::size_t>(g)] < 0) {
            rep[static_cast<std::size_t>(g)] = j;
        } else {
            EXPECT_EQ(toy.returns.X.col(j), toy.returns.X.col(rep[static_cast<std::size_t>(g)]));
        }
    }
    Vector mean = Vector::Zero(60);
    for (Index j : rep) mean += toy.returns.X.col(j);
    mean /= 5.0;
    EXPECT_LE((mean - toy.returns.y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Toy, SeedIsReproducible) {
    ToySpec spec;
    spec.seed = 5;
    const ToyDataset a = generate_toy(spec), b = generate_toy(spec);
    EXPECT_EQ(a.returns.X, b.returns.X);
    EXPECT_EQ(a.returns.y, b.returns.y);
    spec.seed = 6;
    EXPECT_NE(generate_toy(spec).returns.y, a.returns.y);
}

TEST(Toy, InvalidSpecs) {
    ToySpec spec;
    spec.n_groups = 0;
    EXPECT_THROW(generate_toy(spec), Error);
    spec = {};
    spec.dup_min = 0;
    EXPECT_THROW(generate_toy(spec), Error);
    spec = {};
    spec.noise_scale = -1.0;
    EXPECT_THROW(generate_toy(spec), Error);
}

TEST(Market, IndexIsCapWeightedAndCapsPositive) {
    MarketSpec spec;
    spec.n_assets = 20;
    spec.n_groups = 4;
    spec.n_days = 100;
    const SyntheticMarket m = generate_market(spec);
    m.panel.validate();
    EXPECT_EQ(m.panel.num_dates(), 100);
    EXPECT_EQ(m.benchmark.prices(0, 0), 1000.0);
    EXPECT_TRUE((m.panel.market_caps->array() > 0.0).all());
    // Index return equals the cap-weighted constituent return.
    for (Index t = 1; t < 100; ++t) {
        const auto& caps = *m.panel.market_caps;
        const double ret = caps.row(t).sum() / caps.row(t - 1).sum();
        EXPECT_NEAR(m.benchmark.prices(t, 0) / m.benchmark.prices(t - 1, 0), ret, 1e-12);
    }
}

}  // namespace
}  // namespace itrack
