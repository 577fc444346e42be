#include "itrack/plot.hpp"
#include "itrack/portfolio.hpp"
#include "itrack/strategy.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace itrack {
namespace {

ReturnsMatrix small(std::uint64_t seed) {
    return test::make_returns(test::random_matrix(30, 5, seed, 0.01), test::random_vector(30, seed + 1, 0.01));
}

TEST(Portfolio, MakeComputesMseAndTickers) {
    const ReturnsMatrix data = small(1);
    const Vector w = (Vector(2) << 0.25, 0.75).finished();
    const FittedPortfolio p = make_portfolio("x", data, {1, 3}, w, 2);
    EXPECT_EQ(p.tickers, (std::vector<std::string>{"T1", "T3"}));
    const Vector r = data.X.col(1) * 0.25 + data.X.col(3) * 0.75 - data.y;
    EXPECT_NEAR(p.in_sample_mse, r.squaredNorm() / 30.0, 1e-18);
    const Vector d = p.dense(5);
    EXPECT_EQ(d, (Vector(5) << 0, 0.25, 0, 0.75, 0).finished());
}

TEST(Portfolio, CheckCatchesViolations) {
    const ReturnsMatrix data = small(2);
    EXPECT_NO_THROW(make_portfolio("x", data, {0, 1}, Vector::Constant(2, 0.5), 2).check());
    EXPECT_THROW(make_portfolio("x", data, {0, 1}, (Vector(2) << 1.2, -0.2).finished(), 2).check(), Error);
    EXPECT_THROW(make_portfolio("x", data, {0, 1}, Vector::Constant(2, 0.4), 2).check(), Error);
    EXPECT_THROW(make_portfolio("x", data, {0, 1, 2}, Vector::Constant(3, 1.0 / 3), 2).check(), Error);
    FittedPortfolio dup = make_portfolio("x", data, {0, 1}, Vector::Constant(2, 0.5), 2);
    dup.asset_ids = {1, 1};
    EXPECT_THROW(dup.check(), Error);
}

TEST(Portfolio, JsonRoundTripIsExact) {
    const ReturnsMatrix data = small(3);
    FittedPortfolio p = make_portfolio("ours", data, {4, 0}, (Vector(2) << 1.0 / 3.0, 2.0 / 3.0).finished(), 3);
    p.seed = 99;
    p.config = {{"iters", 10}};
    const FittedPortfolio back = portfolio_from_json(nlohmann::json::parse(to_json(p).dump()));
    EXPECT_EQ(back.asset_ids, p.asset_ids);
    EXPECT_EQ(back.tickers, p.tickers);
    EXPECT_EQ(back.weights, p.weights);
    EXPECT_EQ(back.in_sample_mse, p.in_sample_mse);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.config, p.config);
    nlohmann::json bad = to_json(p);
    bad["k_effective"] = 7;
    EXPECT_THROW(portfolio_from_json(bad), Error);
}

TEST(Strategy, NamesRoundTrip) {
    for (Method m : {Method::Ours, Method::Forward, Method::Backward, Method::LargestCap, Method::FullQp})
        EXPECT_EQ(method_from_string(to_string(m)), m);
    EXPECT_FALSE(method_from_string("oracle").has_value());
}

TEST(Strategy, LargestCapNeedsCaps) {
    EXPECT_THROW(fit_with(Method::LargestCap, small(4), 2, nullptr, {}), Error);
    const Vector caps = (Vector(5) << 1, 9, 3, 8, 2).finished();
    const FittedPortfolio p = fit_with(Method::LargestCap, small(4), 2, &caps, {});
    EXPECT_EQ(std::set<Index>(p.asset_ids.begin(), p.asset_ids.end()), (std::set<Index>{1, 3}));
}

TEST(Strategy, FullQpIgnoresK) {
    const FittedPortfolio p = fit_with(Method::FullQp, small(5), 1, nullptr, {});
    EXPECT_NO_THROW(p.check());
    EXPECT_EQ(p.method, "qp");
}

TEST(Plot, LineChartIsDeterministicAndWellFormed) {
    const plot::Series s{"tracker & co", {0, 1, 2, 3}, {1.0, 1.1, std::nan(""), 1.3}};
    const plot::Band b{"band", {0, 1, 2, 3}, {0.9, 1.0, 1.0, 1.1}, {1.1, 1.2, 1.3, 1.4}};
    const plot::Axes axes{"Equity <curve>", "day", "value", {{0.0, "2015"}, {3.0, "2016"}}};
    const std::string svg = plot::line_chart(axes, {s}, b);
    EXPECT_EQ(svg, plot::line_chart(axes, {s}, b));
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("&lt;curve&gt;"), std::string::npos);
    EXPECT_NE(svg.find("tracker &amp; co"), std::string::npos);
    EXPECT_NE(svg.find("<polygon"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Plot, RejectsMismatchedSeries) {
    EXPECT_THROW(plot::line_chart({}, {plot::Series{"a", {0, 1}, {1}}}), Error);
    EXPECT_THROW(plot::bar_chart({}, {1, 2}, {0}), Error);
}

TEST(Plot, BarChartSkipsZerosAndStacks) {
    const std::string svg = plot::bar_chart({"alloc", "asset", "weight", {}}, {0.5, 0.0, 0.5}, {0, 1, 2});
    std::size_t bars = 0;
    for (std::size_t pos = 0; (pos = svg.find("<rect x=", pos)) != std::string::npos; ++pos) ++bars;
    EXPECT_EQ(bars, 3u);  // plot frame plus two non-zero bars
    const std::string both = plot::stack({svg, svg});
    EXPECT_NE(both.find("height=\"720.00\""), std::string::npos);
}

TEST(Plot, FlatSeriesStillRenders) {
    const std::string svg = plot::line_chart({}, {plot::Series{"flat", {0, 1}, {5, 5}}});
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(svg.find("inf"), std::string::npos);
}

}  // namespace
}  // namespace itrack
