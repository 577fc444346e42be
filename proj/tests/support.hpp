#pragma once

#include "itrack/date.hpp"
#include "itrack/market_data.hpp"
#include "itrack/rng.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace itrack::test {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
    Engine rng = make_engine(seed, 100);
    std::normal_distribution<double> nd(0.0, scale);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
    return m;
}

inline Vector random_vector(Index n, std::uint64_t seed, double scale = 1.0) {
    return random_matrix(n, 1, seed, scale).col(0);
}

inline Vector random_simplex(Index n, std::uint64_t seed) {
    Engine rng = make_engine(seed, 101);
    std::exponential_distribution<double> ed(1.0);
    Vector w(n);
    for (auto& v : w) v = ed(rng);
    return w / w.sum();
}

/// Wraps raw arrays in a ReturnsMatrix with placeholder dates and tickers.
inline ReturnsMatrix make_returns(Matrix X, Vector y) {
    ReturnsMatrix r;
    r.dates = business_days(parse_date("2015-01-01"), static_cast<std::size_t>(X.rows()));
    for (Index j = 0; j < X.cols(); ++j) r.tickers.push_back("T" + std::to_string(j));
    r.X = std::move(X);
    r.y = std::move(y);
    return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("itrack_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace itrack::test
