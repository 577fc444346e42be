#include "itrack/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace itrack::metrics {

Vector percentage_error(const Vector& tracker, const Vector& index) {
    if (tracker.size() != index.size()) throw Error("percentage_error: curves must share a date axis");
    Vector pe(tracker.size());
    for (Index t = 0; t < tracker.size(); ++t) {
        if (index[t] == 0.0) throw Error("percentage_error: zero index value");
        pe[t] = (tracker[t] - index[t]) / index[t];
    }
    return pe;
}

double volatility(const Vector& returns) {
    if (returns.size() < 2) throw Error("volatility: need at least two observations");
    // Welford's update.
    double mean = 0.0;
    double m2 = 0.0;
    for (Index i = 0; i < returns.size(); ++i) {
        const double x = returns[i];
        const double delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (x - mean);
    }
    return std::sqrt(std::max(0.0, m2) / static_cast<double>(returns.size() - 1));
}

std::optional<double> sharpe(const Vector& returns) {
    const double vol = volatility(returns);
    const double mean = returns.mean();
    // Rounding in a constant series leaves a residue far below this.
    if (vol <= 1e-14 * std::max(1.0, std::abs(mean))) return std::nullopt;
    return mean / vol;
}

double max_drawdown(const Vector& curve) {
    if (curve.size() == 0) throw Error("max_drawdown: empty curve");
    double peak = curve[0];
    double worst = 0.0;
    for (Index t = 0; t < curve.size(); ++t) {
        if (!(curve[t] > 0.0)) throw Error("max_drawdown: curve must be positive");
        peak = std::max(peak, curve[t]);
        worst = std::min(worst, (curve[t] - peak) / peak);
    }
    return worst;
}

Vector period_returns(const Vector& curve, std::span<const Index> marks) {
    if (marks.size() < 2) return Vector(0);
    Vector r(static_cast<Index>(marks.size() - 1));
    for (std::size_t i = 1; i < marks.size(); ++i) {
        const double a = curve[marks[i - 1]];
        const double b = curve[marks[i]];
        r[static_cast<Index>(i - 1)] = b / a - 1.0;
    }
    return r;
}

}  // namespace itrack::metrics
