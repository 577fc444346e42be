#include "itrack/baselines.hpp"
#include "itrack/selector.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace itrack {
namespace {

using namespace baselines;

ReturnsMatrix random_data(std::uint64_t seed, Index d, Index n) {
    return test::make_returns(test::random_matrix(d, n, seed, 0.01), test::random_vector(d, seed + 1, 0.01));
}

std::set<Index> ids(const FittedPortfolio& p) { return {p.asset_ids.begin(), p.asset_ids.end()}; }

void expect_feasible(const FittedPortfolio& p, int k) {
    EXPECT_NO_THROW(p.check(1e-9));
    EXPECT_LE(p.k_effective(), k);
}

TEST(ForwardSelection, EachRoundTakesTheLargestRemainingWeight) {
    const ReturnsMatrix data = random_data(15, 60, 9);
    const auto full = qp::build_problem(data);
    std::vector<Index> remaining{0, 1, 2, 3, 4, 5, 6, 7, 8}, expected;
    for (int round = 0; round < 4; ++round) {
        const Vector w = qp::solve(qp::subproblem(full, remaining)).w;
        Index best = 0;
        for (Index i = 1; i < w.size(); ++i)
            if (w[i] > w[best]) best = i;
        expected.push_back(remaining[static_cast<std::size_t>(best)]);
        remaining.erase(remaining.begin() + best);
    }
    const FittedPortfolio p = forward_selection(data, 4);
    EXPECT_EQ(p.asset_ids, expected);
    expect_feasible(p, 4);
    EXPECT_EQ(p.method, "forward");
}

TEST(ForwardSelection, ToyWithDuplicatesStaysFeasible) {
    // Near-duplicates soak up a removed sibling's weight, so the greedy rule
    // tends to stay inside one group; only feasibility is guaranteed here.
    ToySpec spec;
    spec.dup_min = 5;
    spec.dup_max = 12;
    const ToyDataset toy = generate_toy(spec);
    expect_feasible(forward_selection(toy.returns, 5), 5);
}

TEST(ForwardSelection, AllAssetsEqualsPlainQp) {
    const ReturnsMatrix data = random_data(1, 50, 6);
    const FittedPortfolio p = forward_selection(data, 6);
    const auto sol = qp::solve(qp::build_problem(data));
    EXPECT_NEAR(p.in_sample_mse * 50.0, sol.objective, 1e-9 * (1.0 + sol.objective));
    EXPECT_LE((p.dense(6) - sol.w).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ForwardSelection, ExactColumnChosenAlone) {
    ReturnsMatrix data = random_data(2, 40, 7);
    data.y = data.X.col(4);
    const FittedPortfolio p = forward_selection(data, 1);
    ASSERT_EQ(p.asset_ids, std::vector<Index>{4});
    EXPECT_EQ(p.weights[0], 1.0);
}

TEST(BackwardSelection, AllAssetsEqualsPlainQp) {
    const ReturnsMatrix data = random_data(3, 50, 5);
    const FittedPortfolio p = backward_selection(data, 5);
    const auto sol = qp::solve(qp::build_problem(data));
    EXPECT_NEAR(p.in_sample_mse * 50.0, sol.objective, 1e-9 * (1.0 + sol.objective));
    EXPECT_EQ(p.k_effective(), 5);
}

TEST(BackwardSelection, OrthogonalNoiseColumnDroppedFirst) {
    const Index d = 40;
    Matrix X = test::random_matrix(d, 5, 4, 0.01);
    const Vector y = 0.3 * X.col(0) + 0.3 * X.col(1) + 0.2 * X.col(2) + 0.2 * X.col(4);
    // Column 3 becomes pure noise orthogonal to y and every other column.
    Matrix basis(d, 4);
    basis << X.col(0), X.col(1), X.col(2), X.col(4);
    const Eigen::HouseholderQR<Matrix> qr(basis);
    const Matrix Q = qr.householderQ() * Matrix::Identity(d, 4);
    Vector noise = test::random_vector(d, 5, 0.01);
    noise -= Q * (Q.transpose() * noise);
    X.col(3) = noise;
    const ReturnsMatrix data = test::make_returns(X, y);

    const auto sol = qp::solve(qp::build_problem(data));
    Index smallest;
    sol.w.minCoeff(&smallest);
    EXPECT_EQ(smallest, 3);
    const FittedPortfolio p = backward_selection(data, 4);
    EXPECT_EQ(ids(p), (std::set<Index>{0, 1, 2, 4}));
}

TEST(BackwardSelection, ToyWithinTwiceForward) {
    ToySpec spec;
    spec.dup_min = 5;
    spec.dup_max = 12;
    const ToyDataset toy = generate_toy(spec);
    const FittedPortfolio b = backward_selection(toy.returns, 5);
    const FittedPortfolio f = forward_selection(toy.returns, 5);
    expect_feasible(b, 5);
    EXPECT_LE(b.in_sample_mse, 2.0 * f.in_sample_mse);
}

TEST(Selection, Deterministic) {
    const ReturnsMatrix data = random_data(6, 60, 12);
    EXPECT_EQ(forward_selection(data, 3).weights, forward_selection(data, 3).weights);
    EXPECT_EQ(backward_selection(data, 3).weights, backward_selection(data, 3).weights);
}

TEST(Selection, RejectsBadK) {
    const ReturnsMatrix data = random_data(7, 20, 4);
    EXPECT_THROW(forward_selection(data, 0), Error);
    EXPECT_THROW(backward_selection(data, 5), Error);
    EXPECT_THROW(exhaustive_oracle(data, 5), Error);
}

TEST(LargestCap, Examples) {
    const ReturnsMatrix data = random_data(8, 30, 4);
    const Vector caps = (Vector(4) << 5, 3, 2, 1).finished();
    EXPECT_EQ(ids(largest_cap(data, caps, 2)), (std::set<Index>{0, 1}));
    const Vector swapped = (Vector(4) << 1, 2, 3, 5).finished();
    EXPECT_EQ(ids(largest_cap(data, swapped, 2)), (std::set<Index>{2, 3}));
    const FittedPortfolio one = largest_cap(data, swapped, 1);
    ASSERT_EQ(one.asset_ids, std::vector<Index>{3});
    EXPECT_EQ(one.weights[0], 1.0);
}

TEST(LargestCap, TiesByColumnOrderAndFullUniverse) {
    const ReturnsMatrix data = random_data(9, 30, 4);
    EXPECT_EQ(ids(largest_cap(data, Vector::Ones(4), 2)), (std::set<Index>{0, 1}));
    const auto sol = qp::solve(qp::build_problem(data));
    EXPECT_LE((largest_cap(data, Vector::Ones(4), 4).dense(4) - sol.w).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LargestCap, MissingCapThrows) {
    const ReturnsMatrix data = random_data(10, 30, 3);
    Vector caps = Vector::Ones(3);
    caps[1] = std::nan("");
    EXPECT_THROW(largest_cap(data, caps, 1), Error);
    EXPECT_THROW(largest_cap(data, Vector::Ones(2), 1), Error);
}

TEST(Oracle, SingleSubsetIsPlainQp) {
    const ReturnsMatrix data = random_data(11, 40, 3);
    const auto sol = qp::solve(qp::build_problem(data));
    EXPECT_NEAR(exhaustive_oracle(data, 3).in_sample_mse * 40.0, sol.objective, 1e-9 * (1.0 + sol.objective));
}

TEST(Oracle, MatchesIndependentEnumeration) {
    EXPECT_EQ(binomial(8, 2), 28.0);
    const ReturnsMatrix data = random_data(12, 100, 8);
    const auto full = qp::build_problem(data);
    double best = std::numeric_limits<double>::infinity();
    int solved = 0;
    for (Index a = 0; a < 8; ++a)
        for (Index b = a + 1; b < 8; ++b) {
            const std::vector<Index> cols{a, b};
            best = std::min(best, qp::solve(qp::subproblem(full, cols)).objective);
            ++solved;
        }
    EXPECT_EQ(solved, 28);
    const FittedPortfolio p = exhaustive_oracle(data, 2);
    EXPECT_NEAR(p.in_sample_mse * 100.0, best, 1e-10 * best);
    expect_feasible(p, 2);
}

TEST(Oracle, FindsPlantedPair) {
    ReturnsMatrix data = random_data(13, 100, 8);
    data.y = 0.3 * data.X.col(2) + 0.7 * data.X.col(5);
    const FittedPortfolio p = exhaustive_oracle(data, 2);
    EXPECT_EQ(ids(p), (std::set<Index>{2, 5}));
    EXPECT_LT(p.in_sample_mse, 1e-16);
}

TEST(Oracle, LowerBoundsEveryMethod) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ReturnsMatrix data = random_data(20 + seed, 80, 7);
        const double oracle = exhaustive_oracle(data, 3).in_sample_mse;
        const double slack = 1e-10 * oracle;
        EXPECT_LE(oracle, forward_selection(data, 3).in_sample_mse + slack);
        EXPECT_LE(oracle, backward_selection(data, 3).in_sample_mse + slack);
        EXPECT_LE(oracle, largest_cap(data, test::random_vector(7, seed).cwiseAbs(), 3).in_sample_mse + slack);
        selector::TrainConfig c;
        c.iters = 300;
        c.seed = seed;
        EXPECT_LE(oracle, selector::fit_portfolio(data, 3, c).in_sample_mse + slack);
    }
}

TEST(Oracle, CombinatorialGuard) {
    const ReturnsMatrix data = random_data(14, 10, 40);
    EXPECT_GT(binomial(40, 20), kMaxSubsets);
    EXPECT_THROW(exhaustive_oracle(data, 20), Error);
}

TEST(BaselineKindNames, RoundTrip) {
    for (auto k : {BaselineKind::Forward, BaselineKind::Backward, BaselineKind::LargestCap, BaselineKind::ExhaustiveOracle})
        EXPECT_EQ(baseline_from_string(to_string(k)), k);
    EXPECT_FALSE(baseline_from_string("random").has_value());
}

}  // namespace
}  // namespace itrack
