// Serial reference vs OpenMP kernels on tracking-sized problems
// (D = 750 return periods, N assets).

#include "itrack/kernels.hpp"
#include "itrack/qp.hpp"
#include "itrack/rng.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace itrack;

Matrix returns(Index d, Index n) {
    Engine rng = make_engine(42, Stream::Instance);
    std::normal_distribution<double> nd(0.0, 0.01);
    Matrix X(d, n);
    for (auto& v : X.reshaped()) v = nd(rng);
    return X;
}

template <Matrix (*F)(const Matrix&)>
void gram(benchmark::State& state) {
    const Matrix X = returns(750, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(F(X));
}

template <Vector (*F)(const Matrix&, const Vector&)>
void tmul(benchmark::State& state) {
    const Matrix X = returns(750, state.range(0));
    const Vector r = X.col(0);
    for (auto _ : state) benchmark::DoNotOptimize(F(X, r));
}

template <Vector (*F)(const Matrix&, const Vector&)>
void symv(benchmark::State& state) {
    const Matrix P = kernels::serial::gram(returns(750, state.range(0)));
    const Vector w = Vector::Constant(state.range(0), 1.0 / static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(F(P, w));
}

void qp_solve(benchmark::State& state) {
    const Matrix X = returns(750, state.range(0));
    const Vector y = X.rowwise().mean();
    const auto problem = qp::build_problem(X, y);
    for (auto _ : state) benchmark::DoNotOptimize(qp::solve(problem));
}

}  // namespace

BENCHMARK(gram<kernels::serial::gram>)->Name("gram/serial")->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(gram<kernels::parallel::gram>)->Name("gram/parallel")->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(tmul<kernels::serial::tmul>)->Name("tmul/serial")->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(tmul<kernels::parallel::tmul>)->Name("tmul/parallel")->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(symv<kernels::serial::symv>)->Name("symv/serial")->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(symv<kernels::parallel::symv>)->Name("symv/parallel")->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(qp_solve)->Name("qp_solve")->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
