// Benchmarks the OpenMP kernels against their serial reference twins.
// Run with --benchmark_time_unit=ms; thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "fcov/reference.hpp"
#include "fcov/simulate.hpp"

namespace {

fcov::FunctionalSample make_sample(int n, int d, std::uint64_t seed)
{
    const fcov::Grid grid = fcov::Grid::uniform(d);
    const fcov::CovOperator sigma =
        fcov::random_covariance(fcov::DecaySpec{d, 2.0, 1.0}, grid, seed);
    return fcov::sample_gaussian(sigma, n, seed + 1);
}

fcov::CovOperator make_operator(int d, std::uint64_t seed)
{
    return fcov::random_covariance(fcov::DecaySpec{d, 2.0, 1.0}, fcov::Grid::uniform(d), seed);
}

void BM_EmpiricalCovarianceOmp(benchmark::State& state)
{
    const auto sample = make_sample(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 11);
    for (auto _ : state)
        benchmark::DoNotOptimize(fcov::empirical_covariance(sample, true));
}

void BM_EmpiricalCovarianceSerial(benchmark::State& state)
{
    const auto sample = make_sample(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 11);
    for (auto _ : state)
        benchmark::DoNotOptimize(fcov::reference::empirical_covariance(sample, true));
}

void BM_RademacherNormOmp(benchmark::State& state)
{
    const auto sample = make_sample(256, 32, 12);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            fcov::rademacher_norm_estimate(sample, 1.0, static_cast<int>(state.range(0)), 99));
}

void BM_RademacherNormSerial(benchmark::State& state)
{
    const auto sample = make_sample(256, 32, 12);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            fcov::reference::rademacher_norm_estimate(sample, 1.0, static_cast<int>(state.range(0)), 99));
}

void BM_SampleGaussianOmp(benchmark::State& state)
{
    const auto sigma = make_operator(static_cast<int>(state.range(1)), 13);
    for (auto _ : state)
        benchmark::DoNotOptimize(fcov::sample_gaussian(sigma, static_cast<int>(state.range(0)), 7));
}

void BM_SampleGaussianSerial(benchmark::State& state)
{
    const auto sigma = make_operator(static_cast<int>(state.range(1)), 13);
    for (auto _ : state)
        benchmark::DoNotOptimize(fcov::reference::sample_gaussian(sigma, static_cast<int>(state.range(0)), 7));
}

struct ResponsibilityFixture {
    fcov::OperatorSample data;
    std::vector<fcov::CovOperator> sigmas;
    Eigen::VectorXd norms;
    Eigen::VectorXd counts;

    static ResponsibilityFixture make(int n, int d, int k)
    {
        const fcov::Grid grid = fcov::Grid::uniform(d);
        std::vector<fcov::CovOperator> sigmas;
        for (int j = 0; j < k; ++j)
            sigmas.push_back(make_operator(d, 100 + static_cast<std::uint64_t>(j)));
        std::vector<fcov::CovOperator> ops;
        std::vector<int> ranks;
        for (int i = 0; i < n; ++i) {
            const auto curves = fcov::sample_gaussian(sigmas[static_cast<std::size_t>(i % k)], 4,
                                                      200 + static_cast<std::uint64_t>(i));
            ops.push_back(fcov::empirical_covariance(curves, false));
            ranks.push_back(4);
        }
        Eigen::VectorXd norms = Eigen::VectorXd::Constant(k, 0.05);
        Eigen::VectorXd counts = Eigen::VectorXd::Constant(k, static_cast<double>(n) / k);
        return {fcov::OperatorSample(grid, std::move(ops), std::move(ranks)), std::move(sigmas),
                std::move(norms), std::move(counts)};
    }
};

void BM_ResponsibilitiesOmp(benchmark::State& state)
{
    const auto fx = ResponsibilityFixture::make(static_cast<int>(state.range(0)), 16, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            fcov::responsibilities(fx.data, fx.sigmas, fx.norms, fx.counts, 1.0, 1.0));
}

void BM_ResponsibilitiesSerial(benchmark::State& state)
{
    const auto fx = ResponsibilityFixture::make(static_cast<int>(state.range(0)), 16, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            fcov::reference::responsibilities(fx.data, fx.sigmas, fx.norms, fx.counts, 1.0, 1.0));
}

} // namespace

BENCHMARK(BM_EmpiricalCovarianceOmp)->Args({4096, 64});
BENCHMARK(BM_EmpiricalCovarianceSerial)->Args({4096, 64});
BENCHMARK(BM_RademacherNormOmp)->Arg(64);
BENCHMARK(BM_RademacherNormSerial)->Arg(64);
BENCHMARK(BM_SampleGaussianOmp)->Args({8192, 64});
BENCHMARK(BM_SampleGaussianSerial)->Args({8192, 64});
BENCHMARK(BM_ResponsibilitiesOmp)->Arg(600);
BENCHMARK(BM_ResponsibilitiesSerial)->Arg(600);

BENCHMARK_MAIN();
