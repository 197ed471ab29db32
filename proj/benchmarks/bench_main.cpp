#include <benchmark/benchmark.h>

#include <vector>

#include "dyadic/corpus.hpp"
#include "dyadic/grid.hpp"
#include "dyadic/haar.hpp"
#include "dyadic/maximal.hpp"
#include "dyadic/product.hpp"
#include "dyadic/rng.hpp"

namespace {

using namespace dyadic;

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> f(n);
    for (double& v : f) v = rng.normal();
    return f;
}

void bm_build_grid(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorpusData c = make_corpus("binary-lattice", n, 1);
    const auto [kmin, kmax] = auto_k_range(c.space, c.delta);
    for (auto _ : state) {
        DyadicGrid g = build_grid(c.space, c.mu, c.delta, kmin, kmax, 7, 0);
        benchmark::DoNotOptimize(g.cube_count());
    }
}
BENCHMARK(bm_build_grid)->Arg(64)->Arg(256)->Arg(1024);

void bm_haar_analyze(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorpusData c = make_corpus("binary-lattice", n, 1);
    const auto [kmin, kmax] = auto_k_range(c.space, c.delta);
    const DyadicGrid g = build_grid(c.space, c.mu, c.delta, kmin, kmax, 7, 0);
    const HaarBasis basis = build_basis(g, c.mu);
    const auto f = random_signal(n, 2);
    for (auto _ : state) {
        HaarCoefficients coeffs = analyze(basis, c.mu, f);
        benchmark::DoNotOptimize(coeffs.mean);
    }
}
BENCHMARK(bm_haar_analyze)->Arg(256)->Arg(1024);

void bm_hl_maximal(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorpusData c = make_corpus("binary-lattice", n, 1);
    const BallIndex bi = build_ball_index(c.space);
    const auto f = random_signal(n, 3);
    for (auto _ : state) {
        auto m = hl_maximal(c.space, c.mu, f, bi);
        benchmark::DoNotOptimize(m.data());
    }
}
BENCHMARK(bm_hl_maximal)->Arg(64)->Arg(256);

void bm_dyadic_maximal(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorpusData c = make_corpus("binary-lattice", n, 1);
    const auto [kmin, kmax] = auto_k_range(c.space, c.delta);
    const DyadicGrid g = build_grid(c.space, c.mu, c.delta, kmin, kmax, 7, 0);
    const auto f = random_signal(n, 3);
    for (auto _ : state) {
        auto m = dyadic_maximal(g, c.mu, f);
        benchmark::DoNotOptimize(m.data());
    }
}
BENCHMARK(bm_dyadic_maximal)->Arg(64)->Arg(256)->Arg(1024);

void bm_square_function(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorpusData c1 = make_corpus("binary-lattice", n, 1);
    const CorpusData c2 = make_corpus("binary-lattice", n, 2);
    const auto [a1, z1] = auto_k_range(c1.space, c1.delta);
    const auto [a2, z2] = auto_k_range(c2.space, c2.delta);
    const DyadicGrid g1 = build_grid(c1.space, c1.mu, c1.delta, a1, z1, 7, 0);
    const DyadicGrid g2 = build_grid(c2.space, c2.mu, c2.delta, a2, z2, 8, 0);
    const ProductGrid pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);
    const auto f = random_signal(n * n, 4);
    const CoefficientTensor t = cancellative_part(pg, product_analyze(pg, f));
    for (auto _ : state) {
        auto s = square_function(pg, t);
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(bm_square_function)->Arg(8)->Arg(16);

void bm_atomic_decompose(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CorpusData c1 = make_corpus("binary-lattice", n, 1);
    const CorpusData c2 = make_corpus("binary-lattice", n, 2);
    const auto [a1, z1] = auto_k_range(c1.space, c1.delta);
    const auto [a2, z2] = auto_k_range(c2.space, c2.delta);
    const DyadicGrid g1 = build_grid(c1.space, c1.mu, c1.delta, a1, z1, 7, 0);
    const DyadicGrid g2 = build_grid(c2.space, c2.mu, c2.delta, a2, z2, 8, 0);
    const ProductGrid pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);
    const auto f = random_signal(n * n, 5);
    for (auto _ : state) {
        AtomicDecomposition d = atomic_decompose(pg, f);
        benchmark::DoNotOptimize(d.sum_lambda);
    }
}
BENCHMARK(bm_atomic_decompose)->Arg(8)->Arg(16);

} // namespace

BENCHMARK_MAIN();
