#include "dyadic/corpus.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "dyadic/rng.hpp"

namespace dyadic {

namespace {

CorpusData binary_lattice(std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("binary-lattice needs n a power of two, n >= 2");
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    for (std::size_t j = 0; j < n; ++j) pts.push_back({static_cast<double>(j) / static_cast<double>(n)});
    CorpusData out;
    out.space = make_space_euclidean(pts);
    out.mu = unit_measure(n);
    out.distinguished = 0;
    out.delta = 0.5;
    out.note = "binary lattice with " + std::to_string(n) + " points";
    return out;
}

CorpusData triadic(std::size_t n) {
    std::size_t count = 3;
    while (count * 3 <= n) count *= 3;
    std::vector<std::vector<double>> pts;
    pts.reserve(count + 1);
    for (std::size_t j = 0; j < count; ++j)
        pts.push_back({static_cast<double>(j) / static_cast<double>(count)});
    pts.push_back({0.5});
    CorpusData out;
    out.space = make_space_euclidean(pts);
    out.mu = unit_measure(count + 1);
    out.distinguished = count; // the midpoint, center of every middle third
    out.delta = 1.0 / 3.0;
    out.note = "triadic lattice with " + std::to_string(count) + " points plus the midpoint";
    return out;
}

CorpusData perturbed_grid2d(std::size_t n, std::uint64_t seed) {
    const auto g = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    if (g < 2) throw std::invalid_argument("perturbed-grid2d needs n >= 4");
    Rng rng(seed);
    std::vector<std::vector<double>> pts;
    pts.reserve(g * g);
    const double gd = static_cast<double>(g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            const double x = (static_cast<double>(i) + 0.4 * (rng.uniform() - 0.5)) / gd;
            const double y = (static_cast<double>(j) + 0.4 * (rng.uniform() - 0.5)) / gd;
            pts.push_back({x, y});
        }
    CorpusData out;
    out.space = make_space_euclidean(pts);
    out.mu = unit_measure(g * g);
    out.distinguished = 0;
    out.delta = 0.5;
    out.note = "perturbed " + std::to_string(g) + "x" + std::to_string(g) + " grid";
    return out;
}

CorpusData random_tree(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random-tree needs n >= 2");
    Rng rng(seed);
    std::vector<double> dist(n * n, 0.0);
    // Recursive random split: points crossing a split at depth d sit at
    // distance 2^-d. The result is an ultrametric, so A0 = 1.
    std::function<void(std::size_t, std::size_t, int)> split =
        [&](std::size_t lo, std::size_t hi, int depth) {
            if (hi - lo <= 1) return;
            const std::size_t cut = lo + 1 + rng.index(hi - lo - 1);
            const double d = std::ldexp(1.0, -std::min(depth, 1000));
            for (std::size_t i = lo; i < cut; ++i)
                for (std::size_t j = cut; j < hi; ++j)
                    dist[i * n + j] = dist[j * n + i] = d;
            split(lo, cut, depth + 1);
            split(cut, hi, depth + 1);
        };
    split(0, n, 0);
    CorpusData out;
    out.space = make_space_from_matrix(std::move(dist), n);
    out.mu = unit_measure(n);
    out.distinguished = 0;
    out.delta = 0.5;
    out.note = "random ultrametric tree with " + std::to_string(n) + " leaves";
    return out;
}

CorpusData isolated_point(std::size_t n) {
    if (n < 3) throw std::invalid_argument("isolated-point needs n >= 3");
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    for (std::size_t j = 0; j + 1 < n; ++j)
        pts.push_back({static_cast<double>(j) / static_cast<double>(n - 1)});
    pts.push_back({3.0}); // far from the lattice: its fine cubes are singletons
    CorpusData out;
    out.space = make_space_euclidean(pts);
    out.mu = unit_measure(n);
    out.distinguished = n - 1;
    out.delta = 0.5;
    out.note = "unit lattice with " + std::to_string(n - 1) + " points plus one remote point";
    return out;
}

} // namespace

CorpusData make_corpus(const std::string& model, std::size_t n, std::uint64_t seed) {
    if (model == "binary-lattice") return binary_lattice(n);
    if (model == "triadic") return triadic(n);
    if (model == "perturbed-grid2d") return perturbed_grid2d(n, seed);
    if (model == "random-tree") return random_tree(n, seed);
    if (model == "isolated-point") return isolated_point(n);
    throw std::invalid_argument("unknown corpus model '" + model + "'");
}

std::vector<std::vector<std::size_t>> binary_lattice_centers(std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("binary lattice centers need n a power of two");
    std::size_t m = 0;
    while ((std::size_t{1} << m) < n) ++m;
    std::vector<std::vector<std::size_t>> levels(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        const std::size_t step = std::size_t{1} << (m - k);
        for (std::size_t j = 0; j < n; j += step) levels[k].push_back(j);
    }
    return levels;
}

} // namespace dyadic
