#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyadic/space.hpp"

namespace dyadic {

// A named example space. Every model is deterministic in (n, seed).
struct CorpusData {
    FinitePointSpace space;
    PointMassMeasure mu;
    std::size_t distinguished = 0; // center worth pinning when building grids
    double delta = 0.5;            // natural scale base for this geometry
    std::string note;
};

// Models:
//   binary-lattice   n = 2^m points j/n on the line
//   triadic          points j/3^m plus the midpoint 1/2 (the appended point
//                    sits at the middle of every middle third, so pinning it
//                    as a center reproduces the nested middle-third cubes)
//   perturbed-grid2d jittered g x g grid, g = floor(sqrt(n))
//   random-tree      ultrametric from a recursive random split of [0, n)
//   isolated-point   uniform lattice plus one far-away point
CorpusData make_corpus(const std::string& model, std::size_t n, std::uint64_t seed);

// Canonical center indices of the binary lattice, one list per level
// k = 0..log2(n): the multiples of 2^(m-k). Feeding these to build_grid
// reproduces the classical dyadic intervals.
std::vector<std::vector<std::size_t>> binary_lattice_centers(std::size_t n);

} // namespace dyadic
