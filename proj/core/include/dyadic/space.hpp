#pragma once

#include <cstddef>
#include <vector>

namespace dyadic {

// A finite quasi-metric space: n points, a symmetric distance matrix with zero
// diagonal, and the tight quasi-triangle constant A0 of that matrix. Coordinates
// are kept when the space came from point data, purely for serialization.
struct FinitePointSpace {
    std::size_t n = 0;
    std::vector<double> dist;                // row-major n*n
    std::vector<std::vector<double>> coords; // may be empty
    double A0 = 1.0;

    double d(std::size_t i, std::size_t j) const { return dist[i * n + j]; }
    double diameter() const;
    double min_positive_distance() const; // +inf when no two points are apart
};

struct PointMassMeasure {
    std::vector<double> mass;
    double total = 0.0;

    double of(const std::vector<std::size_t>& pts) const;
};

FinitePointSpace make_space_from_matrix(std::vector<double> dist, std::size_t n);
// exponent != 1 raises every distance to that power (a standard way to get
// genuine quasi-metrics out of metric point data)
FinitePointSpace make_space_euclidean(const std::vector<std::vector<double>>& coords,
                                      double exponent = 1.0);
FinitePointSpace make_space_max(const std::vector<std::vector<double>>& coords,
                                double exponent = 1.0);

PointMassMeasure unit_measure(std::size_t n);
PointMassMeasure make_measure(std::vector<double> mass);

// max over triples of d(x,y) / (d(x,z) + d(z,y)), clamped below at 1
double quasi_triangle_constant(const FinitePointSpace& s);

// open ball B(x, r) = { y : d(x, y) < r }, sorted indices
std::vector<std::size_t> ball(const FinitePointSpace& s, std::size_t center, double r);

// Every combinatorially distinct open ball, organized per center: order[c] is
// the point list sorted by distance from c (ties by index), and ball j around c
// is the first counts[c][j] entries of order[c], realized by radius radii[c][j].
struct BallIndex {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> order;
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::vector<double>> radii;
    std::vector<std::vector<std::size_t>> rank; // rank[c][x] = position of x in order[c]

    std::size_t ball_count() const;
};

BallIndex build_ball_index(const FinitePointSpace& s);

// Radii that probe every value of r in mu(B(x,2r))/mu(B(x,r)): breakpoints are
// the distances from x together with their halves; representatives are the
// midpoints of consecutive breakpoints, plus one radius past the largest.
std::vector<double> doubling_probe_radii(const FinitePointSpace& s, std::size_t x);

// Greedy upper bound for the geometric doubling constant: the largest maximal
// (r/2)-separated subset of any ball B(x, r), over every distinct ball.
std::size_t geometric_doubling_constant(const FinitePointSpace& s);

struct MeasureDoublingResult {
    double constant = 1.0; // sup over x, r of mu(B(x,2r)) / mu(B(x,r))
    bool finite = true;    // false when some ball is null while its double is not
    std::size_t center = 0;
    double radius = 0.0;   // witness for the sup
};

MeasureDoublingResult measure_doubling_constant(const FinitePointSpace& s,
                                                const PointMassMeasure& mu);

} // namespace dyadic
