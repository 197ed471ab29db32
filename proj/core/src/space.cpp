#include "dyadic/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dyadic {

double FinitePointSpace::diameter() const {
    double m = 0.0;
    for (double v : dist) m = std::max(m, v);
    return m;
}

double FinitePointSpace::min_positive_distance() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : dist)
        if (v > 0.0) m = std::min(m, v);
    return m;
}

double PointMassMeasure::of(const std::vector<std::size_t>& pts) const {
    double s = 0.0;
    for (std::size_t p : pts) s += mass[p];
    return s;
}

static void validate_matrix(const std::vector<double>& dist, std::size_t n) {
    if (dist.size() != n * n) throw std::runtime_error("distance matrix size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i * n + i] != 0.0) throw std::runtime_error("distance matrix diagonal not zero");
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = dist[i * n + j], b = dist[j * n + i];
            if (!(a >= 0.0) || !(b >= 0.0)) throw std::runtime_error("negative or NaN distance");
            if (a != b) throw std::runtime_error("distance matrix not symmetric");
        }
    }
}

FinitePointSpace make_space_from_matrix(std::vector<double> dist, std::size_t n) {
    validate_matrix(dist, n);
    FinitePointSpace s;
    s.n = n;
    s.dist = std::move(dist);
    s.A0 = quasi_triangle_constant(s);
    return s;
}

static FinitePointSpace from_coords(const std::vector<std::vector<double>>& coords,
                                    double exponent, bool chebyshev) {
    const std::size_t n = coords.size();
    if (n == 0) throw std::runtime_error("empty point set");
    const std::size_t dim = coords[0].size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (coords[i].size() != dim) throw std::runtime_error("inconsistent coordinate dimension");
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.0;
            if (chebyshev) {
                for (std::size_t t = 0; t < dim; ++t)
                    v = std::max(v, std::abs(coords[i][t] - coords[j][t]));
            } else {
                for (std::size_t t = 0; t < dim; ++t) {
                    const double u = coords[i][t] - coords[j][t];
                    v += u * u;
                }
                v = std::sqrt(v);
            }
            if (exponent != 1.0) v = std::pow(v, exponent);
            dist[i * n + j] = dist[j * n + i] = v;
        }
    }
    FinitePointSpace s;
    s.n = n;
    s.dist = std::move(dist);
    s.coords = coords;
    s.A0 = quasi_triangle_constant(s);
    return s;
}

FinitePointSpace make_space_euclidean(const std::vector<std::vector<double>>& coords,
                                      double exponent) {
    return from_coords(coords, exponent, false);
}

FinitePointSpace make_space_max(const std::vector<std::vector<double>>& coords, double exponent) {
    return from_coords(coords, exponent, true);
}

PointMassMeasure unit_measure(std::size_t n) {
    PointMassMeasure m;
    m.mass.assign(n, 1.0);
    m.total = static_cast<double>(n);
    return m;
}

PointMassMeasure make_measure(std::vector<double> mass) {
    PointMassMeasure m;
    m.mass = std::move(mass);
    m.total = std::accumulate(m.mass.begin(), m.mass.end(), 0.0);
    for (double v : m.mass)
        if (!(v >= 0.0)) throw std::runtime_error("negative or NaN point mass");
    return m;
}

double quasi_triangle_constant(const FinitePointSpace& s) {
    const std::size_t n = s.n;
    double a0 = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dij = s.d(i, j);
            if (dij == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                const double den = s.d(i, k) + s.d(k, j);
                if (den > 0.0) a0 = std::max(a0, dij / den);
            }
        }
    }
    return a0;
}

std::vector<std::size_t> ball(const FinitePointSpace& s, std::size_t center, double r) {
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < s.n; ++y)
        if (s.d(center, y) < r) out.push_back(y);
    return out;
}

std::size_t BallIndex::ball_count() const {
    std::size_t c = 0;
    for (const auto& v : counts) c += v.size();
    return c;
}

BallIndex build_ball_index(const FinitePointSpace& s) {
    const std::size_t n = s.n;
    BallIndex bi;
    bi.n = n;
    bi.order.resize(n);
    bi.counts.resize(n);
    bi.radii.resize(n);
    bi.rank.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t c = 0; c < n; ++c) {
        auto& ord = bi.order[c];
        ord.resize(n);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
            const double da = s.d(c, a), db = s.d(c, b);
            if (da != db) return da < db;
            return a < b;
        });
        for (std::size_t pos = 0; pos < n; ++pos) bi.rank[c][ord[pos]] = pos;
        // one prefix per distinct distance value; the representative radius for
        // the prefix ending before distance value v is the midpoint of the gap
        // (or 1.5 * last distance past the end)
        std::size_t i = 0;
        while (i < n) {
            const double v = s.d(c, ord[i]);
            std::size_t j = i;
            while (j < n && s.d(c, ord[j]) == v) ++j;
            // prefix of size j covers all points with distance <= v
            const double next = (j < n) ? s.d(c, ord[j]) : v;
            const double rep = (j < n) ? 0.5 * (v + next) : (v > 0.0 ? 1.5 * v : 1.0);
            bi.counts[c].push_back(j);
            bi.radii[c].push_back(rep);
            i = j;
        }
    }
    return bi;
}

std::vector<double> doubling_probe_radii(const FinitePointSpace& s, std::size_t x) {
    std::vector<double> breaks;
    breaks.reserve(2 * s.n);
    for (std::size_t y = 0; y < s.n; ++y) {
        const double v = s.d(x, y);
        if (v > 0.0) {
            breaks.push_back(v);
            breaks.push_back(0.5 * v);
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<double> reps;
    if (breaks.empty()) return reps;
    reps.reserve(breaks.size() + 1);
    reps.push_back(0.5 * breaks.front());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        reps.push_back(0.5 * (breaks[i] + breaks[i + 1]));
    reps.push_back(1.5 * breaks.back());
    return reps;
}

std::size_t geometric_doubling_constant(const FinitePointSpace& s) {
    const BallIndex bi = build_ball_index(s);
    std::size_t best = 0;
    std::vector<std::size_t> picked;
    for (std::size_t c = 0; c < s.n; ++c) {
        for (std::size_t bidx = 0; bidx < bi.counts[c].size(); ++bidx) {
            const double r = bi.radii[c][bidx];
            const double sep = 0.5 * r;
            picked.clear();
            // greedy maximal (r/2)-separated subset, ascending index order
            const std::size_t cnt = bi.counts[c][bidx];
            for (std::size_t pos = 0; pos < cnt; ++pos) {
                const std::size_t y = bi.order[c][pos];
                bool ok = true;
                for (std::size_t z : picked) {
                    if (s.d(y, z) < sep) {
                        ok = false;
                        break;
                    }
                }
                if (ok) picked.push_back(y);
            }
            best = std::max(best, picked.size());
        }
    }
    return best;
}

MeasureDoublingResult measure_doubling_constant(const FinitePointSpace& s,
                                                const PointMassMeasure& mu) {
    MeasureDoublingResult res;
    const std::size_t n = s.n;
    for (std::size_t c = 0; c < n; ++c) {
        // points sorted by distance once, then each probe radius is two
        // prefix sums
        std::vector<std::size_t> ord(n);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::sort(ord.begin(), ord.end(),
                  [&](std::size_t a, std::size_t b) { return s.d(c, a) < s.d(c, b); });
        std::vector<double> dsorted(n), msum(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            dsorted[i] = s.d(c, ord[i]);
            msum[i + 1] = msum[i] + mu.mass[ord[i]];
        }
        auto mass_below = [&](double r) {
            const auto it = std::lower_bound(dsorted.begin(), dsorted.end(), r);
            return msum[static_cast<std::size_t>(it - dsorted.begin())];
        };
        for (double r : doubling_probe_radii(s, c)) {
            const double inner = mass_below(r);
            const double outer = mass_below(2.0 * r);
            if (inner <= 0.0) {
                if (outer > 0.0) res.finite = false;
                continue;
            }
            const double ratio = outer / inner;
            if (ratio > res.constant) {
                res.constant = ratio;
                res.center = c;
                res.radius = r;
            }
        }
    }
    return res;
}

} // namespace dyadic
