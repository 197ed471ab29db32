#include "dyadic/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dyadic {

namespace {

// prefix sums of mass and |f|*mass along each center's distance order; ball
// j around c is a prefix, so every ball average is two array lookups
struct PrefixSums {
    std::vector<std::vector<double>> mass, integral;
};

PrefixSums prefix_sums(const BallIndex& bi, const PointMassMeasure& mu,
                       const std::vector<double>& f) {
    PrefixSums ps;
    const std::size_t n = bi.n;
    ps.mass.assign(n, {});
    ps.integral.assign(n, {});
    for (std::size_t c = 0; c < n; ++c) {
        ps.mass[c].assign(n + 1, 0.0);
        ps.integral[c].assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t y = bi.order[c][i];
            ps.mass[c][i + 1] = ps.mass[c][i] + mu.mass[y];
            ps.integral[c][i + 1] = ps.integral[c][i] + std::abs(f[y]) * mu.mass[y];
        }
    }
    return ps;
}

} // namespace

std::vector<double> hl_maximal(const FinitePointSpace& s, const PointMassMeasure& mu,
                               const std::vector<double>& f, const BallIndex& bi) {
    const std::size_t n = s.n;
    if (f.size() != n || mu.mass.size() != n) throw std::runtime_error("size mismatch");
    const auto ps = prefix_sums(bi, mu, f);
    std::vector<double> out(n, 0.0);
    std::vector<double> best_from(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        // best_from[pos] = best ball average among prefixes strictly longer
        // than pos; point at rank pos belongs exactly to those balls
        const auto& counts = bi.counts[c];
        std::fill(best_from.begin(), best_from.end(), 0.0);
        double run = 0.0;
        std::size_t bidx = counts.size();
        for (std::size_t pos = n; pos-- > 0;) {
            while (bidx > 0 && counts[bidx - 1] > pos) {
                const std::size_t cnt = counts[bidx - 1];
                if (ps.mass[c][cnt] > 0.0)
                    run = std::max(run, ps.integral[c][cnt] / ps.mass[c][cnt]);
                --bidx;
            }
            best_from[pos] = run;
        }
        for (std::size_t pos = 0; pos < n; ++pos) {
            const std::size_t y = bi.order[c][pos];
            out[y] = std::max(out[y], best_from[pos]);
        }
    }
    return out;
}

std::vector<double> dyadic_maximal(const DyadicGrid& g, const PointMassMeasure& mu,
                                   const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (const auto& lv : g.levels) {
        std::vector<double> avg(lv.cubes.size(), 0.0);
        for (std::size_t a = 0; a < lv.cubes.size(); ++a) {
            const auto& cube = lv.cubes[a];
            if (cube.mass <= 0.0) continue;
            double s = 0.0;
            for (std::size_t x : cube.members) s += std::abs(f[x]) * mu.mass[x];
            avg[a] = s / cube.mass;
        }
        for (std::size_t x = 0; x < n; ++x) out[x] = std::max(out[x], avg[lv.point_cube[x]]);
    }
    return out;
}

std::vector<double> strong_maximal(const FinitePointSpace& s1, const PointMassMeasure& mu1,
                                   const FinitePointSpace& s2, const PointMassMeasure& mu2,
                                   const std::vector<double>& f, const BallIndex& bi1,
                                   const BallIndex& bi2) {
    const std::size_t n1 = s1.n, n2 = s2.n;
    if (f.size() != n1 * n2) throw std::runtime_error("signal size mismatch");
    std::vector<double> out(n1 * n2, 0.0);
    // row-restricted sums for one ball in the first factor, then prefix sums
    // along each second-factor center give every product average
    std::vector<double> row(n2, 0.0);
    std::vector<double> pref(n2 + 1, 0.0), prefm(n2 + 1, 0.0);
    for (std::size_t c1 = 0; c1 < n1; ++c1) {
        for (std::size_t b1 = 0; b1 < bi1.counts[c1].size(); ++b1) {
            const std::size_t cnt1 = bi1.counts[c1][b1];
            std::fill(row.begin(), row.end(), 0.0);
            double mass1 = 0.0;
            for (std::size_t i = 0; i < cnt1; ++i) {
                const std::size_t x = bi1.order[c1][i];
                mass1 += mu1.mass[x];
                for (std::size_t y = 0; y < n2; ++y)
                    row[y] += std::abs(f[x * n2 + y]) * mu1.mass[x];
            }
            if (mass1 <= 0.0) continue;
            for (std::size_t c2 = 0; c2 < n2; ++c2) {
                for (std::size_t i = 0; i < n2; ++i) {
                    const std::size_t y = bi2.order[c2][i];
                    pref[i + 1] = pref[i] + row[y] * mu2.mass[y];
                    prefm[i + 1] = prefm[i] + mu2.mass[y];
                }
                for (std::size_t b2 = 0; b2 < bi2.counts[c2].size(); ++b2) {
                    const std::size_t cnt2 = bi2.counts[c2][b2];
                    const double m = mass1 * prefm[cnt2];
                    if (m <= 0.0) continue;
                    const double avg = pref[cnt2] / m;
                    for (std::size_t i = 0; i < cnt1; ++i) {
                        const std::size_t x = bi1.order[c1][i];
                        for (std::size_t j = 0; j < cnt2; ++j) {
                            const std::size_t y = bi2.order[c2][j];
                            auto& o = out[x * n2 + y];
                            o = std::max(o, avg);
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<double> dyadic_strong_maximal(const DyadicGrid& g1, const PointMassMeasure& mu1,
                                          const DyadicGrid& g2, const PointMassMeasure& mu2,
                                          const std::vector<double>& f) {
    const std::size_t n1 = g1.levels.front().point_cube.size();
    const std::size_t n2 = g2.levels.front().point_cube.size();
    if (f.size() != n1 * n2) throw std::runtime_error("signal size mismatch");
    std::vector<double> out(n1 * n2, 0.0);
    for (const auto& lv1 : g1.levels) {
        // integrals of |f| over (cube1, point2)
        std::vector<double> strip(lv1.cubes.size() * n2, 0.0);
        for (std::size_t a = 0; a < lv1.cubes.size(); ++a)
            for (std::size_t x : lv1.cubes[a].members)
                for (std::size_t y = 0; y < n2; ++y)
                    strip[a * n2 + y] += std::abs(f[x * n2 + y]) * mu1.mass[x];
        for (const auto& lv2 : g2.levels) {
            for (std::size_t a = 0; a < lv1.cubes.size(); ++a) {
                if (lv1.cubes[a].mass <= 0.0) continue;
                for (std::size_t b = 0; b < lv2.cubes.size(); ++b) {
                    const double m = lv1.cubes[a].mass * lv2.cubes[b].mass;
                    if (m <= 0.0) continue;
                    double integral = 0.0;
                    for (std::size_t y : lv2.cubes[b].members)
                        integral += strip[a * n2 + y] * mu2.mass[y];
                    const double avg = integral / m;
                    for (std::size_t x : lv1.cubes[a].members)
                        for (std::size_t y : lv2.cubes[b].members) {
                            auto& o = out[x * n2 + y];
                            o = std::max(o, avg);
                        }
                }
            }
        }
    }
    return out;
}

MaximalReport compare_maximal(const FinitePointSpace& s, const PointMassMeasure& mu,
                              const AdjacentSystems& sys, const SandwichReport& sand,
                              const std::vector<double>& f, const BallIndex& bi) {
    MaximalReport rep;
    const std::size_t n = s.n;
    const double slack = 1e-9;

    rep.c_dbl = measure_doubling_constant(s, mu).constant;
    const auto mf = hl_maximal(s, mu, f, bi);

    std::vector<std::vector<double>> md(sys.T);
    for (std::size_t t = 0; t < sys.T; ++t) md[t] = dyadic_maximal(sys.grids[t], mu, f);

    rep.cube_vs_ball_pass = true;
    for (std::size_t t = 0; t < sys.T; ++t) {
        const auto& g = sys.grids[t];
        double cstar;
        if (std::isfinite(g.c1) && g.c1 > 0.0)
            cstar = std::pow(rep.c_dbl, std::log2(g.C1 / g.c1) + 1.0);
        else
            cstar = std::numeric_limits<double>::infinity();
        rep.cstar.push_back(cstar);
        for (std::size_t x = 0; x < n; ++x) {
            const double bound = cstar * mf[x];
            if (md[t][x] > bound * (1.0 + slack)) rep.cube_vs_ball_pass = false;
            if (bound > 0.0)
                rep.worst_cube_vs_ball = std::max(rep.worst_cube_vs_ball, md[t][x] / bound);
        }
    }

    // per covered ball: avg_B |f| <= C_dbl^{1 + log2 C_ball} avg_Q |f|
    const auto ps = prefix_sums(bi, mu, f);
    rep.ball_vs_cube_pass = true;
    rep.balls_skipped = sand.failures.size();
    for (const auto& bs : sand.covered) {
        const std::size_t c = bs.center;
        // prefix length = number of points strictly inside radius
        const auto& ord = bi.order[c];
        std::size_t lo = 0, hi = n;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (s.d(c, ord[mid]) < bs.radius)
                lo = mid + 1;
            else
                hi = mid;
        }
        const double bmass = ps.mass[c][lo];
        if (bmass <= 0.0) continue;
        const double bavg = ps.integral[c][lo] / bmass;

        const auto& cube = cube_at(sys.grids[bs.t], bs.cube);
        if (cube.mass <= 0.0) continue;
        double qint = 0.0;
        for (std::size_t y : cube.members) qint += std::abs(f[y]) * mu.mass[y];
        const double qavg = qint / cube.mass;
        const double factor = std::pow(rep.c_dbl, 1.0 + std::log2(std::max(bs.C_ball, 1.0)));
        ++rep.balls_checked;
        if (bavg > factor * qavg * (1.0 + slack)) rep.ball_vs_cube_pass = false;
        if (factor * qavg > 0.0)
            rep.worst_ball_vs_cube = std::max(rep.worst_ball_vs_cube, bavg / (factor * qavg));
    }

    for (std::size_t x = 0; x < n; ++x) {
        double sum = 0.0;
        for (std::size_t t = 0; t < sys.T; ++t) sum += md[t][x];
        if (sum > 0.0)
            rep.empirical_sum_constant = std::max(rep.empirical_sum_constant, mf[x] / sum);
    }
    return rep;
}

} // namespace dyadic
