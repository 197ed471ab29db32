#include "dyadic/haar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dyadic {

ChildOrdering order_children(const DyadicGrid& g, const PointMassMeasure& mu) {
    (void)mu; // masses already live on the cubes
    ChildOrdering ord;
    const std::size_t L = g.levels.size();
    if (L == 0) return ord;
    ord.order.resize(L - 1);
    for (std::size_t li = 0; li + 1 < L; ++li) {
        const auto& lv = g.levels[li];
        const auto& fine = g.levels[li + 1];
        ord.order[li].resize(lv.cubes.size());
        for (std::size_t a = 0; a < lv.cubes.size(); ++a) {
            auto perm = lv.cubes[a].children;
            std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) {
                const double mx = fine.cubes[x].mass, my = fine.cubes[y].mass;
                if (mx != my) return mx < my;
                return x < y;
            });
            ord.order[li][a] = std::move(perm);
        }
    }
    return ord;
}

bool check_tail_mass(const DyadicGrid& g, const PointMassMeasure& mu, const ChildOrdering& ord,
                     std::string* witness) {
    (void)mu;
    for (std::size_t li = 0; li + 1 < g.levels.size(); ++li) {
        const auto& fine = g.levels[li + 1];
        for (std::size_t a = 0; a < ord.order[li].size(); ++a) {
            const auto& perm = ord.order[li][a];
            const std::size_t m = perm.size();
            std::vector<double> tail(m + 1, 0.0);
            for (std::size_t j = m; j-- > 0;) tail[j] = fine.cubes[perm[j]].mass + tail[j + 1];
            const double total = tail[0]; // the cube mass, by the same summation
            const double dm = static_cast<double>(m);
            for (std::size_t u = 0; u < m; ++u) {
                const double lhs = dm * tail[u];
                const double rhs = static_cast<double>(m - u) * total;
                if (!(lhs >= rhs)) {
                    if (witness)
                        *witness = "level " + std::to_string(g.levels[li].k) + " alpha " +
                                   std::to_string(a) + " u " + std::to_string(u + 1);
                    return false;
                }
            }
        }
    }
    return true;
}

HaarBasis build_basis(const DyadicGrid& g, const PointMassMeasure& mu) {
    HaarBasis basis;
    basis.grid = &g;
    basis.ordering = order_children(g, mu);
    std::string witness;
    if (!check_tail_mass(g, mu, basis.ordering, &witness))
        throw std::runtime_error("child ordering lost the tail-mass property at " + witness);

    const auto& coarse = g.levels.front();
    for (std::size_t a = 0; a < coarse.cubes.size(); ++a) {
        HaarFunction h;
        h.level = coarse.k;
        h.alpha = a;
        h.u = 0;
        if (coarse.cubes[a].mass > 0.0) {
            const double v = 1.0 / std::sqrt(coarse.cubes[a].mass);
            h.a = v;
            h.piece_values.emplace_back(a, v);
            basis.funcs.push_back(std::move(h));
        } else {
            h.zero = true;
            basis.dropped_zero.push_back(std::move(h));
        }
    }
    basis.scaling_count = basis.funcs.size();

    for (std::size_t li = 0; li + 1 < g.levels.size(); ++li) {
        const auto& lv = g.levels[li];
        const auto& fine = g.levels[li + 1];
        for (std::size_t a = 0; a < lv.cubes.size(); ++a) {
            const auto& perm = basis.ordering.order[li][a];
            const std::size_t m = perm.size();
            if (m < 2) continue; // an only child spans nothing new
            std::vector<double> tail(m + 1, 0.0);
            for (std::size_t j = m; j-- > 0;) tail[j] = fine.cubes[perm[j]].mass + tail[j + 1];
            for (std::size_t u = 1; u < m; ++u) {
                HaarFunction h;
                h.level = lv.k;
                h.alpha = a;
                h.u = u;
                const double A = fine.cubes[perm[u - 1]].mass;
                const double B = tail[u];
                const double E = tail[u - 1];
                if (!(A > 0.0)) {
                    // ascending order puts the zero-mass children first; their
                    // functions vanish identically and stay out of the basis
                    h.zero = true;
                    basis.dropped_zero.push_back(std::move(h));
                    continue;
                }
                h.a = std::sqrt(B / (A * E));
                h.b = std::sqrt(A / (E * B));
                h.piece_values.emplace_back(perm[u - 1], h.a);
                for (std::size_t j = u; j < m; ++j) h.piece_values.emplace_back(perm[j], -h.b);
                basis.funcs.push_back(std::move(h));
            }
        }
    }
    for (std::size_t i = 0; i < basis.funcs.size(); ++i) {
        const auto& h = basis.funcs[i];
        basis.index[{h.level, h.alpha, h.u}] = i;
    }
    return basis;
}

std::vector<double> haar_values(const HaarBasis& basis, const HaarFunction& h) {
    const auto& g = *basis.grid;
    std::vector<double> v(g.levels.front().point_cube.size(), 0.0);
    const int child_level = h.u == 0 ? h.level : h.level + 1;
    const auto& lv = g.level(child_level);
    for (const auto& [alpha, val] : h.piece_values)
        for (std::size_t x : lv.cubes[alpha].members) v[x] = val;
    return v;
}

namespace {

// per-level integrals of f against the measure, finest first then rolled up
std::vector<std::vector<double>> cube_integrals(const DyadicGrid& g, const PointMassMeasure& mu,
                                                const std::vector<double>& f) {
    const std::size_t L = g.levels.size();
    std::vector<std::vector<double>> I(L);
    for (std::size_t li = 0; li < L; ++li) I[li].assign(g.levels[li].cubes.size(), 0.0);
    {
        const auto& lv = g.levels[L - 1];
        for (std::size_t a = 0; a < lv.cubes.size(); ++a)
            for (std::size_t x : lv.cubes[a].members) I[L - 1][a] += f[x] * mu.mass[x];
    }
    for (std::size_t li = L - 1; li-- > 0;) {
        const auto& lv = g.levels[li];
        for (std::size_t a = 0; a < lv.cubes.size(); ++a)
            for (std::size_t ca : lv.cubes[a].children) I[li][a] += I[li + 1][ca];
    }
    return I;
}

std::vector<double> expand(const HaarBasis& basis, const std::vector<double>& coeff, double mean,
                           bool scaling_mean_free) {
    const auto& g = *basis.grid;
    const std::size_t L = g.levels.size();
    const std::size_t n = g.levels.front().point_cube.size();
    std::vector<std::vector<double>> acc(L);
    for (std::size_t li = 0; li < L; ++li) acc[li].assign(g.levels[li].cubes.size(), 0.0);

    for (std::size_t i = 0; i < basis.funcs.size(); ++i) {
        const auto& h = basis.funcs[i];
        const double c = coeff[i];
        if (c == 0.0) continue;
        const std::size_t li = static_cast<std::size_t>(h.level - g.k_min) + (h.u == 0 ? 0 : 1);
        for (const auto& [alpha, val] : h.piece_values) acc[li][alpha] += c * val;
    }
    std::vector<double> out(n, scaling_mean_free ? mean : 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        double v = out[x];
        for (std::size_t li = 0; li < L; ++li) v += acc[li][g.levels[li].point_cube[x]];
        out[x] = v;
    }
    return out;
}

std::vector<double> coefficients_of(const HaarBasis& basis, const PointMassMeasure& mu,
                                    const std::vector<double>& f, double subtract_mean) {
    const auto& g = *basis.grid;
    const auto I = cube_integrals(g, mu, f);
    std::vector<double> coeff(basis.funcs.size(), 0.0);
    for (std::size_t i = 0; i < basis.funcs.size(); ++i) {
        const auto& h = basis.funcs[i];
        if (h.u == 0) {
            const auto& cube = g.levels.front().cubes[h.alpha];
            coeff[i] = (I[0][h.alpha] - subtract_mean * cube.mass) / std::sqrt(cube.mass);
        } else {
            const std::size_t li = static_cast<std::size_t>(h.level - g.k_min);
            // first piece is the u-th child, the rest are the tail
            const double lead = I[li + 1][h.piece_values.front().first];
            double tail = 0.0;
            for (std::size_t j = 1; j < h.piece_values.size(); ++j)
                tail += I[li + 1][h.piece_values[j].first];
            coeff[i] = h.a * lead - h.b * tail;
        }
    }
    return coeff;
}

} // namespace

HaarCoefficients analyze(const HaarBasis& basis, const PointMassMeasure& mu,
                         const std::vector<double>& f) {
    HaarCoefficients out;
    double integral = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) integral += f[x] * mu.mass[x];
    out.mean = mu.total > 0.0 ? integral / mu.total : 0.0;
    out.coeff = coefficients_of(basis, mu, f, out.mean);
    return out;
}

std::vector<double> synthesize(const HaarBasis& basis, const HaarCoefficients& c) {
    return expand(basis, c.coeff, c.mean, true);
}

std::vector<double> full_analyze(const HaarBasis& basis, const PointMassMeasure& mu,
                                 const std::vector<double>& f) {
    return coefficients_of(basis, mu, f, 0.0);
}

std::vector<double> full_synthesize(const HaarBasis& basis, const std::vector<double>& coeff) {
    return expand(basis, coeff, 0.0, false);
}

std::vector<double> conditional_expectation(const DyadicGrid& g, const PointMassMeasure& mu,
                                            const std::vector<double>& f, int k) {
    const auto& lv = g.level(k);
    std::vector<double> avg(lv.cubes.size(), 0.0);
    for (std::size_t a = 0; a < lv.cubes.size(); ++a) {
        const auto& cube = lv.cubes[a];
        if (cube.mass <= 0.0) continue;
        double s = 0.0;
        for (std::size_t x : cube.members) s += f[x] * mu.mass[x];
        avg[a] = s / cube.mass;
    }
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t x = 0; x < f.size(); ++x) out[x] = avg[lv.point_cube[x]];
    return out;
}

std::vector<double> martingale_difference(const DyadicGrid& g, const PointMassMeasure& mu,
                                          const std::vector<double>& f, int k) {
    if (k >= g.k_max) throw std::runtime_error("martingale difference needs a finer level");
    auto fine = conditional_expectation(g, mu, f, k + 1);
    const auto coarse = conditional_expectation(g, mu, f, k);
    for (std::size_t x = 0; x < fine.size(); ++x) fine[x] -= coarse[x];
    return fine;
}

ValidateBasisResult validate_basis(const HaarBasis& basis, const PointMassMeasure& mu,
                                   bool with_gram, double tol_cancel, double tol_norm) {
    ValidateBasisResult res;
    const auto& g = *basis.grid;
    const std::size_t n = mu.mass.size();
    const double M = static_cast<double>(g.M);
    const double slack = 1e-12;

    auto make_stats = [&](double p, double lo, double hi) {
        NormRatioStats st;
        st.p = p;
        st.lo = lo;
        st.hi = hi;
        st.min_seen = std::numeric_limits<double>::infinity();
        st.max_seen = -std::numeric_limits<double>::infinity();
        st.pass = true;
        return st;
    };
    res.ratios.push_back(make_stats(1.0, 2.0 / std::sqrt(M), 2.0));
    res.ratios.push_back(make_stats(2.0, 1.0, 1.0));
    res.ratios.push_back(make_stats(4.0, 1.0 / std::sqrt(M), std::pow(2.0, 0.25)));
    res.ratios.push_back(make_stats(0.0, 1.0 / std::sqrt(M), 1.0));
    res.l1_times_linf = make_stats(0.0, 2.0 / M, 2.0);

    std::vector<std::vector<double>> vals;
    if (with_gram) vals.reserve(basis.funcs.size());

    for (const auto& h : basis.funcs) {
        const auto v = haar_values(basis, h);
        double integ = 0.0, l1 = 0.0, l2sq = 0.0, l4sq = 0.0, linf = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            const double w = mu.mass[x];
            if (w <= 0.0) continue;
            integ += v[x] * w;
            const double av = std::abs(v[x]);
            l1 += av * w;
            l2sq += v[x] * v[x] * w;
            l4sq += v[x] * v[x] * v[x] * v[x] * w;
            linf = std::max(linf, av);
        }
        if (h.u != 0) res.max_abs_integral = std::max(res.max_abs_integral, std::abs(integ));
        const double l2 = std::sqrt(l2sq);
        res.max_l2_dev = std::max(res.max_l2_dev, std::abs(l2 - 1.0));

        // normalizing mass: the u-th child for cancellative h, the cube itself
        // for scaling h
        const auto& piece_lv = g.level(h.u == 0 ? h.level : h.level + 1);
        const double A = piece_lv.cubes[h.piece_values.front().first].mass;
        const double norms[4] = {l1, l2, std::pow(l4sq, 0.25), linf};
        const double pexp[4] = {1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
        for (std::size_t pi = 0; pi < 4; ++pi) {
            const double e = std::isinf(pexp[pi]) ? -0.5 : 1.0 / pexp[pi] - 0.5;
            const double ratio = norms[pi] / std::pow(A, e);
            auto& st = res.ratios[pi];
            st.min_seen = std::min(st.min_seen, ratio);
            st.max_seen = std::max(st.max_seen, ratio);
            bool ok;
            if (h.u == 0 || pi == 1) {
                ok = std::abs(ratio - 1.0) <= tol_norm;
            } else {
                ok = ratio >= st.lo * (1.0 - slack) && ratio <= st.hi * (1.0 + slack);
            }
            if (!ok) {
                st.pass = false;
                res.failures.push_back("norm ratio p=" + std::to_string(pexp[pi]) +
                                       " out of bracket at level " + std::to_string(h.level) +
                                       " alpha " + std::to_string(h.alpha) + " u " +
                                       std::to_string(h.u));
            }
        }
        {
            const double prod = l1 * linf;
            auto& st = res.l1_times_linf;
            st.min_seen = std::min(st.min_seen, prod);
            st.max_seen = std::max(st.max_seen, prod);
            const bool ok = h.u == 0 ? std::abs(prod - 1.0) <= tol_norm
                                     : (prod >= st.lo * (1.0 - slack) &&
                                        prod <= st.hi * (1.0 + slack));
            if (!ok) {
                st.pass = false;
                res.failures.push_back("l1*linf out of bracket at level " +
                                       std::to_string(h.level) + " alpha " +
                                       std::to_string(h.alpha) + " u " + std::to_string(h.u));
            }
        }
        if (with_gram) vals.push_back(v);
    }

    if (with_gram) {
        res.gram_checked = true;
        const std::size_t m = vals.size();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i; j < m; ++j) {
                double dot = 0.0;
                for (std::size_t x = 0; x < n; ++x) dot += vals[i][x] * vals[j][x] * mu.mass[x];
                if (i == j)
                    res.gram_max_diag_dev = std::max(res.gram_max_diag_dev, std::abs(dot - 1.0));
                else
                    res.gram_max_offdiag = std::max(res.gram_max_offdiag, std::abs(dot));
            }
        }
    }

    res.pass = res.max_abs_integral <= tol_cancel && res.max_l2_dev <= tol_norm &&
               res.failures.empty();
    if (with_gram)
        res.pass = res.pass && res.gram_max_offdiag <= tol_norm && res.gram_max_diag_dev <= tol_norm;
    return res;
}

} // namespace dyadic
