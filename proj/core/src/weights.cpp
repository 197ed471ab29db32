#include "dyadic/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace dyadic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-9; // multiplicative tolerance on asserted inequalities

void validate_weight_shape(const PointMassMeasure& mu, const Weight& w) {
    if (w.size() != mu.mass.size())
        throw std::invalid_argument("weight size does not match the measure");
    for (double v : w)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("weight values must be finite and nonnegative");
}

void validate_weight(const PointMassMeasure& mu, const Weight& w) {
    validate_weight_shape(mu, w);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (mu.mass[i] > 0.0 && w[i] <= 0.0)
            throw std::invalid_argument("weight must be positive on positive-mass points");
}

// Per-center prefix sums along the distance ordering. Every distinct ball is a
// prefix of bi.order[c], so each ball average costs O(1) once these exist.
struct CenterPrefixes {
    std::vector<double> mass, w, dual, wp, logw, wlogw, minw, maxw;
};

CenterPrefixes make_prefixes(const PointMassMeasure& mu, const Weight& w,
                             const std::vector<std::size_t>& ord, double p) {
    const std::size_t n = ord.size();
    CenterPrefixes pre;
    pre.mass.assign(n + 1, 0.0);
    pre.w.assign(n + 1, 0.0);
    pre.logw.assign(n + 1, 0.0);
    pre.wlogw.assign(n + 1, 0.0);
    pre.minw.assign(n + 1, kInf);
    pre.maxw.assign(n + 1, 0.0);
    const bool finite_p = std::isfinite(p);
    if (finite_p && p > 1.0) {
        pre.dual.assign(n + 1, 0.0);
        pre.wp.assign(n + 1, 0.0);
    }
    for (std::size_t m = 0; m < n; ++m) {
        const std::size_t i = ord[m];
        const double mi = mu.mass[i];
        pre.mass[m + 1] = pre.mass[m] + mi;
        pre.w[m + 1] = pre.w[m] + w[i] * mi;
        pre.minw[m + 1] = pre.minw[m];
        pre.maxw[m + 1] = pre.maxw[m];
        pre.logw[m + 1] = pre.logw[m];
        pre.wlogw[m + 1] = pre.wlogw[m];
        if (mi > 0.0) {
            pre.minw[m + 1] = std::min(pre.minw[m + 1], w[i]);
            pre.maxw[m + 1] = std::max(pre.maxw[m + 1], w[i]);
            const double lw = std::log(w[i]);
            pre.logw[m + 1] += lw * mi;
            pre.wlogw[m + 1] += w[i] * lw * mi;
        }
        if (finite_p && p > 1.0) {
            pre.dual[m + 1] = pre.dual[m] + (mi > 0.0 ? std::pow(w[i], -1.0 / (p - 1.0)) * mi : 0.0);
            pre.wp[m + 1] = pre.wp[m] + std::pow(w[i], p) * mi;
        }
    }
    return pre;
}

double ap_of_prefix(const CenterPrefixes& pre, std::size_t cnt, double p) {
    const double m = pre.mass[cnt];
    if (m <= 0.0) return 0.0;
    const double avg = pre.w[cnt] / m;
    if (!std::isfinite(p)) return avg * std::exp(-pre.logw[cnt] / m);
    if (p == 1.0) return avg / pre.minw[cnt];
    return avg * std::pow(pre.dual[cnt] / m, p - 1.0);
}

double rhp_of_prefix(const CenterPrefixes& pre, std::size_t cnt, double p) {
    const double m = pre.mass[cnt];
    if (m <= 0.0) return 0.0;
    const double avg = pre.w[cnt] / m;
    if (!std::isfinite(p)) return pre.maxw[cnt] / avg;
    if (p == 1.0) {
        // avg of (w/avg) log(w/avg), expanded so prefixes suffice
        return (pre.wlogw[cnt] - std::log(avg) * pre.w[cnt]) / (avg * m);
    }
    return std::pow(pre.wp[cnt] / m, 1.0 / p) / avg;
}

// the same functionals over an explicit point list (used for cubes)
double ap_of_set(const PointMassMeasure& mu, const Weight& w, const std::vector<std::size_t>& pts,
                 double p) {
    double m = 0.0, ws = 0.0, dual = 0.0, logw = 0.0, minw = kInf;
    for (std::size_t i : pts) {
        const double mi = mu.mass[i];
        m += mi;
        ws += w[i] * mi;
        if (mi > 0.0) {
            minw = std::min(minw, w[i]);
            logw += std::log(w[i]) * mi;
            if (std::isfinite(p) && p > 1.0) dual += std::pow(w[i], -1.0 / (p - 1.0)) * mi;
        }
    }
    if (m <= 0.0) return 0.0;
    const double avg = ws / m;
    if (!std::isfinite(p)) return avg * std::exp(-logw / m);
    if (p == 1.0) return avg / minw;
    return avg * std::pow(dual / m, p - 1.0);
}

double rhp_of_set(const PointMassMeasure& mu, const Weight& w, const std::vector<std::size_t>& pts,
                  double p) {
    double m = 0.0, ws = 0.0, wp = 0.0, wlogw = 0.0, maxw = 0.0;
    for (std::size_t i : pts) {
        const double mi = mu.mass[i];
        m += mi;
        ws += w[i] * mi;
        if (mi > 0.0) {
            maxw = std::max(maxw, w[i]);
            wlogw += w[i] * std::log(w[i]) * mi;
            if (std::isfinite(p)) wp += std::pow(w[i], p) * mi;
        }
    }
    if (m <= 0.0) return 0.0;
    const double avg = ws / m;
    if (!std::isfinite(p)) return maxw / avg;
    if (p == 1.0) return (wlogw - std::log(avg) * ws) / (avg * m);
    return std::pow(wp / m, 1.0 / p) / avg;
}

// per-level weight mass of every cube
std::vector<std::vector<double>> cube_weight_masses(const DyadicGrid& g, const PointMassMeasure& mu,
                                                    const Weight& w) {
    std::vector<std::vector<double>> wm(g.levels.size());
    for (std::size_t li = 0; li < g.levels.size(); ++li) {
        wm[li].resize(g.levels[li].cubes.size(), 0.0);
        for (std::size_t a = 0; a < g.levels[li].cubes.size(); ++a)
            wm[li][a] = weight_of(mu, w, g.levels[li].cubes[a].members);
    }
    return wm;
}

} // namespace

double weight_of(const PointMassMeasure& mu, const Weight& w, const std::vector<std::size_t>& pts) {
    double out = 0.0;
    for (std::size_t i : pts) out += w[i] * mu.mass[i];
    return out;
}

DoublingReport doubling_constant(const FinitePointSpace& s, const PointMassMeasure& mu,
                                 const Weight& w) {
    validate_weight(mu, w);
    std::vector<double> wm(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) wm[i] = w[i] * mu.mass[i];
    const MeasureDoublingResult r = measure_doubling_constant(s, make_measure(std::move(wm)));
    DoublingReport out;
    out.constant = r.constant;
    out.finite = r.finite;
    out.center = r.center;
    out.radius = r.radius;
    return out;
}

DyadicDoublingReport dyadic_doubling_constant(const DyadicGrid& g, const PointMassMeasure& mu,
                                              const Weight& w) {
    // ratios of weight masses only, so zero weights are legal here and flagged
    validate_weight_shape(mu, w);
    const auto wm = cube_weight_masses(g, mu, w);
    DyadicDoublingReport rep;
    for (std::size_t li = 0; li + 1 < g.levels.size(); ++li) {
        for (std::size_t a = 0; a < g.levels[li].cubes.size(); ++a) {
            const auto& children = g.levels[li].cubes[a].children;
            if (children.empty()) continue;
            double cmin = kInf, cmax = 0.0;
            for (std::size_t ch : children) {
                cmin = std::min(cmin, wm[li + 1][ch]);
                cmax = std::max(cmax, wm[li + 1][ch]);
            }
            const double parent = wm[li][a];
            if (cmin <= 0.0) {
                if (parent > 0.0) {
                    rep.finite = false;
                    rep.parent_child = kInf;
                }
                if (cmax > 0.0) rep.sibling = kInf;
                continue;
            }
            rep.parent_child = std::max(rep.parent_child, parent / cmin);
            if (children.size() > 1) rep.sibling = std::max(rep.sibling, cmax / cmin);
        }
    }
    return rep;
}

double ap_constant(const FinitePointSpace& s, const PointMassMeasure& mu, const Weight& w,
                   double p) {
    validate_weight(mu, w);
    if (p < 1.0) throw std::invalid_argument("Muckenhoupt exponent must be >= 1");
    const BallIndex bi = build_ball_index(s);
    double best = 0.0;
    for (std::size_t c = 0; c < s.n; ++c) {
        const CenterPrefixes pre = make_prefixes(mu, w, bi.order[c], p);
        for (std::size_t cnt : bi.counts[c]) best = std::max(best, ap_of_prefix(pre, cnt, p));
    }
    return best;
}

double dyadic_ap_constant(const DyadicGrid& g, const PointMassMeasure& mu, const Weight& w,
                          double p) {
    validate_weight(mu, w);
    if (p < 1.0) throw std::invalid_argument("Muckenhoupt exponent must be >= 1");
    double best = 0.0;
    for (const auto& lvl : g.levels)
        for (const auto& q : lvl.cubes) best = std::max(best, ap_of_set(mu, w, q.members, p));
    return best;
}

double rhp_constant(const FinitePointSpace& s, const PointMassMeasure& mu, const Weight& w,
                    double p) {
    validate_weight(mu, w);
    if (p < 1.0) throw std::invalid_argument("reverse-Holder exponent must be >= 1");
    const BallIndex bi = build_ball_index(s);
    double best = 0.0;
    for (std::size_t c = 0; c < s.n; ++c) {
        const CenterPrefixes pre = make_prefixes(mu, w, bi.order[c], p);
        for (std::size_t cnt : bi.counts[c]) best = std::max(best, rhp_of_prefix(pre, cnt, p));
    }
    return best;
}

DyadicRhReport dyadic_rhp_constant(const DyadicGrid& g, const PointMassMeasure& mu, const Weight& w,
                                   double p) {
    validate_weight(mu, w);
    if (p < 1.0) throw std::invalid_argument("reverse-Holder exponent must be >= 1");
    DyadicRhReport rep;
    for (const auto& lvl : g.levels)
        for (const auto& q : lvl.cubes)
            rep.sup_part = std::max(rep.sup_part, rhp_of_set(mu, w, q.members, p));
    rep.doubling = dyadic_doubling_constant(g, mu, w).parent_child;
    // membership in the dyadic class pairs the cube sup with dyadic doubling;
    // the entropy functional (p = 1) is reported on its own scale instead
    rep.combined = p == 1.0 ? rep.sup_part : std::max(rep.sup_part, rep.doubling);
    return rep;
}

TwoRadiusIndex build_two_radius_index(const FinitePointSpace& s, const AdjacentSystems& sys) {
    TwoRadiusIndex idx;
    const double delta = sys.delta;
    idx.N = static_cast<int>(
        std::ceil(std::log(16.0 * std::pow(s.A0, 3) / std::pow(delta, 4)) / std::log(1.0 / delta)));
    for (std::size_t x = 0; x < s.n; ++x) {
        for (double r : doubling_probe_radii(s, x)) {
            ++idx.balls_total;
            const std::vector<std::size_t> b1 = ball(s, x, r);
            const std::vector<std::size_t> b2 = ball(s, x, 2.0 * r);
            std::optional<TwoRadiusSandwich> best;
            for (std::size_t t = 0; t < sys.T; ++t) {
                const DyadicGrid& g = sys.grids[t];
                const auto k = window_level(g.delta, 2.0 * r, g.k_min, g.k_max);
                if (!k) continue;
                const CubeRef outer = containing_cube(g, x, *k);
                const auto& oq = cube_at(g, outer);
                if (!std::includes(oq.members.begin(), oq.members.end(), b2.begin(), b2.end()))
                    continue;
                for (int dep = 1; dep <= idx.N && *k + dep <= g.k_max; ++dep) {
                    const CubeRef inner{*k + dep, g.level(*k + dep).point_cube[x]};
                    const auto& iq = cube_at(g, inner);
                    if (!std::includes(b1.begin(), b1.end(), iq.members.begin(),
                                       iq.members.end()))
                        continue;
                    if (!best || dep < best->depth)
                        best = TwoRadiusSandwich{x, r, t, outer, inner, dep};
                    break;
                }
            }
            if (best) idx.covered.push_back(*best);
        }
    }
    return idx;
}

WeightClassReport intersection_report(const FinitePointSpace& s, const PointMassMeasure& mu,
                                      const AdjacentSystems& sys, const TwoRadiusIndex& tri,
                                      const Weight& w, const std::vector<double>& ps) {
    validate_weight(mu, w);
    WeightClassReport rep;
    rep.a0 = s.A0;
    rep.c_dbl_mu = measure_doubling_constant(s, mu).constant;
    rep.dbl_w = doubling_constant(s, mu, w);
    rep.ps = ps;
    rep.balls_total = tri.balls_total;
    rep.balls_covered = tri.covered.size();
    rep.N = tri.N;

    for (std::size_t t = 0; t < sys.T; ++t)
        rep.dydbl.push_back(dyadic_doubling_constant(sys.grids[t], mu, w));
    for (double p : ps) {
        rep.ap.push_back(ap_constant(s, mu, w, p));
        rep.rhp.push_back(rhp_constant(s, mu, w, p));
    }
    rep.ap_dyadic.resize(sys.T);
    rep.rhp_dyadic.resize(sys.T);
    for (std::size_t t = 0; t < sys.T; ++t) {
        for (double p : ps) {
            rep.ap_dyadic[t].push_back(dyadic_ap_constant(sys.grids[t], mu, w, p));
            rep.rhp_dyadic[t].push_back(dyadic_rhp_constant(sys.grids[t], mu, w, p));
        }
    }

    auto add = [&rep](std::string name, std::size_t t, double p, double lhs, double bound,
                      bool asserted) {
        IntersectionCheck ck;
        ck.name = std::move(name);
        ck.t = t;
        ck.p = p;
        ck.lhs = lhs;
        ck.bound = bound;
        ck.asserted = asserted;
        ck.pass = asserted ? lhs <= bound * (1.0 + kSlack) : true;
        rep.checks.push_back(ck);
    };

    for (std::size_t t = 0; t < sys.T; ++t) {
        const DyadicGrid& g = sys.grids[t];
        const double ratio_c = std::isfinite(g.c1) && g.c1 > 0.0 ? g.C1 / g.c1 : 1.0;
        const double geom = 1.0 + std::log2(std::max(2.0 * s.A0 * ratio_c / g.delta, 1.0));
        const double exp_c = 1.0 + std::log2(std::max(ratio_c, 1.0));

        add("dyadic_doubling_from_continuous", t, 0.0, rep.dydbl[t].parent_child,
            std::pow(rep.dbl_w.constant, geom), true);
        add("sibling_le_parent_child", t, 0.0, rep.dydbl[t].sibling, rep.dydbl[t].parent_child,
            true);
        add("parent_child_le_m_sibling", t, 0.0, rep.dydbl[t].parent_child,
            static_cast<double>(g.M) * rep.dydbl[t].sibling, true);

        for (std::size_t pi = 0; pi < ps.size(); ++pi) {
            const double p = ps[pi];
            const bool ap_asserted = p == 1.0 || p == 2.0 || p == 4.0;
            const double ap_exp = p == 1.0 ? exp_c : p * exp_c;
            add(ap_asserted ? "dyadic_muckenhoupt_from_continuous"
                            : "dyadic_muckenhoupt_vs_continuous",
                t, p, rep.ap_dyadic[t][pi],
                ap_asserted ? rep.ap[pi] * std::pow(rep.c_dbl_mu, ap_exp) : rep.ap[pi],
                ap_asserted);
            add("continuous_muckenhoupt_vs_dyadic", t, p, rep.ap[pi], rep.ap_dyadic[t][pi], false);

            const bool rh_asserted = p == 2.0 || p == 4.0 || std::isinf(p);
            const double mu_exp = std::isinf(p) ? 0.0 : exp_c / p;
            add(rh_asserted ? "dyadic_reverse_holder_from_continuous"
                            : "dyadic_reverse_holder_vs_continuous",
                t, p, rep.rhp_dyadic[t][pi].sup_part,
                rh_asserted ? rep.rhp[pi] * std::pow(rep.c_dbl_mu, mu_exp) *
                                  std::pow(rep.dbl_w.constant, exp_c)
                            : rep.rhp[pi],
                rh_asserted);
            add("continuous_reverse_holder_vs_dyadic", t, p, rep.rhp[pi],
                rep.rhp_dyadic[t][pi].sup_part, false);
        }
    }

    // two-radius route back to weight doubling: for every covered ball the
    // chain w(B(x,2r)) <= w(outer) <= C_pc^depth w(inner) <= C_pc^depth w(B(x,r))
    double worst = 0.0;
    bool rev_ok = true;
    for (const auto& sw : tri.covered) {
        const double w2 = weight_of(mu, w, ball(s, sw.center, 2.0 * sw.radius));
        const double w1 = weight_of(mu, w, ball(s, sw.center, sw.radius));
        const double cpc = rep.dydbl[sw.t].parent_child;
        const double bound = std::pow(cpc, sw.depth) * w1;
        if (w2 <= bound * (1.0 + kSlack)) {
            if (bound > 0.0) worst = std::max(worst, w2 / bound);
        } else {
            rev_ok = false;
            worst = bound > 0.0 ? std::max(worst, w2 / bound) : kInf;
        }
    }
    rep.reverse_worst = worst;
    add("weight_doubling_from_dyadic", 0, 0.0, worst, 1.0, true);
    if (!rev_ok) rep.checks.back().pass = false;

    rep.pass = true;
    for (const auto& ck : rep.checks)
        if (ck.asserted && !ck.pass) rep.pass = false;
    return rep;
}

ProductWeightConstants product_ap_constant(const FinitePointSpace& s1, const PointMassMeasure& mu1,
                                           const FinitePointSpace& s2, const PointMassMeasure& mu2,
                                           const Weight& w, double p) {
    if (w.size() != s1.n * s2.n) throw std::invalid_argument("product weight size mismatch");
    ProductWeightConstants out;
    Weight slice;
    for (std::size_t x2 = 0; x2 < s2.n; ++x2) {
        slice.resize(s1.n);
        for (std::size_t x1 = 0; x1 < s1.n; ++x1) slice[x1] = w[x1 * s2.n + x2];
        out.factor1 = std::max(out.factor1, ap_constant(s1, mu1, slice, p));
    }
    for (std::size_t x1 = 0; x1 < s1.n; ++x1) {
        slice.resize(s2.n);
        for (std::size_t x2 = 0; x2 < s2.n; ++x2) slice[x2] = w[x1 * s2.n + x2];
        out.factor2 = std::max(out.factor2, ap_constant(s2, mu2, slice, p));
    }
    return out;
}

ProductWeightConstants product_rhp_constant(const FinitePointSpace& s1,
                                            const PointMassMeasure& mu1,
                                            const FinitePointSpace& s2,
                                            const PointMassMeasure& mu2, const Weight& w,
                                            double p) {
    if (w.size() != s1.n * s2.n) throw std::invalid_argument("product weight size mismatch");
    ProductWeightConstants out;
    Weight slice;
    for (std::size_t x2 = 0; x2 < s2.n; ++x2) {
        slice.resize(s1.n);
        for (std::size_t x1 = 0; x1 < s1.n; ++x1) slice[x1] = w[x1 * s2.n + x2];
        out.factor1 = std::max(out.factor1, rhp_constant(s1, mu1, slice, p));
    }
    for (std::size_t x1 = 0; x1 < s1.n; ++x1) {
        slice.resize(s2.n);
        for (std::size_t x2 = 0; x2 < s2.n; ++x2) slice[x2] = w[x1 * s2.n + x2];
        out.factor2 = std::max(out.factor2, rhp_constant(s2, mu2, slice, p));
    }
    return out;
}

} // namespace dyadic
