#include "dyadic/grid.hpp"

#include "dyadic/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace dyadic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-9; // relative inflation that turns attained sups into strict bounds
} // namespace

double DyadicGrid::scale(int k) const { return std::pow(delta, k); }

std::size_t DyadicGrid::cube_count() const {
    std::size_t c = 0;
    for (const auto& lv : levels) c += lv.cubes.size();
    return c;
}

std::vector<std::size_t> extend_net(const FinitePointSpace& s, double separation,
                                    std::vector<std::size_t> net) {
    const std::size_t n = s.n;
    std::vector<double> mind(n, kInf);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t c : net) mind[x] = std::min(mind[x], s.d(c, x));
    for (;;) {
        // farthest point first, ties toward the smaller index
        std::size_t best = n;
        double bestd = -1.0;
        for (std::size_t x = 0; x < n; ++x) {
            if (mind[x] > bestd) {
                bestd = mind[x];
                best = x;
            }
        }
        if (best == n || bestd < separation) break;
        net.push_back(best);
        for (std::size_t x = 0; x < n; ++x) mind[x] = std::min(mind[x], s.d(best, x));
    }
    std::sort(net.begin(), net.end());
    return net;
}

std::vector<std::size_t> build_net(const FinitePointSpace& s, double separation,
                                   std::uint64_t seed,
                                   const std::vector<std::size_t>& must_include) {
    if (s.n == 0) throw std::runtime_error("empty space");
    std::vector<std::size_t> net = must_include;
    std::sort(net.begin(), net.end());
    net.erase(std::unique(net.begin(), net.end()), net.end());
    for (std::size_t c : net)
        if (c >= s.n) throw std::runtime_error("net seed point out of range");
    if (net.empty()) {
        Rng rng(seed);
        net.push_back(rng.index(s.n));
    }
    return extend_net(s, separation, std::move(net));
}

std::pair<int, int> auto_k_range(const FinitePointSpace& s, double delta) {
    const double diam = s.diameter();
    const double gap = s.min_positive_distance();
    int k_min = 0, k_max = 0;
    if (diam > 0.0) {
        k_min = static_cast<int>(std::floor(std::log(diam) / std::log(delta)));
        while (std::pow(delta, k_min) <= diam) --k_min;
        while (std::pow(delta, k_min + 1) > diam) ++k_min; // tightest level that still isolates a single root
    }
    if (std::isfinite(gap)) {
        k_max = static_cast<int>(std::ceil(std::log(gap) / std::log(delta)));
        while (std::pow(delta, k_max) > gap) ++k_max;
        while (k_max > k_min && std::pow(delta, k_max - 1) <= gap) --k_max;
    }
    if (k_max < k_min) k_max = k_min;
    return {k_min, k_max};
}

namespace {

std::size_t nearest_center(const FinitePointSpace& s, const std::vector<std::size_t>& centers,
                           std::size_t x) {
    std::size_t best = centers[0];
    double bestd = s.d(centers[0], x);
    for (std::size_t i = 1; i < centers.size(); ++i) {
        const double d = s.d(centers[i], x);
        if (d < bestd) { // ties keep the earlier (smaller) center index
            bestd = d;
            best = centers[i];
        }
    }
    return best;
}

// cheap sufficient condition for one nesting pair to be violation-free:
// every y with d(y, xd) < C dl satisfies d(y, xa) <= A0 (C dl + d(xd, xa))
bool nesting_prunable(double A0, double C, double dl, double dk, double dcenters) {
    return A0 * (C * dl + dcenters) < C * dk;
}

struct NestingPair {
    std::size_t desc_center, anc_center;
    double scale_desc, scale_anc;
    double center_dist;
};

std::vector<NestingPair> collect_nesting_pairs(const DyadicGrid& g, const FinitePointSpace& s) {
    std::vector<NestingPair> pairs;
    const std::size_t L = g.levels.size();
    for (std::size_t li = 1; li < L; ++li) {
        for (const auto& cube : g.levels[li].cubes) {
            // walk the ancestor chain
            std::ptrdiff_t pa = cube.parent;
            std::size_t lj = li;
            while (pa >= 0) {
                --lj;
                const auto& anc = g.levels[lj].cubes[static_cast<std::size_t>(pa)];
                pairs.push_back({cube.center, anc.center, g.scale(cube.level), g.scale(anc.level),
                                 s.d(cube.center, anc.center)});
                pa = anc.parent;
            }
        }
    }
    return pairs;
}

// smallest C >= start such that circumballs nest along every ancestor chain
double close_under_nesting(const FinitePointSpace& s, const std::vector<NestingPair>& pairs,
                           double start) {
    double C = start;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : pairs) {
            if (nesting_prunable(s.A0, C, p.scale_desc, p.scale_anc, p.center_dist)) continue;
            const double rd = C * p.scale_desc;
            const double ra = C * p.scale_anc;
            double worst = 0.0;
            for (std::size_t y = 0; y < s.n; ++y) {
                if (s.d(p.desc_center, y) < rd) worst = std::max(worst, s.d(p.anc_center, y));
            }
            if (worst >= ra) {
                C = (worst / p.scale_anc) * (1.0 + kSlack);
                changed = true;
            }
        }
    }
    return C;
}

} // namespace

DyadicGrid build_grid(const FinitePointSpace& s, const PointMassMeasure& mu, double delta,
                      int k_min, int k_max, std::uint64_t seed,
                      std::size_t distinguished_center, const GridOptions& opt) {
    if (s.n == 0) throw std::runtime_error("empty space");
    if (!(delta > 0.0 && delta < 1.0)) throw std::runtime_error("delta must be in (0,1)");
    if (k_min > k_max) throw std::runtime_error("bad level range");
    if (distinguished_center >= s.n) throw std::runtime_error("distinguished center out of range");
    if (mu.mass.size() != s.n) throw std::runtime_error("measure size mismatch");

    const double small_delta = 1.0 / (12.0 * s.A0 * s.A0 * s.A0);
    if (opt.strict && delta > small_delta)
        throw std::runtime_error("delta above the small-scale threshold in strict mode");

    DyadicGrid g;
    g.delta = delta;
    g.k_min = k_min;
    g.k_max = k_max;
    g.distinguished_center = distinguished_center;
    const std::size_t L = static_cast<std::size_t>(k_max - k_min) + 1;

    // nets, coarse to fine, nested upward in fineness
    std::vector<std::vector<std::size_t>> nets(L);
    if (opt.explicit_centers) {
        const auto& ex = *opt.explicit_centers;
        if (ex.size() != L) throw std::runtime_error("explicit centers: wrong level count");
        for (std::size_t i = 0; i < L; ++i) {
            const double sep = std::pow(delta, k_min + static_cast<int>(i));
            std::vector<std::size_t> net = ex[i];
            std::sort(net.begin(), net.end());
            net.erase(std::unique(net.begin(), net.end()), net.end());
            for (std::size_t c : net)
                if (c >= s.n) throw std::runtime_error("explicit center out of range");
            for (std::size_t a = 0; a < net.size(); ++a)
                for (std::size_t b = a + 1; b < net.size(); ++b)
                    if (s.d(net[a], net[b]) < sep)
                        throw std::runtime_error("explicit centers violate separation");
            if (i > 0) {
                if (!std::includes(net.begin(), net.end(), nets[i - 1].begin(), nets[i - 1].end()))
                    throw std::runtime_error("explicit centers not nested across levels");
            } else if (!std::binary_search(net.begin(), net.end(), distinguished_center)) {
                throw std::runtime_error("explicit centers omit the distinguished center");
            }
            nets[i] = extend_net(s, sep, std::move(net));
        }
    } else {
        nets[0] = build_net(s, std::pow(delta, k_min), seed, {distinguished_center});
        for (std::size_t i = 1; i < L; ++i)
            nets[i] = extend_net(s, std::pow(delta, k_min + static_cast<int>(i)), nets[i - 1]);
    }

    g.levels.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        auto& lv = g.levels[i];
        lv.k = k_min + static_cast<int>(i);
        lv.centers = nets[i]; // already sorted ascending
        lv.cubes.resize(lv.centers.size());
        lv.point_cube.assign(s.n, 0);
        for (std::size_t a = 0; a < lv.centers.size(); ++a) {
            lv.cubes[a].level = lv.k;
            lv.cubes[a].alpha = a;
            lv.cubes[a].center = lv.centers[a];
        }
    }

    auto alpha_of_center = [&](std::size_t li, std::size_t center) {
        const auto& cs = g.levels[li].centers;
        return static_cast<std::size_t>(
            std::lower_bound(cs.begin(), cs.end(), center) - cs.begin());
    };

    // finest level: each point to its nearest center
    {
        auto& lv = g.levels[L - 1];
        for (std::size_t x = 0; x < s.n; ++x) {
            const std::size_t c = nearest_center(s, lv.centers, x);
            const std::size_t a = alpha_of_center(L - 1, c);
            lv.point_cube[x] = a;
            lv.cubes[a].members.push_back(x);
        }
    }
    // coarser levels: each child cube follows its own center
    for (std::size_t i = L - 1; i-- > 0;) {
        auto& lv = g.levels[i];
        auto& fine = g.levels[i + 1];
        for (auto& child : fine.cubes) {
            const std::size_t c = nearest_center(s, lv.centers, child.center);
            const std::size_t a = alpha_of_center(i, c);
            child.parent = static_cast<std::ptrdiff_t>(a);
            lv.cubes[a].children.push_back(child.alpha);
            lv.cubes[a].members.insert(lv.cubes[a].members.end(), child.members.begin(),
                                       child.members.end());
        }
        for (auto& cube : lv.cubes) std::sort(cube.members.begin(), cube.members.end());
        for (std::size_t x = 0; x < s.n; ++x)
            lv.point_cube[x] = static_cast<std::size_t>(
                fine.cubes[fine.point_cube[x]].parent);
    }

    for (auto& lv : g.levels)
        for (auto& cube : lv.cubes) cube.mass = mu.of(cube.members);

    g.M = 1;
    for (std::size_t i = 0; i + 1 < L; ++i)
        for (const auto& cube : g.levels[i].cubes) g.M = std::max(g.M, cube.children.size());

    // achieved constants
    double c1 = kInf;
    double tight = 0.0;
    for (const auto& lv : g.levels) {
        const double sc = g.scale(lv.k);
        for (const auto& cube : lv.cubes) {
            double far_member = 0.0;
            for (std::size_t y : cube.members) far_member = std::max(far_member, s.d(cube.center, y));
            tight = std::max(tight, far_member / sc);
            if (cube.members.size() < s.n) {
                double near_out = kInf;
                std::size_t mi = 0;
                for (std::size_t y = 0; y < s.n; ++y) {
                    if (mi < cube.members.size() && cube.members[mi] == y) {
                        ++mi;
                        continue;
                    }
                    near_out = std::min(near_out, s.d(cube.center, y));
                }
                c1 = std::min(c1, near_out / sc);
            }
        }
    }
    g.c1 = c1;
    double C1 = tight > 0.0 ? tight * (1.0 + kSlack) : 1.0;
    g.C1 = close_under_nesting(s, collect_nesting_pairs(g, s), C1);
    return g;
}

CubeRef containing_cube(const DyadicGrid& g, std::size_t x, int k) {
    if (k < g.k_min || k > g.k_max) throw std::runtime_error("level out of range");
    return {k, g.level(k).point_cube[x]};
}

const DyadicCube& cube_at(const DyadicGrid& g, CubeRef r) { return g.level(r.k).cubes[r.alpha]; }

CubeRef tightest_ref(const DyadicGrid& g, CubeRef r) {
    while (r.k < g.k_max) {
        const DyadicCube& q = cube_at(g, r);
        if (q.children.size() != 1) break;
        r = {r.k + 1, q.children[0]};
    }
    return r;
}

VerifyGridResult verify_grid(const FinitePointSpace& s, const PointMassMeasure& mu,
                             const DyadicGrid& g) {
    VerifyGridResult res;
    res.level_count = g.levels.size();
    res.cube_total = g.cube_count();
    auto& checks = res.checks;
    auto add = [&](const std::string& name, bool pass, std::string detail = {}) {
        checks.push_back({name, pass, std::move(detail)});
    };

    const std::size_t L = g.levels.size();
    bool partition = true, nested = true, tree = true, counts_ok = true, centers_ok = true;
    bool separation = true, density = true, masses_ok = true;
    std::string why;

    for (std::size_t i = 0; i < L; ++i) {
        const auto& lv = g.levels[i];
        std::vector<std::size_t> seen(s.n, 0);
        for (std::size_t a = 0; a < lv.cubes.size(); ++a) {
            const auto& cube = lv.cubes[a];
            if (cube.alpha != a || cube.level != lv.k) tree = false;
            if (a >= lv.centers.size() || cube.center != lv.centers[a]) centers_ok = false;
            if (!std::binary_search(cube.members.begin(), cube.members.end(), cube.center))
                centers_ok = false;
            for (std::size_t y : cube.members) {
                ++seen[y];
                if (lv.point_cube[y] != a) partition = false;
            }
            double m = mu.of(cube.members);
            // stored masses must be reproducible from the measure
            if (std::abs(m - cube.mass) > 1e-12 * std::max(1.0, std::abs(m))) masses_ok = false;
        }
        for (std::size_t y = 0; y < s.n; ++y)
            if (seen[y] != 1) {
                partition = false;
                if (why.empty())
                    why = "point " + std::to_string(y) + " covered " + std::to_string(seen[y]) +
                          " times at level " + std::to_string(lv.k);
            }
        const double sc = g.scale(lv.k);
        for (std::size_t a = 0; a < lv.centers.size(); ++a)
            for (std::size_t b = a + 1; b < lv.centers.size(); ++b)
                if (s.d(lv.centers[a], lv.centers[b]) < sc) separation = false;
        for (std::size_t y = 0; y < s.n; ++y) {
            double nd = kInf;
            for (std::size_t c : lv.centers) nd = std::min(nd, s.d(c, y));
            if (!(nd < sc)) density = false;
        }
    }
    add("level_partition", partition, why);
    add("net_separation", separation);
    add("net_density", density);
    add("center_membership", centers_ok);
    add("stored_masses", masses_ok);

    for (std::size_t i = 0; i + 1 < L; ++i) {
        const auto& lv = g.levels[i];
        const auto& fine = g.levels[i + 1];
        for (const auto& cube : lv.cubes) {
            if (cube.children.empty() || cube.children.size() > g.M) counts_ok = false;
            std::vector<std::size_t> merged;
            for (std::size_t ca : cube.children) {
                const auto& child = fine.cubes[ca];
                if (child.parent != static_cast<std::ptrdiff_t>(cube.alpha)) tree = false;
                merged.insert(merged.end(), child.members.begin(), child.members.end());
                if (!std::includes(cube.members.begin(), cube.members.end(),
                                   child.members.begin(), child.members.end()))
                    nested = false;
            }
            std::sort(merged.begin(), merged.end());
            if (merged != cube.members) nested = false;
        }
        for (const auto& child : fine.cubes)
            if (child.parent < 0 ||
                static_cast<std::size_t>(child.parent) >= lv.cubes.size())
                tree = false;
    }
    add("nestedness", nested);
    add("unique_ancestor", tree);
    add("child_counts", counts_ok);

    // inner and outer ball conditions with the stored constants
    bool inner = true, outer = true;
    double c1_re = kInf, tight = 0.0;
    for (const auto& lv : g.levels) {
        const double sc = g.scale(lv.k);
        for (const auto& cube : lv.cubes) {
            const double rin = std::isfinite(g.c1) ? g.c1 * sc : kInf;
            const double rout = g.C1 * sc;
            double far_member = 0.0;
            std::size_t mi = 0;
            double near_out = kInf;
            for (std::size_t y = 0; y < s.n; ++y) {
                const bool member = mi < cube.members.size() && cube.members[mi] == y;
                if (member) ++mi;
                const double d = s.d(cube.center, y);
                if (member) {
                    far_member = std::max(far_member, d);
                    if (!(d < rout)) outer = false;
                } else {
                    near_out = std::min(near_out, d);
                    if (std::isfinite(rin) && d < rin) inner = false;
                }
            }
            tight = std::max(tight, far_member / sc);
            if (cube.members.size() < s.n) c1_re = std::min(c1_re, near_out / sc);
        }
    }
    res.c1_rederived = c1_re;
    res.C1_tight = tight;
    add("inner_ball", inner);
    add("outer_ball", outer);

    bool nesting_balls = true;
    {
        const auto pairs = collect_nesting_pairs(g, s);
        for (const auto& p : pairs) {
            if (nesting_prunable(s.A0, g.C1, p.scale_desc, p.scale_anc, p.center_dist)) continue;
            const double rd = g.C1 * p.scale_desc, ra = g.C1 * p.scale_anc;
            for (std::size_t y = 0; y < s.n; ++y)
                if (s.d(p.desc_center, y) < rd && !(s.d(p.anc_center, y) < ra)) {
                    nesting_balls = false;
                    break;
                }
            if (!nesting_balls) break;
        }
    }
    add("circumball_nesting", nesting_balls);

    bool distinguished = true;
    for (const auto& lv : g.levels)
        if (!std::binary_search(lv.centers.begin(), lv.centers.end(), g.distinguished_center))
            distinguished = false;
    add("distinguished_center_all_levels", distinguished);

    // points far from everything sit in their own cube once delta^k drops
    // below their gap
    bool isolated_ok = true;
    for (std::size_t x = 0; x < s.n; ++x) {
        double gap = kInf;
        for (std::size_t y = 0; y < s.n; ++y)
            if (y != x) gap = std::min(gap, s.d(x, y));
        for (const auto& lv : g.levels) {
            if (g.scale(lv.k) <= gap) {
                const auto& cube = lv.cubes[lv.point_cube[x]];
                if (cube.members.size() != 1 || cube.center != x) isolated_ok = false;
            }
        }
    }
    add("isolated_points_split", isolated_ok);

    for (const auto& lv : g.levels)
        if (lv.cubes.size() == 1 && lv.cubes[0].members.size() == s.n) res.single_root = true;

    res.pass = true;
    for (const auto& c : checks) res.pass = res.pass && c.pass;
    return res;
}

AdjacentSystems build_adjacent_systems(const FinitePointSpace& s, const PointMassMeasure& mu,
                                       double delta, int k_min, int k_max, std::size_t T,
                                       std::uint64_t seed) {
    if (T == 0) throw std::runtime_error("need at least one system");
    AdjacentSystems sys;
    sys.T = T;
    sys.delta = delta;
    sys.grids.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        Rng rng(seed + t);
        const std::size_t dc = rng.index(s.n);
        sys.grids.push_back(build_grid(s, mu, delta, k_min, k_max, seed + t, dc));
    }
    return sys;
}

std::optional<int> window_level(double delta, double r, int k_min, int k_max) {
    if (!(r > 0.0)) return std::nullopt;
    int k = static_cast<int>(std::floor(std::log(r) / std::log(delta))) - 2;
    auto sc = [&](int kk) { return std::pow(delta, kk); };
    while (sc(k + 2) < r) --k;
    while (sc(k + 3) >= r) ++k;
    if (!(sc(k + 2) >= r && sc(k + 3) < r)) return std::nullopt;
    if (k < k_min || k > k_max) return std::nullopt;
    return k;
}

SandwichReport verify_sandwich(const AdjacentSystems& sys, const FinitePointSpace& s,
                               const PointMassMeasure& mu) {
    (void)mu;
    SandwichReport rep;
    rep.C_theoretical = 8.0 * s.A0 * s.A0 * s.A0 / (sys.delta * sys.delta * sys.delta);
    const std::size_t n = s.n;
    const BallIndex bi = build_ball_index(s);
    for (std::size_t c = 0; c < n; ++c) {
        // probe both the gap midpoints and the exact distance values: the same
        // point set is a ball at every radius in a half-open interval, and the
        // window level depends on the radius, not just the set
        std::vector<double> reps;
        for (std::size_t j = 0; j < bi.counts[c].size(); ++j) reps.push_back(bi.radii[c][j]);
        for (std::size_t y = 0; y < n; ++y)
            if (s.d(c, y) > 0.0) reps.push_back(s.d(c, y));
        std::sort(reps.begin(), reps.end());
        reps.erase(std::unique(reps.begin(), reps.end()), reps.end());

        for (double r : reps) {
            ++rep.balls_total;
            const auto kw = window_level(sys.delta, r, sys.grids[0].k_min, sys.grids[0].k_max);
            if (!kw) {
                rep.failures.push_back({c, r, "window level outside the grid range"});
                continue;
            }
            const int k = *kw;
            const auto B = ball(s, c, r);
            bool found = false;
            BallSandwich best{};
            for (std::size_t t = 0; t < sys.T; ++t) {
                const auto& g = sys.grids[t];
                const auto& lv = g.level(k);
                const std::size_t qa = lv.point_cube[c];
                bool inside = true;
                for (std::size_t y : B)
                    if (lv.point_cube[y] != qa) {
                        inside = false;
                        break;
                    }
                if (!inside) continue;
                double far = 0.0;
                for (std::size_t y : lv.cubes[qa].members) far = std::max(far, s.d(c, y));
                const double C_ball = std::max(far / r, 1.0) * (1.0 + kSlack);
                if (!found || C_ball < best.C_ball) best = {c, r, k, t, {k, qa}, C_ball};
                found = true;
            }
            if (found) {
                ++rep.balls_covered;
                rep.C_empirical = std::max(rep.C_empirical, best.C_ball);
                rep.covered.push_back(best);
            } else {
                rep.failures.push_back({c, r, "no system has a containing cube at the window level"});
            }
        }
    }
    rep.all_covered = rep.balls_covered == rep.balls_total;
    return rep;
}

} // namespace dyadic
