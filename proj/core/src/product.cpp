#include "dyadic/product.hpp"

#include "dyadic/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace dyadic {

namespace {

constexpr double kReconTol = 1e-10;

const DyadicCube& carrier(const HaarBasis& b, std::size_t i) {
    const HaarFunction& h = b.funcs[i];
    return b.grid->level(h.level).cubes[h.alpha];
}

bool rect_in_mask(const std::vector<std::size_t>& m1, const std::vector<std::size_t>& m2,
                  const std::vector<char>& mask, std::size_t n2) {
    for (std::size_t x1 : m1)
        for (std::size_t x2 : m2)
            if (!mask[x1 * n2 + x2]) return false;
    return true;
}

// cube containment along the parent chain (equality counts as contained)
bool cube_within(const DyadicGrid& g, CubeRef inner, CubeRef outer) {
    if (inner.k < outer.k) return false;
    std::size_t a = inner.alpha;
    for (int k = inner.k; k > outer.k; --k) {
        const std::ptrdiff_t p = g.level(k).cubes[a].parent;
        if (p < 0) return false;
        a = static_cast<std::size_t>(p);
    }
    return a == outer.alpha;
}

double mask_mass(const ProductGrid& pg, const std::vector<char>& mask) {
    double m = 0.0;
    for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
            if (mask[x1 * pg.n2 + x2]) m += pg.mass(x1, x2);
    return m;
}

// every positive-mass cube of the grid, coarse to fine
std::vector<CubeRef> all_cubes(const DyadicGrid& g) {
    std::vector<CubeRef> out;
    for (const auto& lv : g.levels)
        for (const auto& q : lv.cubes)
            if (q.mass > 0.0) out.push_back({lv.k, q.alpha});
    return out;
}

// nonzero cancellative coefficients grouped by carrying rectangle
struct RectPacket {
    CubeRef r1, r2;
    const std::vector<std::size_t>* m1 = nullptr;
    const std::vector<std::size_t>* m2 = nullptr;
    double mass = 0.0;
    double w2 = 0.0;
    std::vector<AtomCoeff> entries;
};

std::vector<RectPacket> group_by_rectangle(const ProductGrid& pg, const CoefficientTensor& t) {
    std::map<std::tuple<int, std::size_t, int, std::size_t>, std::size_t> pos;
    std::vector<RectPacket> out;
    for (std::size_t i = pg.b1.scaling_count; i < t.m1; ++i) {
        const HaarFunction& h1 = pg.b1.funcs[i];
        const DyadicCube& q1 = carrier(pg.b1, i);
        for (std::size_t j = pg.b2.scaling_count; j < t.m2; ++j) {
            const double c = t.at(i, j);
            if (c == 0.0) continue;
            const HaarFunction& h2 = pg.b2.funcs[j];
            const DyadicCube& q2 = carrier(pg.b2, j);
            const auto key = std::make_tuple(h1.level, h1.alpha, h2.level, h2.alpha);
            auto it = pos.find(key);
            if (it == pos.end()) {
                RectPacket r;
                r.r1 = {h1.level, h1.alpha};
                r.r2 = {h2.level, h2.alpha};
                r.m1 = &q1.members;
                r.m2 = &q2.members;
                r.mass = q1.mass * q2.mass;
                it = pos.emplace(key, out.size()).first;
                out.push_back(std::move(r));
            }
            out[it->second].entries.push_back({i, j, c});
            out[it->second].w2 += c * c;
        }
    }
    return out;
}

CoefficientTensor tensor_from_coeffs(const ProductGrid& pg, const std::vector<AtomCoeff>& coeffs,
                                     double scale) {
    CoefficientTensor t = zero_tensor(pg);
    for (const auto& e : coeffs) t.at(e.i, e.j) += scale * e.value;
    return t;
}

} // namespace

ProductGrid make_product_grid(const FinitePointSpace& s1, const DyadicGrid& g1,
                              const PointMassMeasure& mu1, const FinitePointSpace& s2,
                              const DyadicGrid& g2, const PointMassMeasure& mu2) {
    if (mu1.mass.size() != s1.n || mu2.mass.size() != s2.n)
        throw std::invalid_argument("measure size does not match the space");
    if (!g1.levels.empty() && g1.levels.front().point_cube.size() != s1.n)
        throw std::invalid_argument("first grid was built over a different space");
    if (!g2.levels.empty() && g2.levels.front().point_cube.size() != s2.n)
        throw std::invalid_argument("second grid was built over a different space");
    ProductGrid pg;
    pg.s1 = &s1;
    pg.s2 = &s2;
    pg.g1 = &g1;
    pg.g2 = &g2;
    pg.mu1 = &mu1;
    pg.mu2 = &mu2;
    pg.n1 = s1.n;
    pg.n2 = s2.n;
    pg.b1 = build_basis(g1, mu1);
    pg.b2 = build_basis(g2, mu2);
    pg.bi1 = build_ball_index(s1);
    pg.bi2 = build_ball_index(s2);
    return pg;
}

CoefficientTensor zero_tensor(const ProductGrid& pg) {
    CoefficientTensor t;
    t.m1 = pg.b1.funcs.size();
    t.m2 = pg.b2.funcs.size();
    t.c.assign(t.m1 * t.m2, 0.0);
    return t;
}

CoefficientTensor product_analyze(const ProductGrid& pg, const std::vector<double>& f) {
    if (f.size() != pg.n1 * pg.n2) throw std::invalid_argument("signal size mismatch");
    CoefficientTensor t = zero_tensor(pg);
    std::vector<double> stage(t.m1 * pg.n2);
    std::vector<double> col(pg.n1);
    for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1) col[x1] = f[x1 * pg.n2 + x2];
        const std::vector<double> a = full_analyze(pg.b1, *pg.mu1, col);
        for (std::size_t i = 0; i < t.m1; ++i) stage[i * pg.n2 + x2] = a[i];
    }
    std::vector<double> row(pg.n2);
    for (std::size_t i = 0; i < t.m1; ++i) {
        std::copy(stage.begin() + static_cast<std::ptrdiff_t>(i * pg.n2),
                  stage.begin() + static_cast<std::ptrdiff_t>((i + 1) * pg.n2), row.begin());
        const std::vector<double> a = full_analyze(pg.b2, *pg.mu2, row);
        std::copy(a.begin(), a.end(), t.c.begin() + static_cast<std::ptrdiff_t>(i * t.m2));
    }
    return t;
}

std::vector<double> product_synthesize(const ProductGrid& pg, const CoefficientTensor& t) {
    if (t.m1 != pg.b1.funcs.size() || t.m2 != pg.b2.funcs.size())
        throw std::invalid_argument("tensor shape mismatch");
    std::vector<double> stage(t.m1 * pg.n2);
    std::vector<double> row(t.m2);
    for (std::size_t i = 0; i < t.m1; ++i) {
        std::copy(t.c.begin() + static_cast<std::ptrdiff_t>(i * t.m2),
                  t.c.begin() + static_cast<std::ptrdiff_t>((i + 1) * t.m2), row.begin());
        const std::vector<double> v = full_synthesize(pg.b2, row);
        std::copy(v.begin(), v.end(), stage.begin() + static_cast<std::ptrdiff_t>(i * pg.n2));
    }
    std::vector<double> f(pg.n1 * pg.n2);
    std::vector<double> col(t.m1);
    for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
        for (std::size_t i = 0; i < t.m1; ++i) col[i] = stage[i * pg.n2 + x2];
        const std::vector<double> v = full_synthesize(pg.b1, col);
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1) f[x1 * pg.n2 + x2] = v[x1];
    }
    return f;
}

CoefficientTensor cancellative_part(const ProductGrid& pg, CoefficientTensor t) {
    if (t.m1 != pg.b1.funcs.size() || t.m2 != pg.b2.funcs.size())
        throw std::invalid_argument("tensor shape mismatch");
    for (std::size_t i = 0; i < t.m1; ++i)
        for (std::size_t j = 0; j < t.m2; ++j)
            if (i < pg.b1.scaling_count || j < pg.b2.scaling_count) t.at(i, j) = 0.0;
    return t;
}

CoefficientTensor lifting(const ProductGrid& pg, const std::vector<double>& f) {
    return cancellative_part(pg, product_analyze(pg, f));
}

std::vector<double> projection(const ProductGrid& pg, const CoefficientTensor& t) {
    return product_synthesize(pg, cancellative_part(pg, t));
}

std::vector<double> cancellative_projection(const ProductGrid& pg, const std::vector<double>& f) {
    return projection(pg, lifting(pg, f));
}

std::vector<double> square_function(const ProductGrid& pg, const CoefficientTensor& t) {
    if (t.m1 != pg.b1.funcs.size() || t.m2 != pg.b2.funcs.size())
        throw std::invalid_argument("tensor shape mismatch");
    std::vector<double> s2(pg.n1 * pg.n2, 0.0);
    for (std::size_t i = pg.b1.scaling_count; i < t.m1; ++i) {
        const DyadicCube& q1 = carrier(pg.b1, i);
        if (q1.mass <= 0.0) continue;
        for (std::size_t j = pg.b2.scaling_count; j < t.m2; ++j) {
            const double c = t.at(i, j);
            if (c == 0.0) continue;
            const DyadicCube& q2 = carrier(pg.b2, j);
            if (q2.mass <= 0.0) continue;
            const double add = c * c / (q1.mass * q2.mass);
            for (std::size_t x1 : q1.members)
                for (std::size_t x2 : q2.members) s2[x1 * pg.n2 + x2] += add;
        }
    }
    for (double& v : s2) v = std::sqrt(v);
    return s2;
}

std::vector<double> square_function_martingale(const ProductGrid& pg,
                                               const std::vector<double>& f) {
    if (f.size() != pg.n1 * pg.n2) throw std::invalid_argument("signal size mismatch");
    std::vector<double> s2(pg.n1 * pg.n2, 0.0);
    std::vector<double> col(pg.n1), row(pg.n2);
    std::vector<double> G(pg.n1 * pg.n2), H(pg.n1 * pg.n2);
    for (int k1 = pg.g1->k_min; k1 < pg.g1->k_max; ++k1) {
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
            for (std::size_t x1 = 0; x1 < pg.n1; ++x1) col[x1] = f[x1 * pg.n2 + x2];
            const std::vector<double> d = martingale_difference(*pg.g1, *pg.mu1, col, k1);
            for (std::size_t x1 = 0; x1 < pg.n1; ++x1) G[x1 * pg.n2 + x2] = d[x1];
        }
        for (int k2 = pg.g2->k_min; k2 < pg.g2->k_max; ++k2) {
            for (std::size_t x1 = 0; x1 < pg.n1; ++x1) {
                std::copy(G.begin() + static_cast<std::ptrdiff_t>(x1 * pg.n2),
                          G.begin() + static_cast<std::ptrdiff_t>((x1 + 1) * pg.n2), row.begin());
                const std::vector<double> d = martingale_difference(*pg.g2, *pg.mu2, row, k2);
                std::copy(d.begin(), d.end(),
                          H.begin() + static_cast<std::ptrdiff_t>(x1 * pg.n2));
            }
            for (const auto& q1 : pg.g1->level(k1).cubes) {
                if (q1.mass <= 0.0) continue;
                for (const auto& q2 : pg.g2->level(k2).cubes) {
                    if (q2.mass <= 0.0) continue;
                    double num = 0.0;
                    for (std::size_t x1 : q1.members) {
                        const double m1 = pg.mu1->mass[x1];
                        if (m1 <= 0.0) continue;
                        for (std::size_t x2 : q2.members) {
                            const double v = H[x1 * pg.n2 + x2];
                            num += v * v * m1 * pg.mu2->mass[x2];
                        }
                    }
                    if (num == 0.0) continue;
                    const double avg = num / (q1.mass * q2.mass);
                    for (std::size_t x1 : q1.members)
                        for (std::size_t x2 : q2.members) s2[x1 * pg.n2 + x2] += avg;
                }
            }
        }
    }
    for (double& v : s2) v = std::sqrt(v);
    return s2;
}

double product_l1(const ProductGrid& pg, const std::vector<double>& v) {
    double out = 0.0;
    for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
            out += std::abs(v[x1 * pg.n2 + x2]) * pg.mass(x1, x2);
    return out;
}

double product_l2(const ProductGrid& pg, const std::vector<double>& v) {
    double out = 0.0;
    for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
            const double y = v[x1 * pg.n2 + x2];
            out += y * y * pg.mass(x1, x2);
        }
    return std::sqrt(out);
}

double h1dd_norm(const ProductGrid& pg, const std::vector<double>& f) {
    return product_l1(pg, square_function(pg, lifting(pg, f)));
}

double s1_norm(const ProductGrid& pg, const CoefficientTensor& t) {
    return product_l1(pg, square_function(pg, t));
}

double s2_norm(const ProductGrid& pg, const CoefficientTensor& t) {
    double out = 0.0;
    for (std::size_t i = pg.b1.scaling_count; i < t.m1; ++i)
        for (std::size_t j = pg.b2.scaling_count; j < t.m2; ++j) out += t.at(i, j) * t.at(i, j);
    return std::sqrt(out);
}

std::vector<std::vector<char>> omega_family(const ProductGrid& pg, const CoefficientTensor& t) {
    std::set<std::vector<char>> seen;
    std::vector<std::vector<char>> fam;
    auto push = [&](std::vector<char> mask) {
        bool any = false;
        for (char c : mask)
            if (c) any = true;
        if (!any) return;
        if (seen.insert(mask).second) fam.push_back(std::move(mask));
    };

    push(std::vector<char>(pg.n1 * pg.n2, 1));

    const std::vector<CubeRef> cubes1 = all_cubes(*pg.g1);
    const std::vector<CubeRef> cubes2 = all_cubes(*pg.g2);
    for (const CubeRef& c1 : cubes1) {
        const auto& m1 = cube_at(*pg.g1, c1).members;
        for (const CubeRef& c2 : cubes2) {
            const auto& m2 = cube_at(*pg.g2, c2).members;
            std::vector<char> mask(pg.n1 * pg.n2, 0);
            for (std::size_t x1 : m1)
                for (std::size_t x2 : m2) mask[x1 * pg.n2 + x2] = 1;
            push(std::move(mask));
        }
    }

    const std::vector<double> S = square_function(pg, t);
    std::vector<double> vals;
    for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
            if (S[x1 * pg.n2 + x2] > 0.0 && pg.mass(x1, x2) > 0.0)
                vals.push_back(S[x1 * pg.n2 + x2]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (double v : vals) {
        std::vector<char> mask(pg.n1 * pg.n2, 0);
        for (std::size_t x = 0; x < mask.size(); ++x) mask[x] = S[x] >= v ? 1 : 0;
        // the union of the dyadic rectangles inside the level set trims the
        // non-rectangular fringe and can only push the ratio up
        std::vector<char> un(pg.n1 * pg.n2, 0);
        for (const CubeRef& c1 : cubes1) {
            const auto& m1 = cube_at(*pg.g1, c1).members;
            for (const CubeRef& c2 : cubes2) {
                const auto& m2 = cube_at(*pg.g2, c2).members;
                if (!rect_in_mask(m1, m2, mask, pg.n2)) continue;
                for (std::size_t x1 : m1)
                    for (std::size_t x2 : m2) un[x1 * pg.n2 + x2] = 1;
            }
        }
        push(std::move(mask));
        push(std::move(un));
    }
    return fam;
}

double c1_norm(const ProductGrid& pg, const CoefficientTensor& t,
               const std::vector<std::vector<char>>& family) {
    if (family.empty()) throw std::invalid_argument("empty candidate family");
    const std::vector<RectPacket> rects = group_by_rectangle(pg, t);
    double best = 0.0;
    for (const auto& mask : family) {
        if (mask.size() != pg.n1 * pg.n2)
            throw std::invalid_argument("candidate set has the wrong size");
        const double m = mask_mass(pg, mask);
        if (m <= 0.0) continue;
        double sum = 0.0;
        for (const auto& r : rects)
            if (rect_in_mask(*r.m1, *r.m2, mask, pg.n2)) sum += r.w2;
        best = std::max(best, std::sqrt(sum / m));
    }
    return best;
}

double bmodd_functional(const ProductGrid& pg, const std::vector<double>& f) {
    const CoefficientTensor t = lifting(pg, f);
    return c1_norm(pg, t, omega_family(pg, t));
}

double pairing(const ProductGrid& pg, const CoefficientTensor& s, const CoefficientTensor& t) {
    if (s.m1 != t.m1 || s.m2 != t.m2) throw std::invalid_argument("tensor shape mismatch");
    double out = 0.0;
    for (std::size_t i = pg.b1.scaling_count; i < s.m1; ++i)
        for (std::size_t j = pg.b2.scaling_count; j < s.m2; ++j) out += s.at(i, j) * t.at(i, j);
    return out;
}

AtomicDecomposition atomic_decompose(const ProductGrid& pg, const std::vector<double>& f,
                                     double ctilde) {
    if (!(ctilde > 0.0)) throw std::invalid_argument("threshold must be positive");
    AtomicDecomposition out;
    out.ctilde_used = ctilde;

    const CoefficientTensor t = lifting(pg, f);
    std::vector<RectPacket> rects = group_by_rectangle(pg, t);
    if (rects.empty()) return out;

    const std::vector<double> S = square_function(pg, t);
    double smax = 0.0, smin = std::numeric_limits<double>::infinity();
    for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
            const double v = S[x1 * pg.n2 + x2];
            if (pg.mass(x1, x2) > 0.0 && v > 0.0) {
                smax = std::max(smax, v);
                smin = std::min(smin, v);
            }
        }
    if (smax <= 0.0) return out;

    int k_hi = 0;
    while (std::ldexp(1.0, k_hi) >= smax) --k_hi;
    while (std::ldexp(1.0, k_hi + 1) < smax) ++k_hi;
    int k_lo = k_hi;
    while (std::ldexp(1.0, k_lo) >= smin) --k_lo;

    // level sets Omega_k = {S > 2^k} as masks over all points
    std::map<int, std::vector<char>> omega;
    for (int k = k_lo; k <= k_hi; ++k) {
        std::vector<char> mask(pg.n1 * pg.n2, 0);
        const double thr = std::ldexp(1.0, k);
        for (std::size_t x = 0; x < mask.size(); ++x) mask[x] = S[x] > thr ? 1 : 0;
        omega[k] = std::move(mask);
    }

    // deepest level where the rectangle fills more than half of itself
    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t ri = 0; ri < rects.size(); ++ri) {
        const RectPacket& r = rects[ri];
        int kr = k_lo - 1;
        for (int k = k_hi; k >= k_lo; --k) {
            const auto& mask = omega[k];
            double inter = 0.0;
            for (std::size_t x1 : *r.m1)
                for (std::size_t x2 : *r.m2)
                    if (mask[x1 * pg.n2 + x2]) inter += pg.mass(x1, x2);
            if (2.0 * inter > r.mass) {
                kr = k;
                break;
            }
        }
        if (kr < k_lo)
            throw std::logic_error("carrying rectangle escaped every level set");
        classes[kr].push_back(ri);
    }

    // support sets via the strong maximal function of the level-set indicator;
    // the threshold halves until every class rectangle fits inside
    std::map<int, std::vector<double>> ms;
    for (const auto& [k, ris] : classes) {
        (void)ris;
        std::vector<double> ind(pg.n1 * pg.n2, 0.0);
        const auto& mask = omega[k];
        for (std::size_t x = 0; x < ind.size(); ++x) ind[x] = mask[x] ? 1.0 : 0.0;
        ms[k] = strong_maximal(*pg.s1, *pg.mu1, *pg.s2, *pg.mu2, ind, pg.bi1, pg.bi2);
    }
    double ct = ctilde;
    std::map<int, std::vector<char>> tilde;
    for (;; ct *= 0.5, ++out.halvings) {
        if (out.halvings > 60)
            throw std::runtime_error("support threshold underflowed before covering the pieces");
        bool ok = true;
        tilde.clear();
        for (const auto& [k, ris] : classes) {
            std::vector<char> mask(pg.n1 * pg.n2, 0);
            const auto& m = ms[k];
            for (std::size_t x = 0; x < mask.size(); ++x) mask[x] = m[x] > ct ? 1 : 0;
            for (std::size_t ri : ris)
                if (!rect_in_mask(*rects[ri].m1, *rects[ri].m2, mask, pg.n2)) {
                    ok = false;
                    break;
                }
            tilde[k] = std::move(mask);
            if (!ok) break;
        }
        if (ok) break;
    }
    out.ctilde_used = ct;

    const std::vector<CubeRef> cubes1 = all_cubes(*pg.g1);
    const std::vector<CubeRef> cubes2 = all_cubes(*pg.g2);
    for (const auto& [k, ris] : classes) {
        AtomEntry atom;
        atom.k = k;
        atom.omega_tilde = tilde[k];
        atom.omega_tilde_mass = mask_mass(pg, atom.omega_tilde);
        double w2 = 0.0;
        for (std::size_t ri : ris) w2 += rects[ri].w2;
        atom.lambda = std::sqrt(w2) * std::sqrt(atom.omega_tilde_mass);

        // maximal dyadic rectangles of the support set, in scan order
        std::vector<std::pair<CubeRef, CubeRef>> contained;
        for (const CubeRef& c1 : cubes1) {
            const auto& m1 = cube_at(*pg.g1, c1).members;
            for (const CubeRef& c2 : cubes2) {
                const auto& m2 = cube_at(*pg.g2, c2).members;
                if (rect_in_mask(m1, m2, atom.omega_tilde, pg.n2)) contained.push_back({c1, c2});
            }
        }
        std::vector<std::pair<CubeRef, CubeRef>> maximal;
        for (const auto& r : contained) {
            bool top = true;
            for (const auto& o : contained) {
                if (&o == &r) continue;
                const bool inside = cube_within(*pg.g1, r.first, o.first) &&
                                    cube_within(*pg.g2, r.second, o.second);
                const bool strict = o.first.k < r.first.k || o.second.k < r.second.k ||
                                    o.first.alpha != r.first.alpha ||
                                    o.second.alpha != r.second.alpha;
                if (inside && strict) {
                    top = false;
                    break;
                }
            }
            if (top) maximal.push_back(r);
        }
        std::sort(maximal.begin(), maximal.end(), [](const auto& a, const auto& b) {
            return std::make_tuple(a.first.k, a.first.alpha, a.second.k, a.second.alpha) <
                   std::make_tuple(b.first.k, b.first.alpha, b.second.k, b.second.alpha);
        });
        // the scan keeps the coarsest ref of a single-child chain; store the
        // deepest equivalent so scale-based consumers see the true size
        for (auto& r : maximal) {
            r.first = tightest_ref(*pg.g1, r.first);
            r.second = tightest_ref(*pg.g2, r.second);
        }

        std::vector<AtomPiece> pieces(maximal.size());
        for (std::size_t p = 0; p < maximal.size(); ++p) {
            pieces[p].r1 = maximal[p].first;
            pieces[p].r2 = maximal[p].second;
        }
        for (std::size_t ri : ris) {
            const RectPacket& r = rects[ri];
            bool placed = false;
            for (std::size_t p = 0; p < maximal.size(); ++p) {
                if (cube_within(*pg.g1, r.r1, maximal[p].first) &&
                    cube_within(*pg.g2, r.r2, maximal[p].second)) {
                    for (const auto& e : r.entries)
                        pieces[p].coeffs.push_back({e.i, e.j, e.value / atom.lambda});
                    placed = true;
                    break;
                }
            }
            if (!placed)
                throw std::logic_error("class rectangle not inside any maximal rectangle");
        }
        for (auto& p : pieces)
            if (!p.coeffs.empty()) atom.pieces.push_back(std::move(p));

        out.sum_lambda += atom.lambda;
        out.atoms.push_back(std::move(atom));
    }

    // reconstruction against the cancellative projection
    std::vector<double> rec(pg.n1 * pg.n2, 0.0);
    for (const auto& atom : out.atoms) {
        const std::vector<double> av = atom_function(pg, atom);
        for (std::size_t x = 0; x < rec.size(); ++x) rec[x] += atom.lambda * av[x];
    }
    const std::vector<double> proj = projection(pg, t);
    for (std::size_t x = 0; x < rec.size(); ++x)
        out.recon_error = std::max(out.recon_error, std::abs(rec[x] - proj[x]));
    return out;
}

std::vector<double> atom_function(const ProductGrid& pg, const AtomEntry& atom) {
    CoefficientTensor t = zero_tensor(pg);
    for (const auto& p : atom.pieces)
        for (const auto& e : p.coeffs) t.at(e.i, e.j) += e.value;
    return product_synthesize(pg, t);
}

std::vector<double> piece_function(const ProductGrid& pg, const AtomEntry& atom,
                                   const AtomPiece& piece) {
    (void)atom;
    return product_synthesize(pg, tensor_from_coeffs(pg, piece.coeffs, 1.0));
}

AtomCheck validate_atom(const ProductGrid& pg, const AtomEntry& atom, double tol) {
    AtomCheck out;
    if (atom.omega_tilde.size() != pg.n1 * pg.n2)
        throw std::invalid_argument("support mask has the wrong size");
    const std::vector<double> a = atom_function(pg, atom);

    for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
        for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
            if (!atom.omega_tilde[x1 * pg.n2 + x2] && pg.mass(x1, x2) > 0.0)
                out.support_leak = std::max(out.support_leak, std::abs(a[x1 * pg.n2 + x2]));
    if (out.support_leak > tol) out.failures.push_back("atom leaks outside its support set");

    const double mass = atom.omega_tilde_mass > 0.0 ? atom.omega_tilde_mass
                                                    : mask_mass(pg, atom.omega_tilde);
    out.l2_times_sqrt_mass = product_l2(pg, a) * std::sqrt(mass);
    if (atom.pieces.empty() && out.l2_times_sqrt_mass == 0.0) {
        out.pass = out.failures.empty();
        return out;
    }
    if (out.l2_times_sqrt_mass > 1.0 + tol)
        out.failures.push_back("atom L2 norm exceeds the mass bound");

    double size_sum = 0.0;
    for (const auto& piece : atom.pieces) {
        const std::vector<double> pv = piece_function(pg, atom, piece);
        const auto& m1 = cube_at(*pg.g1, piece.r1).members;
        const auto& m2 = cube_at(*pg.g2, piece.r2).members;
        std::vector<char> rmask(pg.n1 * pg.n2, 0);
        for (std::size_t x1 : m1)
            for (std::size_t x2 : m2) rmask[x1 * pg.n2 + x2] = 1;
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
            for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
                if (!rmask[x1 * pg.n2 + x2] && pg.mass(x1, x2) > 0.0)
                    out.worst_localization =
                        std::max(out.worst_localization, std::abs(pv[x1 * pg.n2 + x2]));

        for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
            if (pg.mu2->mass[x2] <= 0.0) continue;
            double integ = 0.0;
            for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
                integ += pv[x1 * pg.n2 + x2] * pg.mu1->mass[x1];
            out.worst_cancellation = std::max(out.worst_cancellation, std::abs(integ));
        }
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1) {
            if (pg.mu1->mass[x1] <= 0.0) continue;
            double integ = 0.0;
            for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
                integ += pv[x1 * pg.n2 + x2] * pg.mu2->mass[x2];
            out.worst_cancellation = std::max(out.worst_cancellation, std::abs(integ));
        }
        const double l2 = product_l2(pg, pv);
        size_sum += l2 * l2;
    }
    if (out.worst_localization > tol) out.failures.push_back("piece leaks outside its rectangle");
    if (out.worst_cancellation > tol)
        out.failures.push_back("piece marginal integral fails to vanish");
    out.size_sum = size_sum * mass;
    if (out.size_sum > 1.0 + tol)
        out.failures.push_back("piece L2 norms exceed the size bound");

    out.pass = out.failures.empty();
    return out;
}

StructureReport structure_check(const FinitePointSpace& s1, const PointMassMeasure& mu1,
                                const AdjacentSystems& sys1, const FinitePointSpace& s2,
                                const PointMassMeasure& mu2, const AdjacentSystems& sys2,
                                const std::vector<double>& f, const StructureOptions& opt) {
    if (opt.base_t1 >= sys1.T || opt.base_t2 >= sys2.T)
        throw std::invalid_argument("base system index out of range");
    StructureReport rep;

    std::vector<std::vector<ProductGrid>> pg(sys1.T);
    for (std::size_t t1 = 0; t1 < sys1.T; ++t1)
        for (std::size_t t2 = 0; t2 < sys2.T; ++t2)
            pg[t1].push_back(
                make_product_grid(s1, sys1.grids[t1], mu1, s2, sys2.grids[t2], mu2));

    const ProductGrid& base = pg[opt.base_t1][opt.base_t2];
    rep.base_h1 = h1dd_norm(base, f);
    const AtomicDecomposition dec = atomic_decompose(base, f, opt.ctilde);

    // one coefficient bucket per system pair, plus a leftover for pieces whose
    // circumball no system sandwiches
    std::vector<std::vector<CoefficientTensor>> bucket(sys1.T);
    for (std::size_t t1 = 0; t1 < sys1.T; ++t1)
        for (std::size_t t2 = 0; t2 < sys2.T; ++t2) bucket[t1].push_back(zero_tensor(base));
    CoefficientTensor leftover = zero_tensor(base);
    std::vector<std::vector<std::size_t>> counts(sys1.T, std::vector<std::size_t>(sys2.T, 0));

    auto assign_factor = [](const FinitePointSpace& s, const AdjacentSystems& sys,
                            const DyadicGrid& gbase, const CubeRef& r) -> std::ptrdiff_t {
        const DyadicCube& q = cube_at(gbase, r);
        const double radius = gbase.C1 * gbase.scale(r.k);
        const std::vector<std::size_t> b = ball(s, q.center, radius);
        for (std::size_t t = 0; t < sys.T; ++t) {
            const DyadicGrid& g = sys.grids[t];
            const auto k = window_level(g.delta, radius, g.k_min, g.k_max);
            if (!k) continue;
            const auto& q2 = cube_at(g, containing_cube(g, q.center, *k));
            if (std::includes(q2.members.begin(), q2.members.end(), b.begin(), b.end()))
                return static_cast<std::ptrdiff_t>(t);
        }
        return -1;
    };

    for (const auto& atom : dec.atoms) {
        for (const auto& piece : atom.pieces) {
            ++rep.pieces_total;
            const std::ptrdiff_t t1 = assign_factor(s1, sys1, *base.g1, piece.r1);
            const std::ptrdiff_t t2 = assign_factor(s2, sys2, *base.g2, piece.r2);
            CoefficientTensor& dst =
                (t1 >= 0 && t2 >= 0)
                    ? bucket[static_cast<std::size_t>(t1)][static_cast<std::size_t>(t2)]
                    : leftover;
            if (t1 >= 0 && t2 >= 0)
                ++counts[static_cast<std::size_t>(t1)][static_cast<std::size_t>(t2)];
            else
                ++rep.pieces_unassigned;
            for (const auto& e : piece.coeffs) dst.at(e.i, e.j) += atom.lambda * e.value;
        }
    }

    const std::vector<double> proj = cancellative_projection(base, f);
    std::vector<double> recon(proj.size(), 0.0);
    for (std::size_t t1 = 0; t1 < sys1.T; ++t1) {
        for (std::size_t t2 = 0; t2 < sys2.T; ++t2) {
            const std::vector<double> part = product_synthesize(base, bucket[t1][t2]);
            for (std::size_t x = 0; x < recon.size(); ++x) recon[x] += part[x];
            StructureBucket sb;
            sb.t1 = t1;
            sb.t2 = t2;
            sb.pieces = counts[t1][t2];
            sb.h1 = h1dd_norm(pg[t1][t2], part);
            rep.sum_h1 += sb.h1;
            rep.buckets.push_back(sb);
        }
    }
    const std::vector<double> rest = product_synthesize(base, leftover);
    for (std::size_t x = 0; x < recon.size(); ++x) recon[x] += rest[x];
    rep.unassigned_h1 = h1dd_norm(base, rest);
    for (std::size_t x = 0; x < recon.size(); ++x)
        rep.recon_error = std::max(rep.recon_error, std::abs(recon[x] - proj[x]));
    rep.ratio = rep.base_h1 > 0.0 ? rep.sum_h1 / rep.base_h1 : 0.0;
    rep.pass = rep.recon_error <= kReconTol;

    rep.bmo.assign(sys1.T, std::vector<double>(sys2.T, 0.0));
    rep.bmo_min = std::numeric_limits<double>::infinity();
    for (std::size_t t1 = 0; t1 < sys1.T; ++t1)
        for (std::size_t t2 = 0; t2 < sys2.T; ++t2) {
            rep.bmo[t1][t2] = bmodd_functional(pg[t1][t2], f);
            rep.bmo_min = std::min(rep.bmo_min, rep.bmo[t1][t2]);
            rep.bmo_max = std::max(rep.bmo_max, rep.bmo[t1][t2]);
        }
    if (!std::isfinite(rep.bmo_min)) rep.bmo_min = 0.0;
    return rep;
}

} // namespace dyadic
