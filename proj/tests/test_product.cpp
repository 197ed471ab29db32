#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyadic/corpus.hpp"
#include "dyadic/grid.hpp"
#include "dyadic/haar.hpp"
#include "dyadic/product.hpp"
#include "dyadic/rng.hpp"
#include "dyadic/space.hpp"

using namespace dyadic;

namespace {

// the iterated transform in the opposite factor order: rows first, then columns
CoefficientTensor analyze_rows_first(const ProductGrid& pg, const std::vector<double>& f) {
    const std::size_t m1 = pg.b1.funcs.size(), m2 = pg.b2.funcs.size();
    std::vector<double> stage(pg.n1 * m2);
    std::vector<double> row(pg.n2);
    for (std::size_t x1 = 0; x1 < pg.n1; ++x1) {
        std::copy(f.begin() + static_cast<std::ptrdiff_t>(x1 * pg.n2),
                  f.begin() + static_cast<std::ptrdiff_t>((x1 + 1) * pg.n2), row.begin());
        const auto a = full_analyze(pg.b2, *pg.mu2, row);
        std::copy(a.begin(), a.end(), stage.begin() + static_cast<std::ptrdiff_t>(x1 * m2));
    }
    CoefficientTensor t;
    t.m1 = m1;
    t.m2 = m2;
    t.c.assign(m1 * m2, 0.0);
    std::vector<double> col(pg.n1);
    for (std::size_t j = 0; j < m2; ++j) {
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1) col[x1] = stage[x1 * m2 + j];
        const auto a = full_analyze(pg.b1, *pg.mu1, col);
        for (std::size_t i = 0; i < m1; ++i) t.at(i, j) = a[i];
    }
    return t;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

} // namespace

TEST_CASE("product transforms") {
    const auto c1 = make_corpus("binary-lattice", 8, 1);
    const auto c2 = make_corpus("perturbed-grid2d", 9, 2);
    const auto r1 = auto_k_range(c1.space, c1.delta);
    const auto r2 = auto_k_range(c2.space, c2.delta);
    const auto g1 = build_grid(c1.space, c1.mu, c1.delta, r1.first, r1.second, 1, 0);
    const auto g2 = build_grid(c2.space, c2.mu, c2.delta, r2.first, r2.second, 2,
                               c2.distinguished);
    const auto pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);
    Rng rng(101);
    std::vector<double> f(pg.n1 * pg.n2);
    for (auto& v : f) v = rng.normal();

    SUBCASE("factor order does not matter") {
        const auto t = product_analyze(pg, f);
        const auto o = analyze_rows_first(pg, f);
        REQUIRE(t.c.size() == o.c.size());
        for (std::size_t i = 0; i < t.c.size(); ++i)
            CHECK(std::abs(t.c[i] - o.c[i]) <= 1e-10);
    }
    SUBCASE("round trip and Plancherel") {
        const auto t = product_analyze(pg, f);
        const auto back = product_synthesize(pg, t);
        CHECK(max_abs_diff(f, back) <= 1e-10);
        const double energy = std::inner_product(t.c.begin(), t.c.end(), t.c.begin(), 0.0);
        const double l2 = product_l2(pg, f);
        CHECK(energy == doctest::Approx(l2 * l2).epsilon(1e-10));
    }
    SUBCASE("constants carry no cancellative content") {
        const auto t = lifting(pg, std::vector<double>(pg.n1 * pg.n2, 2.5));
        for (double v : t.c) CHECK(std::abs(v) <= 1e-12);
    }
    SUBCASE("a product of basis functions is a unit coefficient") {
        const std::size_t i0 = pg.b1.scaling_count;     // first cancellative in factor 1
        const std::size_t j0 = pg.b2.scaling_count + 1; // some cancellative in factor 2
        REQUIRE(j0 < pg.b2.funcs.size());
        const auto v1 = haar_values(pg.b1, pg.b1.funcs[i0]);
        const auto v2 = haar_values(pg.b2, pg.b2.funcs[j0]);
        std::vector<double> prod(pg.n1 * pg.n2);
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
            for (std::size_t x2 = 0; x2 < pg.n2; ++x2) prod[x1 * pg.n2 + x2] = v1[x1] * v2[x2];
        const auto t = product_analyze(pg, prod);
        for (std::size_t i = 0; i < t.m1; ++i)
            for (std::size_t j = 0; j < t.m2; ++j)
                CHECK(std::abs(t.at(i, j) - ((i == i0 && j == j0) ? 1.0 : 0.0)) <= 1e-10);
        // the projection leaves a pure cancellative tensor untouched
        const auto back = cancellative_projection(pg, prod);
        CHECK(max_abs_diff(prod, back) <= 1e-10);
    }
    SUBCASE("lifting is idempotent through the projection") {
        const auto p = cancellative_projection(pg, f);
        const auto again = cancellative_projection(pg, p);
        CHECK(max_abs_diff(p, again) <= 1e-10);
    }
}

TEST_CASE("square functions") {
    const auto c1 = make_corpus("binary-lattice", 8, 3);
    const auto c2 = make_corpus("binary-lattice", 8, 4);
    const auto g1 = build_grid(c1.space, c1.mu, 0.5, 0, 3, 3, 0);
    const auto g2 = build_grid(c2.space, c2.mu, 0.5, 0, 3, 4, 0);
    const auto pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);

    SUBCASE("a single coefficient spreads over its carrying rectangle") {
        auto t = zero_tensor(pg);
        const std::size_t i0 = pg.b1.scaling_count, j0 = pg.b2.scaling_count;
        t.at(i0, j0) = 1.0;
        const auto& h1 = pg.b1.funcs[i0];
        const auto& h2 = pg.b2.funcs[j0];
        const auto& q1 = pg.g1->level(h1.level).cubes[h1.alpha];
        const auto& q2 = pg.g2->level(h2.level).cubes[h2.alpha];
        const double expect = 1.0 / std::sqrt(q1.mass * q2.mass);
        const auto S = square_function(pg, t);
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1) {
            const bool in1 = std::binary_search(q1.members.begin(), q1.members.end(), x1);
            for (std::size_t x2 = 0; x2 < pg.n2; ++x2) {
                const bool in2 = std::binary_search(q2.members.begin(), q2.members.end(), x2);
                CHECK(S[x1 * pg.n2 + x2] == doctest::Approx(in1 && in2 ? expect : 0.0));
            }
        }
        CHECK(product_l1(pg, S) == doctest::Approx(std::sqrt(q1.mass * q2.mass)));
        CHECK(s1_norm(pg, t) == doctest::Approx(std::sqrt(q1.mass * q2.mass)));

        const auto fam = omega_family(pg, t);
        CHECK(c1_norm(pg, t, fam) == doctest::Approx(1.0 / std::sqrt(q1.mass * q2.mass)));
    }
    SUBCASE("coefficient and martingale forms agree pointwise") {
        Rng rng(7);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> f(pg.n1 * pg.n2);
            for (auto& v : f) v = rng.normal();
            const auto S1 = square_function(pg, lifting(pg, f));
            const auto S2 = square_function_martingale(pg, f);
            CHECK(max_abs_diff(S1, S2) <= 1e-10);
        }
    }
    SUBCASE("sequence norms line up with function norms") {
        Rng rng(15);
        std::vector<double> f(pg.n1 * pg.n2);
        for (auto& v : f) v = rng.normal();
        const auto t = lifting(pg, f);
        CHECK(s1_norm(pg, t) == doctest::Approx(h1dd_norm(pg, f)).epsilon(1e-12));
        const auto fam = omega_family(pg, t);
        CHECK(c1_norm(pg, t, fam) == doctest::Approx(bmodd_functional(pg, f)).epsilon(1e-12));
    }
}

TEST_CASE("pairing against the sequence norms") {
    const auto c1 = make_corpus("binary-lattice", 8, 5);
    const auto c2 = make_corpus("binary-lattice", 8, 6);
    const auto g1 = build_grid(c1.space, c1.mu, 0.5, 0, 3, 5, 0);
    const auto g2 = build_grid(c2.space, c2.mu, 0.5, 0, 3, 6, 0);
    const auto pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);

    SUBCASE("one shared rectangle meets the bound with equality, exactly") {
        auto s = zero_tensor(pg);
        auto t = zero_tensor(pg);
        const std::size_t i0 = pg.b1.scaling_count, j0 = pg.b2.scaling_count;
        s.at(i0, j0) = 1.375; // few significand bits keep every step exact
        t.at(i0, j0) = 2.25;
        const double lhs = std::abs(pairing(pg, s, t));
        const auto fam = omega_family(pg, t);
        const double rhs = s1_norm(pg, s) * c1_norm(pg, t, fam);
        CHECK(lhs == rhs); // bitwise: masses are powers of two
        CHECK(lhs == 1.375 * 2.25);
    }
    SUBCASE("disjoint supports pair to zero") {
        auto s = zero_tensor(pg);
        auto t = zero_tensor(pg);
        s.at(pg.b1.scaling_count, pg.b2.scaling_count) = 3.0;
        t.at(pg.b1.scaling_count + 1, pg.b2.scaling_count + 1) = 4.0;
        CHECK(pairing(pg, s, t) == 0.0);
    }
    SUBCASE("random pairs stay within a bounded ratio of the norm product") {
        Rng rng(23);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            auto s = zero_tensor(pg);
            auto t = zero_tensor(pg);
            for (std::size_t i = pg.b1.scaling_count; i < s.m1; ++i)
                for (std::size_t j = pg.b2.scaling_count; j < s.m2; ++j) {
                    s.at(i, j) = rng.normal();
                    t.at(i, j) = rng.normal();
                }
            const double lhs = std::abs(pairing(pg, s, t));
            const double rhs = s1_norm(pg, s) * c1_norm(pg, t, omega_family(pg, t));
            REQUIRE(rhs > 0.0);
            worst = std::max(worst, lhs / rhs);
        }
        CHECK(worst > 0.0);
        CHECK(std::isfinite(worst));
        // the certified family keeps the observed ratio small; freeze a ceiling
        CHECK(worst <= 8.0);
    }
}

TEST_CASE("atomic decomposition") {
    const auto c1 = make_corpus("binary-lattice", 8, 7);
    const auto c2 = make_corpus("binary-lattice", 8, 8);
    const auto g1 = build_grid(c1.space, c1.mu, 0.5, 0, 3, 7, 0);
    const auto g2 = build_grid(c2.space, c2.mu, 0.5, 0, 3, 8, 0);
    const auto pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);

    SUBCASE("zero input, empty decomposition") {
        const auto d = atomic_decompose(pg, std::vector<double>(pg.n1 * pg.n2, 0.0));
        CHECK(d.atoms.empty());
        CHECK(d.sum_lambda == 0.0);
        CHECK(d.recon_error == 0.0);
    }
    SUBCASE("a single product basis function is one atom") {
        const std::size_t i0 = pg.b1.scaling_count, j0 = pg.b2.scaling_count;
        const auto v1 = haar_values(pg.b1, pg.b1.funcs[i0]);
        const auto v2 = haar_values(pg.b2, pg.b2.funcs[j0]);
        std::vector<double> f(pg.n1 * pg.n2);
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
            for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
                f[x1 * pg.n2 + x2] = 4.0 * v1[x1] * v2[x2];
        const auto d = atomic_decompose(pg, f);
        REQUIRE(d.atoms.size() == 1);
        CHECK(d.recon_error <= 1e-10);
        const auto chk = validate_atom(pg, d.atoms[0], 1e-10);
        for (const auto& why : chk.failures) { CAPTURE(why); }
        CHECK(chk.pass);
        CHECK(chk.l2_times_sqrt_mass == doctest::Approx(1.0));
        CHECK(d.sum_lambda > 0.0);
    }
    SUBCASE("random signals reconstruct and every atom validates") {
        Rng rng(31);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> f(pg.n1 * pg.n2);
            for (auto& v : f) v = rng.normal();
            const auto d = atomic_decompose(pg, f);
            CHECK(d.recon_error <= 1e-8);
            CHECK(d.ctilde_used > 0.0);
            CHECK(d.ctilde_used <= 0.25);
            double lam = 0.0;
            for (const auto& a : d.atoms) {
                const auto chk = validate_atom(pg, a, 1e-10);
                for (const auto& why : chk.failures) { CAPTURE(why); }
                CHECK(chk.pass);
                CHECK(a.lambda >= 0.0);
                lam += a.lambda;
            }
            CHECK(lam == doctest::Approx(d.sum_lambda));
            const double h1 = h1dd_norm(pg, f);
            if (h1 > 0.0) CHECK(d.sum_lambda / h1 <= 100.0); // recorded, generously capped
        }
    }
    SUBCASE("an oversized threshold halves itself into range") {
        Rng rng(37);
        std::vector<double> f(pg.n1 * pg.n2);
        for (auto& v : f) v = rng.normal();
        const auto d = atomic_decompose(pg, f, 64.0);
        CHECK(d.halvings >= 7); // the strong maximal function never exceeds 1 here
        CHECK(d.ctilde_used < 1.0);
        CHECK(d.recon_error <= 1e-8);
    }
    SUBCASE("validate_atom catches injected faults") {
        Rng rng(41);
        std::vector<double> f(pg.n1 * pg.n2);
        for (auto& v : f) v = rng.normal();
        const auto d = atomic_decompose(pg, f);
        REQUIRE(!d.atoms.empty());

        auto inflated = d.atoms[0];
        for (auto& p : inflated.pieces)
            for (auto& e : p.coeffs) e.value *= 2.0;
        CHECK_FALSE(validate_atom(pg, inflated, 1e-10).pass); // size normalization broken

        auto leaky = d.atoms[0];
        REQUIRE(!leaky.pieces.empty());
        REQUIRE(!leaky.pieces[0].coeffs.empty());
        leaky.pieces[0].coeffs[0].i = 0; // a scaling index kills the cancellation
        const auto chk = validate_atom(pg, leaky, 1e-10);
        CHECK_FALSE(chk.pass);
        CHECK(chk.worst_cancellation > 1e-10);

        AtomEntry empty;
        empty.omega_tilde.assign(pg.n1 * pg.n2, 0);
        CHECK(validate_atom(pg, empty, 1e-10).pass); // nothing claimed, nothing violated
    }
}

TEST_CASE("structure check across system pairs") {
    const auto c1 = make_corpus("binary-lattice", 8, 9);
    const auto c2 = make_corpus("binary-lattice", 8, 10);
    const auto r1 = auto_k_range(c1.space, 0.5);
    const auto r2 = auto_k_range(c2.space, 0.5);

    SUBCASE("wide level range leaves nothing unassigned") {
        const auto sys1 =
            build_adjacent_systems(c1.space, c1.mu, 0.5, r1.first - 4, r1.second, 2, 9);
        const auto sys2 =
            build_adjacent_systems(c2.space, c2.mu, 0.5, r2.first - 4, r2.second, 2, 10);

        // one product basis function sitting at a middle level
        const auto& g1 = sys1.grids[0];
        const auto& g2 = sys2.grids[0];
        const auto pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);
        std::size_t i0 = pg.b1.scaling_count, j0 = pg.b2.scaling_count;
        for (std::size_t i = i0; i < pg.b1.funcs.size(); ++i)
            if (pg.b1.funcs[i].level == 1) { i0 = i; break; }
        for (std::size_t j = j0; j < pg.b2.funcs.size(); ++j)
            if (pg.b2.funcs[j].level == 1) { j0 = j; break; }
        const auto v1 = haar_values(pg.b1, pg.b1.funcs[i0]);
        const auto v2 = haar_values(pg.b2, pg.b2.funcs[j0]);
        std::vector<double> f(pg.n1 * pg.n2);
        for (std::size_t x1 = 0; x1 < pg.n1; ++x1)
            for (std::size_t x2 = 0; x2 < pg.n2; ++x2)
                f[x1 * pg.n2 + x2] = v1[x1] * v2[x2];

        const auto rep = structure_check(c1.space, c1.mu, sys1, c2.space, c2.mu, sys2, f);
        CHECK(rep.pass);
        CHECK(rep.recon_error <= 1e-10);
        CHECK(rep.pieces_total == 1);
        CHECK(rep.pieces_unassigned == 0);
        std::size_t bucketed = 0;
        for (const auto& b : rep.buckets) bucketed += b.pieces;
        CHECK(bucketed == 1);
        CHECK(rep.base_h1 > 0.0);
        CHECK(rep.sum_h1 > 0.0);
        CHECK(rep.ratio > 0.0);
        REQUIRE(rep.bmo.size() == 2);
        REQUIRE(rep.bmo[0].size() == 2);
        CHECK(rep.bmo_min <= rep.bmo_max);
        CHECK(rep.bmo_min > 0.0);
    }
    SUBCASE("random signals: accounting always closes") {
        const auto sys1 =
            build_adjacent_systems(c1.space, c1.mu, 0.5, r1.first - 4, r1.second, 2, 11);
        const auto sys2 =
            build_adjacent_systems(c2.space, c2.mu, 0.5, r2.first - 4, r2.second, 2, 12);
        Rng rng(47);
        std::vector<double> f(64);
        for (auto& v : f) v = rng.normal();
        const auto rep = structure_check(c1.space, c1.mu, sys1, c2.space, c2.mu, sys2, f);
        CHECK(rep.pass);
        CHECK(rep.recon_error <= 1e-10);
        std::size_t bucketed = 0;
        for (const auto& b : rep.buckets) bucketed += b.pieces;
        CHECK(bucketed + rep.pieces_unassigned == rep.pieces_total);
        CHECK(rep.pieces_total > 0);
        CHECK(std::isfinite(rep.ratio));
    }
    SUBCASE("a range with no room below the root strands the coarse pieces") {
        const auto sys1 = build_adjacent_systems(c1.space, c1.mu, 0.5, r1.first, r1.second, 2, 13);
        const auto sys2 = build_adjacent_systems(c2.space, c2.mu, 0.5, r2.first, r2.second, 2, 14);
        Rng rng(53);
        std::vector<double> f(64);
        for (auto& v : f) v = rng.normal();
        const auto rep = structure_check(c1.space, c1.mu, sys1, c2.space, c2.mu, sys2, f);
        CHECK(rep.pass); // reassembly is exact even when buckets go begging
        CHECK(rep.pieces_unassigned > 0);
        CHECK(rep.unassigned_h1 > 0.0);
    }
}
