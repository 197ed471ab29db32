// The ten gate checks for this library, one line of output each. Every line
// starts with [PASS] or [FAIL]; the process exit code is the number of
// failures. Tolerances and recorded constants live at the top and nowhere
// else.

#include "dyadic/cli.hpp"
#include "dyadic/corpus.hpp"
#include "dyadic/grid.hpp"
#include "dyadic/haar.hpp"
#include "dyadic/io.hpp"
#include "dyadic/maximal.hpp"
#include "dyadic/product.hpp"
#include "dyadic/rng.hpp"
#include "dyadic/space.hpp"
#include "dyadic/weights.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

using namespace dyadic;

namespace {

constexpr double kTolTransform = 1e-12;      // lattice transform against the cascade
constexpr double kBudgetTransformSec = 5.0;  // wall budget for that comparison
constexpr double kTolGram = 1e-10;           // Gram entries and unit norms
constexpr double kTolCancel = 1e-12;         // vanishing integrals
constexpr double kTolRoundTrip = 1e-10;      // analyze/synthesize round trip
constexpr double kTolEnergy = 1e-10;         // relative energy identity defect
constexpr double kTolAtom = 1e-10;           // per-atom validation
constexpr double kTolAtomRecon = 1e-8;       // atomic reconstruction
constexpr double kTolSquare = 1e-10;         // square-function form agreement

// Frozen from the first accepted run (seed 12345). Later runs must not exceed
// them; a regression here means the pairing or the decomposition changed.
// Observed: 0.39479067142626756 and 1.7198775294702044, padded ~3e-4 for libm
// drift across platforms.
constexpr double kRecordedPairingRatioMax = 0.3949;
constexpr double kRecordedSumLambdaFactor = 1.7204;

constexpr double kInf = std::numeric_limits<double>::infinity();

int g_failed = 0;

struct GridRecord {
    std::string label;
    DyadicGrid grid;
    PointMassMeasure mu;
};
std::vector<GridRecord> g_registry;

void remember(std::string label, const DyadicGrid& g, const PointMassMeasure& mu) {
    g_registry.push_back({std::move(label), g, mu});
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void criterion(int num, const char* label, const std::function<bool(std::string&)>& body) {
    std::string note;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(note);
    } catch (const std::exception& e) {
        note = std::string("exception: ") + e.what();
        ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s%s%s (%.2fs)\n", ok ? "PASS" : "FAIL", num, label,
                note.empty() ? "" : " | ", note.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

// keeps the nested command-line runs from interleaving with the gate lines
struct StdoutSilencer {
    int saved = -1;
    StdoutSilencer() {
        std::fflush(stdout);
        saved = ::dup(1);
        const int nul = ::open("/dev/null", O_WRONLY);
        ::dup2(nul, 1);
        ::close(nul);
    }
    ~StdoutSilencer() {
        std::fflush(stdout);
        ::dup2(saved, 1);
        ::close(saved);
    }
};

// orthonormal fast transform on 2^m uniform points; detail[k][j] is the
// level-k block-j coefficient, scaling the final fully averaged value
struct FhtResult {
    std::vector<std::vector<double>> detail;
    double scaling = 0.0;
};

FhtResult fht(std::vector<double> v) {
    const double inv = 1.0 / std::sqrt(2.0);
    std::size_t m = 0;
    while ((std::size_t(1) << m) < v.size()) ++m;
    FhtResult out;
    out.detail.resize(m);
    for (std::size_t k = m; k-- > 0;) {
        const std::size_t half = v.size() / 2;
        std::vector<double> sums(half), diffs(half);
        for (std::size_t j = 0; j < half; ++j) {
            sums[j] = (v[2 * j] + v[2 * j + 1]) * inv;
            diffs[j] = (v[2 * j] - v[2 * j + 1]) * inv;
        }
        out.detail[k] = std::move(diffs);
        v = std::move(sums);
    }
    out.scaling = v[0];
    return out;
}

struct Lattice {
    CorpusData c;
    DyadicGrid g;
};

Lattice canonical_lattice(std::size_t n) {
    Lattice L;
    L.c = make_corpus("binary-lattice", n, 1);
    GridOptions opt;
    opt.explicit_centers = binary_lattice_centers(n);
    int m = 0;
    while ((std::size_t(1) << m) < n) ++m;
    L.g = build_grid(L.c.space, L.c.mu, 0.5, 0, m, 1, 0, opt);
    return L;
}

std::vector<double> normal_signal(Rng& rng, std::size_t n) {
    std::vector<double> f(n);
    for (auto& v : f) v = rng.normal();
    return f;
}

// ---- criterion bodies ----

bool crit_transform(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 1024;
    Lattice L = canonical_lattice(n);
    remember("binary-lattice-1024", L.g, L.c.mu);
    const HaarBasis basis = build_basis(L.g, L.c.mu);
    Rng rng(11);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> f(n);
        for (auto& v : f) v = rng.uniform(-2.0, 2.0);
        const auto coeff = full_analyze(basis, L.c.mu, f);
        const auto oracle = fht(f);
        worst = std::max(worst, std::abs(coeff[0] - oracle.scaling));
        for (std::size_t k = 0; k < oracle.detail.size(); ++k)
            for (std::size_t j = 0; j < oracle.detail[k].size(); ++j) {
                const std::size_t pos = basis.index.at({static_cast<int>(k), j, 1});
                worst = std::max(worst, std::abs(coeff[pos] - oracle.detail[k][j]));
            }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note = "max deviation " + fmt(worst) + " over 5 signals, " + fmt(secs) + "s";
    return worst <= kTolTransform && secs <= kBudgetTransformSec;
}

bool crit_grids(std::string& note) {
    const std::size_t sizes[] = {36, 64, 100, 144, 196, 256, 324, 400, 484};
    double c1_min = kInf, C1_max = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const std::size_t n = sizes[(seed - 1) % 9];
        const CorpusData c = make_corpus("perturbed-grid2d", n, seed);
        const auto [klo, khi] = auto_k_range(c.space, 0.5);
        const DyadicGrid g =
            build_grid(c.space, c.mu, 0.5, klo, khi, seed, c.distinguished);
        const VerifyGridResult vr = verify_grid(c.space, c.mu, g);
        if (!vr.pass) {
            for (const auto& ck : vr.checks)
                if (!ck.pass) {
                    note = "seed " + std::to_string(seed) + ": " + ck.name + " " + ck.detail;
                    return false;
                }
            note = "seed " + std::to_string(seed) + ": verification failed";
            return false;
        }
        if (!(vr.c1_rederived > 0.0) || !std::isfinite(vr.c1_rederived) ||
            !std::isfinite(vr.C1_tight)) {
            note = "seed " + std::to_string(seed) + ": degenerate ball constants";
            return false;
        }
        for (const auto& lvl : g.levels) {
            bool found = false;
            for (const auto& q : lvl.cubes) found |= (q.center == c.distinguished);
            if (!found) {
                note = "seed " + std::to_string(seed) + ": pinned center missing at level " +
                       std::to_string(lvl.k);
                return false;
            }
        }
        c1_min = std::min(c1_min, vr.c1_rederived);
        C1_max = std::max(C1_max, vr.C1_tight);
        remember("perturbed-grid2d-" + std::to_string(n) + "-s" + std::to_string(seed), g,
                 c.mu);
    }
    note = "50 clouds, inner constant >= " + fmt(c1_min) + ", outer <= " + fmt(C1_max);
    return true;
}

bool crit_basis(std::string& note) {
    struct Fixture {
        std::string label;
        CorpusData c;
        DyadicGrid g;
    };
    std::vector<Fixture> fixtures;
    {
        Lattice L = canonical_lattice(512);
        fixtures.push_back({"binary-lattice-512", std::move(L.c), std::move(L.g)});
    }
    for (const auto& [model, n, seed] :
         {std::tuple<const char*, std::size_t, std::uint64_t>{"perturbed-grid2d", 256, 3},
          {"random-tree", 128, 4},
          {"triadic", 243, 5},
          {"isolated-point", 32, 5}}) {
        CorpusData c = make_corpus(model, n, seed);
        const auto [klo, khi] = auto_k_range(c.space, c.delta);
        DyadicGrid g = build_grid(c.space, c.mu, c.delta, klo, khi, seed, c.distinguished);
        fixtures.push_back({std::string(model) + "-" + std::to_string(n), std::move(c),
                            std::move(g)});
    }
    double worst_gram = 0.0, worst_cancel = 0.0;
    for (const auto& fx : fixtures) {
        const HaarBasis basis = build_basis(fx.g, fx.c.mu);
        const ValidateBasisResult vr = validate_basis(basis, fx.c.mu, true, kTolCancel, kTolGram);
        if (!vr.pass || vr.max_abs_integral > kTolCancel || vr.gram_max_offdiag > kTolGram ||
            vr.gram_max_diag_dev > kTolGram || vr.max_l2_dev > kTolGram) {
            note = fx.label + ": " + (vr.failures.empty() ? "bracket violated" : vr.failures.front());
            return false;
        }
        for (const auto& rs : vr.ratios)
            if (!rs.pass) {
                note = fx.label + ": norm ratio bracket failed at p tag " + fmt(rs.p);
                return false;
            }
        if (!vr.l1_times_linf.pass) {
            note = fx.label + ": l1 times linf bracket failed";
            return false;
        }
        worst_gram = std::max({worst_gram, vr.gram_max_offdiag, vr.gram_max_diag_dev});
        worst_cancel = std::max(worst_cancel, vr.max_abs_integral);
        remember(fx.label, fx.g, fx.c.mu);
    }
    note = std::to_string(fixtures.size()) + " bases, worst Gram defect " + fmt(worst_gram) +
           ", worst integral " + fmt(worst_cancel);
    return true;
}

bool crit_round_trip(std::string& note) {
    struct Setup {
        CorpusData c;
        DyadicGrid g;
        HaarBasis basis;
    };
    std::vector<Setup> setups;
    setups.reserve(2);
    {
        Lattice L = canonical_lattice(512);
        setups.push_back({std::move(L.c), std::move(L.g), {}});
    }
    {
        CorpusData c = make_corpus("perturbed-grid2d", 169, 6);
        const auto [klo, khi] = auto_k_range(c.space, 0.5);
        DyadicGrid g = build_grid(c.space, c.mu, 0.5, klo, khi, 6, c.distinguished);
        remember("perturbed-grid2d-169-s6", g, c.mu);
        setups.push_back({std::move(c), std::move(g), {}});
    }
    // bases hold a pointer to their grid, so build them only once every grid
    // sits at its final address
    for (Setup& s : setups) s.basis = build_basis(s.g, s.c.mu);
    Rng rng(44);
    double worst_rt = 0.0, worst_energy = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Setup& s = setups[static_cast<std::size_t>(i) % 2];
        const std::size_t n = s.c.space.n;
        std::vector<double> f(n);
        const double amp = rng.uniform(0.5, 3.0);
        for (auto& v : f) v = amp * rng.normal();
        const HaarCoefficients hc = analyze(s.basis, s.c.mu, f);
        const auto back = synthesize(s.basis, hc);
        double scale = 1.0, fsq = 0.0, total = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            scale = std::max(scale, std::abs(f[x]));
            fsq += f[x] * f[x] * s.c.mu.mass[x];
            total += s.c.mu.mass[x];
        }
        for (std::size_t x = 0; x < n; ++x)
            worst_rt = std::max(worst_rt, std::abs(back[x] - f[x]) / scale);
        double energy = hc.mean * hc.mean * total;
        for (double cv : hc.coeff) energy += cv * cv;
        worst_energy = std::max(worst_energy, std::abs(energy - fsq) / std::max(1.0, fsq));
    }
    note = "worst round trip " + fmt(worst_rt) + ", worst energy defect " + fmt(worst_energy);
    return worst_rt <= kTolRoundTrip && worst_energy <= kTolEnergy;
}

bool crit_tail_sums(std::string& note) {
    std::size_t cubes = 0;
    for (const auto& rec : g_registry) {
        const ChildOrdering ord = order_children(rec.grid, rec.mu);
        std::string witness;
        if (!check_tail_mass(rec.grid, rec.mu, ord, &witness)) {
            note = rec.label + ": " + witness;
            return false;
        }
        cubes += rec.grid.cube_count();
    }
    if (g_registry.size() < 57) {
        note = "registry holds only " + std::to_string(g_registry.size()) + " grids";
        return false;
    }
    note = std::to_string(g_registry.size()) + " grids, " + std::to_string(cubes) +
           " cubes, exact comparisons only";
    return true;
}

bool crit_maximal(std::string& note) {
    double cprime = 0.0, cstar_max = 0.0, worst_ratio = 0.0, min_cover = 1.0;
    for (const auto& [model, n, seed] :
         {std::tuple<const char*, std::size_t, std::uint64_t>{"binary-lattice", 128, 7},
          {"perturbed-grid2d", 121, 8}}) {
        const CorpusData c = make_corpus(model, n, seed);
        const auto [klo, khi] = auto_k_range(c.space, 0.5);
        const AdjacentSystems sys =
            build_adjacent_systems(c.space, c.mu, 0.5, klo - 4, khi, 3, seed);
        const BallIndex bi = build_ball_index(c.space);
        const SandwichReport sand = verify_sandwich(sys, c.space, c.mu);
        // seeded systems cover most but not every ball; the comparison runs on the
        // covered ones and the miss rate is capped so the check never goes vacuous
        const double cover = double(sand.balls_covered) / double(sand.balls_total);
        min_cover = std::min(min_cover, cover);
        if (sand.balls_covered + sand.failures.size() != sand.balls_total || cover < 0.9) {
            note = std::string(model) + ": only " + fmt(cover) + " of " +
                   std::to_string(sand.balls_total) + " balls were sandwiched";
            return false;
        }
        Rng rng(seed * 100);
        for (int i = 0; i < 50; ++i) {
            const auto f = normal_signal(rng, n);
            const MaximalReport mr = compare_maximal(c.space, c.mu, sys, sand, f, bi);
            if (!mr.cube_vs_ball_pass || !mr.ball_vs_cube_pass ||
                mr.balls_skipped != sand.balls_total - sand.balls_covered) {
                note = std::string(model) + " signal " + std::to_string(i) +
                       ": domination failed (ratios " + fmt(mr.worst_cube_vs_ball) + ", " +
                       fmt(mr.worst_ball_vs_cube) + ")";
                return false;
            }
            if (!std::isfinite(mr.empirical_sum_constant)) {
                note = "sum constant diverged";
                return false;
            }
            cprime = std::max(cprime, mr.empirical_sum_constant);
            worst_ratio = std::max(worst_ratio, mr.worst_cube_vs_ball);
            for (double v : mr.cstar) cstar_max = std::max(cstar_max, v);
        }
    }
    note = "100 signals; coverage >= " + fmt(min_cover) + ", C* <= " + fmt(cstar_max) +
           ", headroom " + fmt(worst_ratio) + ", recorded C' = " + fmt(cprime);
    return true;
}

bool crit_weights(std::string& note) {
    const CorpusData c = make_corpus("perturbed-grid2d", 100, 9);
    const auto [klo, khi] = auto_k_range(c.space, 0.5);
    const AdjacentSystems sys = build_adjacent_systems(c.space, c.mu, 0.5, klo - 4, khi, 3, 9);
    const TwoRadiusIndex tri = build_two_radius_index(c.space, sys);
    const std::vector<double> ps = {1.0, 2.0, 4.0, kInf};

    const WeightClassReport unit =
        intersection_report(c.space, c.mu, sys, tri, Weight(c.space.n, 1.0), ps);
    // the two-radius index is empirical like the sandwich: most balls must land
    const double cover = double(unit.balls_covered) / double(unit.balls_total);
    if (!unit.pass || cover < 0.9) {
        note = "unit weight failed the intersection checks (coverage " + fmt(cover) + ")";
        return false;
    }
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        const double want_rh = ps[pi] == 1.0 ? 0.0 : 1.0;
        if (unit.ap[pi] != 1.0 || unit.rhp[pi] != want_rh) {
            note = "unit weight: continuous constant drifted off 1 at p " + fmt(ps[pi]);
            return false;
        }
        for (std::size_t t = 0; t < sys.T; ++t) {
            if (unit.ap_dyadic[t][pi] != 1.0 || unit.rhp_dyadic[t][pi].sup_part != want_rh) {
                note = "unit weight: dyadic constant drifted off 1 at p " + fmt(ps[pi]);
                return false;
            }
        }
    }

    Rng rng(909);
    double tightest = kInf, reverse_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        Weight w(c.space.n);
        for (auto& v : w) v = rng.log_normal(0.0, 0.5);
        const WeightClassReport wr = intersection_report(c.space, c.mu, sys, tri, w, ps);
        if (!wr.pass || double(wr.balls_covered) < 0.9 * double(wr.balls_total)) {
            for (const auto& ck : wr.checks)
                if (ck.asserted && !ck.pass) {
                    note = "weight " + std::to_string(i) + ": " + ck.name + " " + fmt(ck.lhs) +
                           " > " + fmt(ck.bound);
                    return false;
                }
            note = "weight " + std::to_string(i) + ": coverage lost";
            return false;
        }
        if (wr.reverse_worst > 1.0 + 1e-9) {
            note = "weight " + std::to_string(i) + ": two-radius reverse factor " +
                   fmt(wr.reverse_worst);
            return false;
        }
        reverse_worst = std::max(reverse_worst, wr.reverse_worst);
        for (const auto& ck : wr.checks)
            if (ck.asserted && ck.lhs > 0.0)
                tightest = std::min(tightest, ck.bound / ck.lhs);
    }
    note = "unit exact; 20 log-normal weights, window N = " + std::to_string(tri.N) +
           ", coverage " + fmt(cover) + ", tightest factor margin x" + fmt(tightest) +
           ", reverse <= " + fmt(reverse_worst);
    return true;
}

bool crit_pairing(std::string& note) {
    // exactness first, in process, on one rectangle
    Lattice L1 = canonical_lattice(8), L2 = canonical_lattice(8);
    const ProductGrid pg =
        make_product_grid(L1.c.space, L1.g, L1.c.mu, L2.c.space, L2.g, L2.c.mu);
    CoefficientTensor s0 = zero_tensor(pg), t0 = zero_tensor(pg);
    const std::size_t i0 = pg.b1.scaling_count, j0 = pg.b2.scaling_count;
    s0.at(i0, j0) = 1.375;
    t0.at(i0, j0) = 2.25;
    const double lhs = std::abs(pairing(pg, s0, t0));
    const double rhs = s1_norm(pg, s0) * c1_norm(pg, t0, omega_family(pg, t0));
    if (lhs != rhs || lhs != 1.375 * 2.25) {
        note = "single rectangle: " + fmt_full(lhs) + " vs " + fmt_full(rhs);
        return false;
    }

    // then the seeded sweep through the command line, twice, byte for byte
    const auto dir = std::filesystem::temp_directory_path() /
                     ("dyadic_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const std::string r1 = (dir / "duality1.json").string();
    const std::string r2 = (dir / "duality2.json").string();
    int rc1 = -1, rc2 = -1;
    {
        StdoutSilencer quiet;
        const std::vector<std::string> base = {"duality-bench", "--trials", "1000",
                                               "--n1", "8", "--n2", "8",
                                               "--seed", "12345", "--deterministic"};
        auto args1 = base;
        args1.insert(args1.end(), {"--report", r1});
        auto args2 = base;
        args2.insert(args2.end(), {"--report", r2});
        rc1 = run(args1);
        rc2 = run(args2);
    }
    const std::string bytes1 = read_text_file(r1);
    const std::string bytes2 = read_text_file(r2);
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    if (rc1 != 0 || rc2 != 0) {
        note = "seeded sweep exited " + std::to_string(rc1) + "/" + std::to_string(rc2);
        return false;
    }
    if (bytes1 != bytes2) {
        note = "reports differ between identical runs";
        return false;
    }
    const auto rep = nlohmann::json::parse(bytes1);
    const double max_ratio = rep.at("result").at("max_ratio").get<double>();
    const auto counted = rep.at("result").at("counted").get<std::size_t>();
    note = "exact on one rectangle; " + std::to_string(counted) + " pairs, max ratio " +
           fmt_full(max_ratio) + " vs recorded " + fmt_full(kRecordedPairingRatioMax);
    return counted == 1000 && max_ratio <= kRecordedPairingRatioMax;
}

bool crit_atoms(std::string& note) {
    Lattice L1 = canonical_lattice(8), L2 = canonical_lattice(8);
    const ProductGrid pg =
        make_product_grid(L1.c.space, L1.g, L1.c.mu, L2.c.space, L2.g, L2.c.mu);
    Rng rng(990);
    double worst_factor = 0.0, worst_recon = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto f = normal_signal(rng, 64);
        const AtomicDecomposition ad = atomic_decompose(pg, f, 0.25);
        if (ad.recon_error > kTolAtomRecon) {
            note = "signal " + std::to_string(i) + ": reconstruction error " +
                   fmt(ad.recon_error);
            return false;
        }
        for (const auto& atom : ad.atoms) {
            const AtomCheck ck = validate_atom(pg, atom, kTolAtom);
            if (!ck.pass) {
                note = "signal " + std::to_string(i) + " atom k=" + std::to_string(atom.k) +
                       ": " + (ck.failures.empty() ? "invalid" : ck.failures.front());
                return false;
            }
        }
        const double h1 = h1dd_norm(pg, f);
        if (h1 <= 0.0) {
            note = "degenerate square function";
            return false;
        }
        const double factor = ad.sum_lambda / h1;
        if (factor > kRecordedSumLambdaFactor) {
            note = "signal " + std::to_string(i) + ": size sum factor " + fmt_full(factor) +
                   " beyond recorded " + fmt_full(kRecordedSumLambdaFactor);
            return false;
        }
        worst_factor = std::max(worst_factor, factor);
        worst_recon = std::max(worst_recon, ad.recon_error);
    }
    note = "50 signals, worst reconstruction " + fmt(worst_recon) + ", size sum factor " +
           fmt_full(worst_factor) + " vs recorded " + fmt_full(kRecordedSumLambdaFactor);
    return true;
}

bool crit_square_forms(std::string& note) {
    struct Product {
        CorpusData c1, c2;
        DyadicGrid g1, g2;
    };
    std::vector<Product> prods;
    {
        Lattice L1 = canonical_lattice(8), L2 = canonical_lattice(8);
        prods.push_back({std::move(L1.c), std::move(L2.c), std::move(L1.g), std::move(L2.g)});
    }
    {
        CorpusData a = make_corpus("perturbed-grid2d", 9, 12);
        const auto [klo1, khi1] = auto_k_range(a.space, 0.5);
        DyadicGrid ga = build_grid(a.space, a.mu, 0.5, klo1, khi1, 12, a.distinguished);
        Lattice L2 = canonical_lattice(8);
        prods.push_back({std::move(a), std::move(L2.c), std::move(ga), std::move(L2.g)});
    }
    Rng rng(1234);
    double worst = 0.0;
    for (const auto& pr : prods) {
        const ProductGrid pg =
            make_product_grid(pr.c1.space, pr.g1, pr.c1.mu, pr.c2.space, pr.g2, pr.c2.mu);
        const std::size_t n = pg.n1 * pg.n2;
        for (int i = 0; i < 50; ++i) {
            const auto f = normal_signal(rng, n);
            const auto s_coeff =
                square_function(pg, cancellative_part(pg, product_analyze(pg, f)));
            const auto s_mart = square_function_martingale(pg, f);
            double scale = 1.0;
            for (double v : s_coeff) scale = std::max(scale, std::abs(v));
            for (std::size_t x = 0; x < n; ++x)
                worst = std::max(worst, std::abs(s_coeff[x] - s_mart[x]) / scale);
        }
    }
    note = "100 signals over two products, worst pointwise gap " + fmt(worst);
    return worst <= kTolSquare;
}

} // namespace

int main() {
    std::printf("acceptance gate, seed-stable, tolerances pinned at the top of %s\n", __FILE__);
    criterion(1, "lattice transform matches the butterfly cascade within 1e-12 in under 5s",
              crit_transform);
    criterion(2, "50 seeded clouds verify with finite ball constants and a pinned center",
              crit_grids);
    criterion(3, "bases stay orthonormal with exact cancellation and bracketed norms",
              crit_basis);
    criterion(4, "analyze/synthesize round trips and the energy identity hold on 100 signals",
              crit_round_trip);
    criterion(5, "child tail sums are exact on every cube of every grid built this run",
              crit_tail_sums);
    criterion(6, "cube maximal functions obey the two-sided ball comparison on 100 signals",
              crit_maximal);
    criterion(7, "unit weight has unit constants; log-normal weights pass every factor",
              crit_weights);
    criterion(8, "the pairing is exact on one rectangle and bounded over 1000 seeded pairs",
              crit_pairing);
    criterion(9, "atomic decompositions validate, reconstruct, and keep bounded size sums",
              crit_atoms);
    criterion(10, "coefficient and martingale square functions agree pointwise", crit_square_forms);
    std::printf("%d of 10 criteria failed\n", g_failed);
    return g_failed;
}
