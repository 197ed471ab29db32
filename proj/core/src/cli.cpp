#include "dyadic/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "dyadic/corpus.hpp"
#include "dyadic/grid.hpp"
#include "dyadic/haar.hpp"
#include "dyadic/io.hpp"
#include "dyadic/maximal.hpp"
#include "dyadic/product.hpp"
#include "dyadic/rng.hpp"
#include "dyadic/space.hpp"
#include "dyadic/weights.hpp"

namespace dyadic {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";
constexpr int kNoLevel = std::numeric_limits<int>::min();

std::uint64_t default_seed() {
    if (const char* env = std::getenv("DYADIC_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
    }
    return 12345;
}

std::string iso_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(); }

// Accumulates checks and emits the report envelope. Hard checks decide the
// exit code; measured entries never fail a run.
class Report {
public:
    explicit Report(std::string command)
        : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

    json config = json::object();
    json result = json::object();

    void hard(const std::string& name, bool pass, double value, double bound,
              const std::string& witness = "") {
        add(name, pass ? "pass" : "fail", num(value), num(bound), witness);
        if (!pass) ++fails_;
    }

    void hard_plain(const std::string& name, bool pass, const std::string& witness = "") {
        add(name, pass ? "pass" : "fail", json(), json(), witness);
        if (!pass) ++fails_;
    }

    void measured(const std::string& name, double value, const std::string& witness = "") {
        add(name, "measured", num(value), json(), witness);
    }

    void measured_vs(const std::string& name, double value, double bound,
                     const std::string& witness = "") {
        add(name, "measured", num(value), num(bound), witness);
    }

    int finish(const std::string& path, bool deterministic) {
        json meta;
        meta["version"] = kVersion;
        if (deterministic) {
            meta["timestamp"] = "";
            meta["wall_ms"] = 0;
        } else {
            meta["timestamp"] = iso_now();
            meta["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - start_)
                                  .count();
        }
        json rep;
        rep["command"] = command_;
        rep["config"] = config;
        rep["meta"] = meta;
        rep["checks"] = checks_;
        rep["result"] = result;
        if (!path.empty()) write_text_file(path, rep.dump(2) + "\n");
        for (const auto& c : checks_) {
            const std::string status = c.at("status").get<std::string>();
            std::cout << (status == "fail" ? "FAIL " : status == "pass" ? "pass " : "meas ")
                      << c.at("name").get<std::string>();
            if (!c.at("value").is_null()) std::cout << "  value=" << c.at("value").dump();
            if (!c.at("bound").is_null()) std::cout << "  bound=" << c.at("bound").dump();
            if (c.contains("witness")) std::cout << "  (" << c.at("witness").get<std::string>() << ")";
            std::cout << "\n";
        }
        std::cout << command_ << ": " << checks_.size() << " checks, " << fails_ << " failed\n";
        return fails_ == 0 ? 0 : 2;
    }

private:
    void add(const std::string& name, const char* status, json value, json bound,
             const std::string& witness) {
        json c;
        c["name"] = name;
        c["status"] = status;
        c["value"] = std::move(value);
        c["bound"] = std::move(bound);
        if (!witness.empty()) c["witness"] = witness;
        checks_.push_back(std::move(c));
    }

    std::string command_;
    std::chrono::steady_clock::time_point start_;
    json checks_ = json::array();
    std::size_t fails_ = 0;
};

SpaceBundle load_bundle(const std::string& space_path, const std::string& measure_path) {
    SpaceBundle b = load_space(space_path);
    if (!measure_path.empty()) b.mu = load_measure(measure_path, b.space.n);
    return b;
}

AdjacentSystems load_system_family(const std::vector<std::string>& grid_paths,
                                   const std::string& systems_path) {
    if (!systems_path.empty()) return load_systems_json(systems_path);
    if (grid_paths.empty()) throw std::runtime_error("need --grids or --systems");
    AdjacentSystems sys;
    for (const auto& p : grid_paths) sys.grids.push_back(load_grid_json(p));
    sys.T = sys.grids.size();
    sys.delta = sys.grids.front().delta;
    for (const auto& g : sys.grids)
        if (g.delta != sys.delta || g.k_min != sys.grids.front().k_min ||
            g.k_max != sys.grids.front().k_max)
            throw std::runtime_error("grids disagree on delta or level range");
    return sys;
}

std::string p_tag(double p) {
    if (std::isinf(p)) return "inf";
    if (p == std::floor(p)) return std::to_string(static_cast<long long>(p));
    return format_double(p);
}

// ---- shared option bags ----

struct Common {
    std::string report;
    bool deterministic = false;
    std::uint64_t seed = default_seed();
};

void add_common(CLI::App* sc, const std::shared_ptr<Common>& c, bool with_seed) {
    sc->add_option("--report", c->report, "write a JSON report to this path");
    sc->add_flag("--deterministic", c->deterministic,
                 "zero timestamp and wall time in the report");
    if (with_seed)
        sc->add_option("--seed", c->seed, "RNG seed (default: DYADIC_SEED env or 12345)");
}

struct FactorOpts {
    std::string space, measure, grid;
};

void add_factor(CLI::App* sc, FactorOpts& f, const std::string& suffix, bool with_grid) {
    sc->add_option("--space" + suffix, f.space, "space file (.json or points .csv)")->required();
    sc->add_option("--measure" + suffix, f.measure, "measure CSV overriding the space file");
    if (with_grid) sc->add_option("--grid" + suffix, f.grid, "grid JSON")->required();
}

struct ProductInputs {
    SpaceBundle b1, b2;
    DyadicGrid g1, g2;
    ProductGrid pg;
    MatrixSignal sig;
};

// keeps everything the ProductGrid points into alive in one bag
std::unique_ptr<ProductInputs> load_product(const FactorOpts& f1, const FactorOpts& f2,
                                            const std::string& matrix_path) {
    auto in = std::make_unique<ProductInputs>();
    in->b1 = load_bundle(f1.space, f1.measure);
    in->b2 = load_bundle(f2.space, f2.measure);
    in->g1 = load_grid_json(f1.grid);
    in->g2 = load_grid_json(f2.grid);
    in->pg = make_product_grid(in->b1.space, in->g1, in->b1.mu, in->b2.space, in->g2, in->b2.mu);
    if (!matrix_path.empty()) {
        in->sig = load_matrix_signal(matrix_path);
        if (in->sig.rows != in->b1.space.n || in->sig.cols != in->b2.space.n)
            throw std::runtime_error(matrix_path + ": matrix shape " +
                                     std::to_string(in->sig.rows) + "x" +
                                     std::to_string(in->sig.cols) + " does not match spaces " +
                                     std::to_string(in->b1.space.n) + "x" +
                                     std::to_string(in->b2.space.n));
    }
    return in;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// ---- subcommand runners ----

struct CorpusOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string model, out, measure_out;
    std::size_t n = 64;
};

int run_corpus(const CorpusOpts& o) {
    Report rep("corpus");
    rep.config = {{"model", o.model}, {"n", o.n}, {"seed", o.c->seed}, {"out", o.out}};
    const CorpusData c = make_corpus(o.model, o.n, o.c->seed);
    json sp;
    if (!c.space.coords.empty()) {
        sp["metric"] = "euclidean";
        sp["points"] = c.space.coords;
    } else {
        sp["metric"] = "matrix";
        json rows = json::array();
        for (std::size_t i = 0; i < c.space.n; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < c.space.n; ++j) row.push_back(c.space.dist[i * c.space.n + j]);
            rows.push_back(std::move(row));
        }
        sp["dist_matrix"] = std::move(rows);
    }
    sp["masses"] = c.mu.mass;
    sp["delta"] = c.delta;
    sp["distinguished"] = c.distinguished;
    sp["note"] = c.note;
    write_text_file(o.out, sp.dump(2) + "\n");
    if (!o.measure_out.empty()) {
        std::string csv = "id,mass\n";
        for (std::size_t i = 0; i < c.mu.mass.size(); ++i)
            csv += std::to_string(i) + "," + format_double(c.mu.mass[i]) + "\n";
        write_text_file(o.measure_out, csv);
    }
    rep.measured("points", static_cast<double>(c.space.n));
    rep.measured("quasi_triangle_constant", c.space.A0);
    rep.result = {{"note", c.note},
                  {"delta", c.delta},
                  {"distinguished", c.distinguished},
                  {"n", c.space.n}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct BuildGridOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, centers_file, out;
    double delta = 0.5;
    int kmin = kNoLevel, kmax = kNoLevel;
    std::size_t center = 0;
    bool strict = false;
};

int run_build_grid(const BuildGridOpts& o) {
    Report rep("build-grid");
    const SpaceBundle b = load_bundle(o.space, o.measure);
    int kmin = o.kmin, kmax = o.kmax;
    if (kmin == kNoLevel || kmax == kNoLevel) {
        const auto [a, z] = auto_k_range(b.space, o.delta);
        if (kmin == kNoLevel) kmin = a;
        if (kmax == kNoLevel) kmax = z;
    }
    rep.config = {{"space", o.space},   {"delta", o.delta}, {"kmin", kmin},
                  {"kmax", kmax},       {"seed", o.c->seed}, {"center", o.center},
                  {"strict", o.strict}, {"out", o.out}};
    GridOptions go;
    go.strict = o.strict;
    if (!o.centers_file.empty()) {
        const json jc = json::parse(read_text_file(o.centers_file));
        go.explicit_centers = jc.get<std::vector<std::vector<std::size_t>>>();
        rep.config["centers"] = o.centers_file;
    }
    const DyadicGrid g = build_grid(b.space, b.mu, o.delta, kmin, kmax, o.c->seed, o.center, go);
    if (!o.out.empty()) save_grid_json(o.out, g);
    rep.measured("inner_ball_constant", g.c1);
    rep.measured("outer_ball_constant", g.C1);
    rep.measured("max_children", static_cast<double>(g.M));
    rep.measured("cube_total", static_cast<double>(g.cube_count()));
    rep.result = {{"levels", g.levels.size()}, {"k_min", g.k_min}, {"k_max", g.k_max}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct VerifyGridOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, grid;
};

int run_verify_grid(const VerifyGridOpts& o) {
    Report rep("verify-grid");
    rep.config = {{"space", o.space}, {"grid", o.grid}};
    const SpaceBundle b = load_bundle(o.space, o.measure);
    const DyadicGrid g = load_grid_json(o.grid);
    const VerifyGridResult vr = verify_grid(b.space, b.mu, g);
    for (const auto& ck : vr.checks) rep.hard_plain(ck.name, ck.pass, ck.detail);
    rep.measured("inner_ball_constant_rederived", vr.c1_rederived);
    rep.measured("outer_ball_constant_tight", vr.C1_tight);
    rep.result = {{"single_root", vr.single_root},
                  {"level_count", vr.level_count},
                  {"cube_total", vr.cube_total},
                  {"pass", vr.pass}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct AdjacentOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, out;
    double delta = 0.5;
    int kmin = kNoLevel, kmax = kNoLevel;
    std::size_t T = 3;
};

int run_adjacent(const AdjacentOpts& o) {
    Report rep("adjacent");
    const SpaceBundle b = load_bundle(o.space, o.measure);
    int kmin = o.kmin, kmax = o.kmax;
    if (kmin == kNoLevel || kmax == kNoLevel) {
        const auto [a, z] = auto_k_range(b.space, o.delta);
        if (kmin == kNoLevel) kmin = a;
        if (kmax == kNoLevel) kmax = z;
    }
    rep.config = {{"space", o.space}, {"delta", o.delta}, {"kmin", kmin},
                  {"kmax", kmax},     {"T", o.T},         {"seed", o.c->seed}};
    const AdjacentSystems sys =
        build_adjacent_systems(b.space, b.mu, o.delta, kmin, kmax, o.T, o.c->seed);
    if (!o.out.empty()) save_systems_json(o.out, sys);
    const SandwichReport sand = verify_sandwich(sys, b.space, b.mu);
    const double rate = sand.balls_total == 0
                            ? 1.0
                            : static_cast<double>(sand.balls_covered) /
                                  static_cast<double>(sand.balls_total);
    rep.measured("ball_sandwich_coverage", rate,
                 std::to_string(sand.balls_covered) + " of " + std::to_string(sand.balls_total));
    rep.measured_vs("sandwich_dilation", sand.C_empirical, sand.C_theoretical,
                    "empirical max against 8 A0^3 / delta^3");
    json failures = json::array();
    for (std::size_t i = 0; i < sand.failures.size() && i < 50; ++i)
        failures.push_back({{"center", sand.failures[i].center},
                            {"radius", sand.failures[i].radius},
                            {"reason", sand.failures[i].reason}});
    rep.result = {{"T", sys.T},
                  {"all_covered", sand.all_covered},
                  {"failures_shown", failures.size()},
                  {"failures_total", sand.failures.size()},
                  {"failures", std::move(failures)}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct HaarAnalyzeOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, grid, signal, out;
};

int run_haar_analyze(const HaarAnalyzeOpts& o) {
    Report rep("haar-analyze");
    rep.config = {{"space", o.space}, {"grid", o.grid}, {"signal", o.signal}, {"out", o.out}};
    const SpaceBundle b = load_bundle(o.space, o.measure);
    const DyadicGrid g = load_grid_json(o.grid);
    const auto f = load_signal(o.signal, b.space.n);
    const HaarBasis basis = build_basis(g, b.mu);
    const HaarCoefficients c = analyze(basis, b.mu, f);
    save_coefficients_csv(o.out, basis, c);
    double energy = c.mean * c.mean * b.mu.total;
    for (double v : c.coeff) energy += v * v;
    double fsq = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) fsq += f[i] * f[i] * b.mu.mass[i];
    rep.measured("mean", c.mean);
    rep.measured("coefficient_count", static_cast<double>(c.coeff.size()));
    if (fsq > 0.0)
        rep.measured("energy_ratio", energy / fsq, "(mean^2 mu(X) + sum c^2) / ||f||_2^2");
    return rep.finish(o.c->report, o.c->deterministic);
}

struct HaarSynthesizeOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, grid, coeff, out;
};

int run_haar_synthesize(const HaarSynthesizeOpts& o) {
    Report rep("haar-synthesize");
    rep.config = {{"space", o.space}, {"grid", o.grid}, {"coeff", o.coeff}, {"out", o.out}};
    const SpaceBundle b = load_bundle(o.space, o.measure);
    const DyadicGrid g = load_grid_json(o.grid);
    const HaarBasis basis = build_basis(g, b.mu);
    const HaarCoefficients c = load_coefficients_csv(o.coeff, basis);
    save_signal(o.out, synthesize(basis, c));
    rep.measured("points", static_cast<double>(b.space.n));
    return rep.finish(o.c->report, o.c->deterministic);
}

struct HaarValidateOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, grid;
    bool no_gram = false;
    double tol_cancel = 1e-12, tol_norm = 1e-10;
};

int run_haar_validate(const HaarValidateOpts& o) {
    Report rep("haar-validate");
    rep.config = {{"space", o.space},
                  {"grid", o.grid},
                  {"gram", !o.no_gram},
                  {"tol_cancel", o.tol_cancel},
                  {"tol_norm", o.tol_norm}};
    const SpaceBundle b = load_bundle(o.space, o.measure);
    const DyadicGrid g = load_grid_json(o.grid);
    const HaarBasis basis = build_basis(g, b.mu);
    std::string tail_witness;
    const bool tail_ok = check_tail_mass(g, b.mu, basis.ordering, &tail_witness);
    rep.hard_plain("tail_mass_identity", tail_ok, tail_witness);
    const ValidateBasisResult vr = validate_basis(basis, b.mu, !o.no_gram, o.tol_cancel, o.tol_norm);
    rep.hard("vanishing_integrals", vr.max_abs_integral <= o.tol_cancel, vr.max_abs_integral,
             o.tol_cancel);
    rep.hard("unit_l2_norms", vr.max_l2_dev <= o.tol_norm, vr.max_l2_dev, o.tol_norm);
    if (vr.gram_checked) {
        rep.hard("gram_offdiagonal", vr.gram_max_offdiag <= o.tol_norm, vr.gram_max_offdiag,
                 o.tol_norm);
        rep.hard("gram_diagonal", vr.gram_max_diag_dev <= o.tol_norm, vr.gram_max_diag_dev,
                 o.tol_norm);
    }
    for (const auto& rs : vr.ratios)
        rep.hard("norm_ratio_p" + p_tag(rs.p == 0.0 ? std::numeric_limits<double>::infinity() : rs.p),
                 rs.pass, rs.max_seen, rs.hi,
                 "bracket [" + format_double(rs.lo) + ", " + format_double(rs.hi) + "], seen [" +
                     format_double(rs.min_seen) + ", " + format_double(rs.max_seen) + "]");
    rep.hard("l1_times_linf", vr.l1_times_linf.pass, vr.l1_times_linf.max_seen,
             vr.l1_times_linf.hi,
             "bracket [" + format_double(vr.l1_times_linf.lo) + ", " +
                 format_double(vr.l1_times_linf.hi) + "]");
    rep.result = {{"functions", basis.funcs.size()},
                  {"scaling_count", basis.scaling_count},
                  {"dropped_zero", basis.dropped_zero.size()},
                  {"pass", vr.pass}};
    if (!vr.failures.empty()) {
        json fl = json::array();
        for (std::size_t i = 0; i < vr.failures.size() && i < 20; ++i) fl.push_back(vr.failures[i]);
        rep.result["failures"] = std::move(fl);
    }
    return rep.finish(o.c->report, o.c->deterministic);
}

struct MaximalOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, signal, systems;
    std::vector<std::string> grids;
};

int run_maximal_compare(const MaximalOpts& o) {
    Report rep("maximal-compare");
    rep.config = {{"space", o.space}, {"signal", o.signal}, {"grids", o.grids},
                  {"systems", o.systems}};
    const SpaceBundle b = load_bundle(o.space, o.measure);
    const AdjacentSystems sys = load_system_family(o.grids, o.systems);
    const auto f = load_signal(o.signal, b.space.n);
    const BallIndex bi = build_ball_index(b.space);
    const SandwichReport sand = verify_sandwich(sys, b.space, b.mu);
    const MaximalReport mr = compare_maximal(b.space, b.mu, sys, sand, f, bi);
    rep.hard("cube_maximal_below_ball_maximal", mr.cube_vs_ball_pass, mr.worst_cube_vs_ball, 1.0,
             "max over systems and points of M_d f / (C* M f)");
    rep.hard("ball_average_below_cube_average", mr.ball_vs_cube_pass, mr.worst_ball_vs_cube, 1.0,
             "per sandwiched ball, against C_dbl^{1+log2 C_ball}");
    rep.measured("empirical_sum_constant", mr.empirical_sum_constant,
                 "max of M f over the sum of the cube maximal functions");
    rep.measured("doubling_constant", mr.c_dbl);
    json cstar = json::array();
    for (double v : mr.cstar) cstar.push_back(v);
    rep.result = {{"cstar", std::move(cstar)},
                  {"balls_checked", mr.balls_checked},
                  {"balls_skipped", mr.balls_skipped},
                  {"T", sys.T}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct WeightsOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space, measure, weight, systems, klass = "all";
    std::vector<std::string> grids;
    std::vector<double> ps;
};

int run_weights(const WeightsOpts& o) {
    Report rep("weights");
    const SpaceBundle b = load_bundle(o.space, o.measure);
    const AdjacentSystems sys = load_system_family(o.grids, o.systems);
    const Weight w = load_signal(o.weight, b.space.n);
    std::vector<double> ps = o.ps;
    if (ps.empty()) ps = {1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
    json psj = json::array();
    for (double p : ps) psj.push_back(num(p).is_null() ? json("inf") : json(p));
    rep.config = {{"space", o.space}, {"weight", o.weight}, {"class", o.klass}, {"p", psj}};
    const TwoRadiusIndex tri = build_two_radius_index(b.space, sys);
    const WeightClassReport wr = intersection_report(b.space, b.mu, sys, tri, w, ps);
    const auto wanted = [&](const std::string& name) {
        if (o.klass == "all") return true;
        if (o.klass == "doubling")
            return name.find("doubling") != std::string::npos ||
                   name.find("sibling") != std::string::npos;
        if (o.klass == "ap") return name.find("muckenhoupt") != std::string::npos;
        return name.find("reverse_holder") != std::string::npos; // rhp
    };
    for (const auto& ck : wr.checks) {
        if (!wanted(ck.name)) continue;
        std::string witness = "t=" + std::to_string(ck.t);
        if (ck.p != 0.0) witness += " p=" + p_tag(ck.p);
        if (ck.asserted)
            rep.hard(ck.name, ck.pass, ck.lhs, ck.bound, witness);
        else
            rep.measured_vs(ck.name, ck.lhs, ck.bound, witness);
    }
    json ap = json::array(), rhp = json::array(), apd = json::array(), rhpd = json::array();
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        ap.push_back(num(wr.ap[pi]));
        rhp.push_back(num(wr.rhp[pi]));
        json col1 = json::array(), col2 = json::array();
        for (std::size_t t = 0; t < sys.T; ++t) {
            col1.push_back(num(wr.ap_dyadic[t][pi]));
            col2.push_back({{"sup", num(wr.rhp_dyadic[t][pi].sup_part)},
                            {"doubling", num(wr.rhp_dyadic[t][pi].doubling)},
                            {"combined", num(wr.rhp_dyadic[t][pi].combined)}});
        }
        apd.push_back(std::move(col1));
        rhpd.push_back(std::move(col2));
    }
    json dydbl = json::array();
    for (const auto& d : wr.dydbl)
        dydbl.push_back({{"parent_child", num(d.parent_child)},
                         {"sibling", num(d.sibling)},
                         {"finite", d.finite}});
    rep.result = {{"a0", wr.a0},
                  {"mu_doubling", wr.c_dbl_mu},
                  {"weight_doubling", num(wr.dbl_w.constant)},
                  {"dyadic_doubling", std::move(dydbl)},
                  {"ap", std::move(ap)},
                  {"ap_dyadic", std::move(apd)},
                  {"rhp", std::move(rhp)},
                  {"rhp_dyadic", std::move(rhpd)},
                  {"two_radius_N", wr.N},
                  {"balls_covered", wr.balls_covered},
                  {"balls_total", wr.balls_total},
                  {"reverse_worst", num(wr.reverse_worst)},
                  {"pass", wr.pass}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct ProductOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    FactorOpts f1, f2;
    std::string matrix, out;
    // bmodd
    std::string family = "levelsets", omega_file;
    // atoms
    double ctilde = 0.25, tol = 1e-10;
    // structure-check is elsewhere; duality-bench is elsewhere
};

int run_product_analyze(const ProductOpts& o) {
    Report rep("product-analyze");
    rep.config = {{"space1", o.f1.space}, {"grid1", o.f1.grid}, {"space2", o.f2.space},
                  {"grid2", o.f2.grid},   {"matrix", o.matrix}, {"out", o.out}};
    const auto in = load_product(o.f1, o.f2, o.matrix);
    const CoefficientTensor t = product_analyze(in->pg, in->sig.values);
    if (!o.out.empty()) save_tensor_csv(o.out, in->pg, t);
    const auto back = product_synthesize(in->pg, t);
    double dev = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i)
        dev = std::max(dev, std::abs(back[i] - in->sig.values[i]));
    const double scale = std::max(1.0, max_abs(in->sig.values));
    rep.hard("transform_round_trip", dev <= 1e-10 * scale, dev, 1e-10 * scale);
    std::size_t nonzero = 0;
    for (double v : t.c)
        if (v != 0.0) ++nonzero;
    rep.result = {{"rows", t.m1}, {"cols", t.m2}, {"nonzero", nonzero}};
    return rep.finish(o.c->report, o.c->deterministic);
}

int run_h1dd(const ProductOpts& o) {
    Report rep("h1dd");
    rep.config = {{"space1", o.f1.space}, {"grid1", o.f1.grid}, {"space2", o.f2.space},
                  {"grid2", o.f2.grid},   {"matrix", o.matrix}};
    const auto in = load_product(o.f1, o.f2, o.matrix);
    const CoefficientTensor t = cancellative_part(in->pg, product_analyze(in->pg, in->sig.values));
    const auto s_coeff = square_function(in->pg, t);
    const auto s_mart = square_function_martingale(in->pg, in->sig.values);
    double dev = 0.0;
    for (std::size_t i = 0; i < s_coeff.size(); ++i)
        dev = std::max(dev, std::abs(s_coeff[i] - s_mart[i]));
    const double scale = std::max(1.0, max_abs(s_coeff));
    rep.hard("square_function_forms_agree", dev <= 1e-10 * scale, dev, 1e-10 * scale,
             "coefficient form against iterated martingale differences");
    const double h1 = product_l1(in->pg, s_coeff);
    rep.measured("h1_norm", h1, "L1 norm of the square function");
    rep.measured("l1_norm", product_l1(in->pg, in->sig.values));
    rep.measured("l2_norm", product_l2(in->pg, in->sig.values));
    if (!o.out.empty()) {
        MatrixSignal ms;
        ms.rows = in->b1.space.n;
        ms.cols = in->b2.space.n;
        ms.values = s_coeff;
        ms.name1 = o.f1.space;
        ms.name2 = o.f2.space;
        save_matrix_csv(o.out, ms);
    }
    rep.result = {{"h1", h1}};
    return rep.finish(o.c->report, o.c->deterministic);
}

int run_bmodd(const ProductOpts& o) {
    Report rep("bmodd");
    rep.config = {{"space1", o.f1.space}, {"grid1", o.f1.grid},   {"space2", o.f2.space},
                  {"grid2", o.f2.grid},   {"matrix", o.matrix},   {"omega_family", o.family},
                  {"omega_file", o.omega_file}};
    const auto in = load_product(o.f1, o.f2, o.matrix);
    const CoefficientTensor t = lifting(in->pg, in->sig.values);
    std::vector<std::vector<char>> family;
    const std::size_t n1 = in->b1.space.n, n2 = in->b2.space.n;
    if (o.family == "levelsets") {
        family = omega_family(in->pg, t);
    } else if (o.family == "rects") {
        for (const auto& lv1 : in->g1.levels)
            for (const auto& q1 : lv1.cubes) {
                if (q1.mass <= 0.0) continue;
                for (const auto& lv2 : in->g2.levels)
                    for (const auto& q2 : lv2.cubes) {
                        if (q2.mass <= 0.0) continue;
                        std::vector<char> mask(n1 * n2, 0);
                        for (std::size_t x : q1.members)
                            for (std::size_t y : q2.members) mask[x * n2 + y] = 1;
                        family.push_back(std::move(mask));
                    }
            }
    } else { // file
        if (o.omega_file.empty()) throw std::runtime_error("--omega-family file needs --omega-file");
        const json jf = json::parse(read_text_file(o.omega_file));
        for (const json& arr : jf) {
            std::vector<char> mask(n1 * n2, 0);
            for (const json& idx : arr) {
                const auto i = idx.get<std::size_t>();
                if (i >= mask.size()) throw std::runtime_error("omega file index out of range");
                mask[i] = 1;
            }
            family.push_back(std::move(mask));
        }
    }
    const double v = c1_norm(in->pg, t, family);
    rep.measured("carleson_functional", v,
                 "lower bound: supremum over the documented finite open-set family");
    rep.result = {{"value", v}, {"family_size", family.size()}};
    return rep.finish(o.c->report, o.c->deterministic);
}

int run_atoms(const ProductOpts& o) {
    Report rep("atoms");
    rep.config = {{"space1", o.f1.space}, {"grid1", o.f1.grid}, {"space2", o.f2.space},
                  {"grid2", o.f2.grid},   {"matrix", o.matrix}, {"ctilde", o.ctilde},
                  {"tol", o.tol}};
    const auto in = load_product(o.f1, o.f2, o.matrix);
    const AtomicDecomposition ad = atomic_decompose(in->pg, in->sig.values, o.ctilde);
    rep.hard("reconstruction", ad.recon_error <= 1e-8, ad.recon_error, 1e-8,
             "sum of lambda_k a_k against the cancellative projection");
    json atoms = json::array();
    for (const auto& atom : ad.atoms) {
        const AtomCheck ck = validate_atom(in->pg, atom, o.tol);
        const double worst =
            std::max({ck.support_leak, ck.worst_localization, ck.worst_cancellation,
                      std::max(0.0, ck.l2_times_sqrt_mass - 1.0), std::max(0.0, ck.size_sum - 1.0)});
        std::string witness = "k=" + std::to_string(atom.k);
        if (!ck.failures.empty()) witness += " " + ck.failures.front();
        rep.hard("atom_valid_k" + std::to_string(atom.k), ck.pass, worst, o.tol, witness);
        json ja = {{"k", atom.k},
                   {"lambda", atom.lambda},
                   {"support_mass", atom.omega_tilde_mass},
                   {"pieces", atom.pieces.size()}};
        if (!o.out.empty()) {
            json pieces = json::array();
            for (const auto& pc : atom.pieces) {
                json coeffs = json::array();
                for (const auto& ac : pc.coeffs) coeffs.push_back({ac.i, ac.j, ac.value});
                pieces.push_back({{"r1", {{"k", pc.r1.k}, {"alpha", pc.r1.alpha}}},
                                  {"r2", {{"k", pc.r2.k}, {"alpha", pc.r2.alpha}}},
                                  {"coeffs", std::move(coeffs)}});
            }
            ja["pieces_detail"] = std::move(pieces);
            json support = json::array();
            for (std::size_t i = 0; i < atom.omega_tilde.size(); ++i)
                if (atom.omega_tilde[i]) support.push_back(i);
            ja["support"] = std::move(support);
        }
        atoms.push_back(std::move(ja));
    }
    rep.measured("atom_count", static_cast<double>(ad.atoms.size()));
    rep.measured("sum_lambda", ad.sum_lambda);
    rep.measured("ctilde_used", ad.ctilde_used,
                 std::to_string(ad.halvings) + " adaptive halvings");
    const double h1 = h1dd_norm(in->pg, in->sig.values);
    if (h1 > 0.0) rep.measured("sum_lambda_over_h1", ad.sum_lambda / h1);
    rep.result = {{"atoms", std::move(atoms)},
                  {"sum_lambda", ad.sum_lambda},
                  {"h1", h1},
                  {"ctilde_used", ad.ctilde_used},
                  {"halvings", ad.halvings}};
    if (!o.out.empty()) write_text_file(o.out, rep.result.dump(2) + "\n");
    return rep.finish(o.c->report, o.c->deterministic);
}

struct DualityOpts {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::size_t trials = 1000, n1 = 8, n2 = 8;
};

int run_duality_bench(const DualityOpts& o) {
    Report rep("duality-bench");
    rep.config = {{"trials", o.trials}, {"n1", o.n1}, {"n2", o.n2}, {"seed", o.c->seed}};
    const CorpusData c1 = make_corpus("binary-lattice", o.n1, o.c->seed);
    const CorpusData c2 = make_corpus("binary-lattice", o.n2, o.c->seed);
    GridOptions go1, go2;
    go1.explicit_centers = binary_lattice_centers(o.n1);
    go2.explicit_centers = binary_lattice_centers(o.n2);
    const auto [a1, z1] = auto_k_range(c1.space, c1.delta);
    const auto [a2, z2] = auto_k_range(c2.space, c2.delta);
    const DyadicGrid g1 = build_grid(c1.space, c1.mu, c1.delta, a1, z1, o.c->seed, 0, go1);
    const DyadicGrid g2 = build_grid(c2.space, c2.mu, c2.delta, a2, z2, o.c->seed, 0, go2);
    const ProductGrid pg = make_product_grid(c1.space, g1, c1.mu, c2.space, g2, c2.mu);

    // one rectangle, whole space x whole space: both sides of the pairing
    // bound collapse to |s| |t| and the run must hit it exactly
    if (pg.b1.scaling_count >= pg.b1.funcs.size() || pg.b2.scaling_count >= pg.b2.funcs.size())
        throw std::runtime_error("lattice too small for a cancellative function");
    const std::size_t i0 = pg.b1.scaling_count, j0 = pg.b2.scaling_count;
    CoefficientTensor s0 = zero_tensor(pg), t0 = zero_tensor(pg);
    s0.at(i0, j0) = 1.375;
    t0.at(i0, j0) = 2.25;
    const double lhs = std::abs(pairing(pg, s0, t0));
    const double rhs = s1_norm(pg, s0) * c1_norm(pg, t0, omega_family(pg, t0));
    rep.hard("single_rectangle_pairing_equality", lhs == rhs, lhs, rhs,
             "|<s,t>| against ||s||_s1 ||t||_c1, bitwise");

    Rng rng(o.c->seed);
    const std::size_t m1 = pg.b1.funcs.size(), m2 = pg.b2.funcs.size();
    double max_ratio = 0.0, sum_ratio = 0.0;
    std::size_t counted = 0;
    for (std::size_t trial = 0; trial < o.trials; ++trial) {
        CoefficientTensor s = zero_tensor(pg), t = zero_tensor(pg);
        for (std::size_t i = i0; i < m1; ++i)
            for (std::size_t j = j0; j < m2; ++j) {
                s.at(i, j) = rng.normal();
                t.at(i, j) = rng.normal();
            }
        const double den = s1_norm(pg, s) * c1_norm(pg, t, omega_family(pg, t));
        if (den <= 0.0) continue;
        const double ratio = std::abs(pairing(pg, s, t)) / den;
        max_ratio = std::max(max_ratio, ratio);
        sum_ratio += ratio;
        ++counted;
    }
    rep.measured("pairing_ratio_max", max_ratio,
                 "|<s,t>| / (||s||_s1 ||t||_c1) over seeded pairs");
    rep.measured("pairing_ratio_mean", counted ? sum_ratio / static_cast<double>(counted) : 0.0);
    rep.result = {{"trials", o.trials}, {"counted", counted}, {"max_ratio", max_ratio}};
    return rep.finish(o.c->report, o.c->deterministic);
}

struct StructureOpts2 {
    std::shared_ptr<Common> c = std::make_shared<Common>();
    std::string space1, measure1, space2, measure2, matrix, systems1, systems2;
    std::size_t T1 = 2, T2 = 2;
    double delta1 = 0.5, delta2 = 0.5, ctilde = 0.25;
};

int run_structure_check(const StructureOpts2& o) {
    Report rep("structure-check");
    rep.config = {{"space1", o.space1}, {"space2", o.space2}, {"matrix", o.matrix},
                  {"T1", o.T1},         {"T2", o.T2},         {"delta1", o.delta1},
                  {"delta2", o.delta2}, {"ctilde", o.ctilde}, {"seed", o.c->seed}};
    const SpaceBundle b1 = load_bundle(o.space1, o.measure1);
    const SpaceBundle b2 = load_bundle(o.space2, o.measure2);
    AdjacentSystems sys1, sys2;
    // default systems reach four levels above the natural root so that pieces
    // living on root-scale rectangles still find a window level to sandwich in
    if (!o.systems1.empty()) {
        sys1 = load_systems_json(o.systems1);
    } else {
        const auto [a, z] = auto_k_range(b1.space, o.delta1);
        sys1 = build_adjacent_systems(b1.space, b1.mu, o.delta1, a - 4, z, o.T1, o.c->seed);
    }
    if (!o.systems2.empty()) {
        sys2 = load_systems_json(o.systems2);
    } else {
        const auto [a, z] = auto_k_range(b2.space, o.delta2);
        sys2 = build_adjacent_systems(b2.space, b2.mu, o.delta2, a - 4, z, o.T2,
                                      o.c->seed + 7777);
    }
    const MatrixSignal sig = load_matrix_signal(o.matrix);
    if (sig.rows != b1.space.n || sig.cols != b2.space.n)
        throw std::runtime_error("matrix shape does not match the factor spaces");
    StructureOptions sopt;
    sopt.ctilde = o.ctilde;
    const StructureReport sr =
        structure_check(b1.space, b1.mu, sys1, b2.space, b2.mu, sys2, sig.values, sopt);
    rep.hard("reassembly_reproduces_projection", sr.pass, sr.recon_error, 1e-10);
    rep.measured("h1_ratio", sr.ratio, "sum of bucket norms over the base norm");
    rep.measured("unassigned_pieces", static_cast<double>(sr.pieces_unassigned),
                 "of " + std::to_string(sr.pieces_total));
    rep.measured("carleson_spread", sr.bmo_min > 0.0 ? sr.bmo_max / sr.bmo_min : 0.0,
                 "max over min of the per-pair Carleson functional");
    json buckets = json::array();
    for (const auto& bk : sr.buckets)
        buckets.push_back({{"t1", bk.t1}, {"t2", bk.t2}, {"h1", bk.h1}, {"pieces", bk.pieces}});
    json bmo = json::array();
    for (const auto& row : sr.bmo) {
        json r = json::array();
        for (double v : row) r.push_back(num(v));
        bmo.push_back(std::move(r));
    }
    rep.result = {{"base_h1", sr.base_h1},
                  {"sum_h1", sr.sum_h1},
                  {"buckets", std::move(buckets)},
                  {"unassigned_h1", sr.unassigned_h1},
                  {"bmo", std::move(bmo)},
                  {"bmo_min", sr.bmo_min},
                  {"bmo_max", sr.bmo_max}};
    return rep.finish(o.c->report, o.c->deterministic);
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"dyadic structures on finite quasi-metric measure spaces"};
    app.require_subcommand(1);
    std::function<int()> action;

    { // corpus
        auto o = std::make_shared<CorpusOpts>();
        auto* sc = app.add_subcommand("corpus", "generate a named example space");
        sc->add_option("--model", o->model, "model name")
            ->required()
            ->check(CLI::IsMember(
                {"binary-lattice", "triadic", "perturbed-grid2d", "random-tree", "isolated-point"}));
        sc->add_option("--n", o->n, "target point count")->required();
        sc->add_option("--out", o->out, "space JSON output")->required();
        sc->add_option("--measure-out", o->measure_out, "also write the measure as CSV");
        add_common(sc, o->c, true);
        sc->callback([&action, o] { action = [o] { return run_corpus(*o); }; });
    }
    { // build-grid
        auto o = std::make_shared<BuildGridOpts>();
        auto* sc = app.add_subcommand("build-grid", "construct one dyadic cube system");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV overriding the space file");
        sc->add_option("--delta", o->delta, "scale base in (0,1)");
        sc->add_option("--kmin", o->kmin, "coarsest level (default: single root)");
        sc->add_option("--kmax", o->kmax, "finest level (default: separates all points)");
        sc->add_option("--center", o->center, "distinguished center point id");
        sc->add_option("--centers", o->centers_file, "JSON file with per-level center id lists");
        sc->add_flag("--strict", o->strict, "reject delta above the small-delta threshold");
        sc->add_option("--out", o->out, "grid JSON output");
        add_common(sc, o->c, true);
        sc->callback([&action, o] { action = [o] { return run_build_grid(*o); }; });
    }
    { // verify-grid
        auto o = std::make_shared<VerifyGridOpts>();
        auto* sc = app.add_subcommand("verify-grid", "re-derive every structural grid axiom");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--grid", o->grid, "grid JSON")->required();
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_verify_grid(*o); }; });
    }
    { // adjacent
        auto o = std::make_shared<AdjacentOpts>();
        auto* sc = app.add_subcommand("adjacent", "build T systems and check the ball sandwich");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--delta", o->delta, "scale base");
        sc->add_option("--kmin", o->kmin, "coarsest level");
        sc->add_option("--kmax", o->kmax, "finest level");
        sc->add_option("--T", o->T, "number of systems");
        sc->add_option("--out", o->out, "systems JSON output");
        add_common(sc, o->c, true);
        sc->callback([&action, o] { action = [o] { return run_adjacent(*o); }; });
    }
    { // haar-analyze
        auto o = std::make_shared<HaarAnalyzeOpts>();
        auto* sc = app.add_subcommand("haar-analyze", "expand a signal in the Haar basis");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--grid", o->grid, "grid JSON")->required();
        sc->add_option("--signal", o->signal, "signal CSV")->required();
        sc->add_option("--out", o->out, "coefficient CSV output")->required();
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_haar_analyze(*o); }; });
    }
    { // haar-synthesize
        auto o = std::make_shared<HaarSynthesizeOpts>();
        auto* sc = app.add_subcommand("haar-synthesize", "rebuild a signal from coefficients");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--grid", o->grid, "grid JSON")->required();
        sc->add_option("--coeff", o->coeff, "coefficient CSV")->required();
        sc->add_option("--out", o->out, "signal CSV output")->required();
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_haar_synthesize(*o); }; });
    }
    { // haar-validate
        auto o = std::make_shared<HaarValidateOpts>();
        auto* sc = app.add_subcommand("haar-validate", "orthonormality, cancellation, norm ratios");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--grid", o->grid, "grid JSON")->required();
        sc->add_flag("--no-gram", o->no_gram, "skip the full Gram matrix");
        sc->add_option("--tol-cancel", o->tol_cancel, "tolerance for vanishing integrals");
        sc->add_option("--tol-norm", o->tol_norm, "tolerance for norms and Gram entries");
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_haar_validate(*o); }; });
    }
    { // maximal-compare
        auto o = std::make_shared<MaximalOpts>();
        auto* sc = app.add_subcommand("maximal-compare",
                                      "dyadic maximal functions against the ball maximal function");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--grids", o->grids, "comma separated grid JSON files")->delimiter(',');
        sc->add_option("--systems", o->systems, "systems JSON (alternative to --grids)");
        sc->add_option("--signal", o->signal, "signal CSV")->required();
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_maximal_compare(*o); }; });
    }
    { // weights
        auto o = std::make_shared<WeightsOpts>();
        auto* sc = app.add_subcommand("weights", "weight class constants, continuous and dyadic");
        sc->add_option("--space", o->space, "space file")->required();
        sc->add_option("--measure", o->measure, "measure CSV");
        sc->add_option("--grids", o->grids, "comma separated grid JSON files")->delimiter(',');
        sc->add_option("--systems", o->systems, "systems JSON (alternative to --grids)");
        sc->add_option("--weight", o->weight, "weight CSV (id,value)")->required();
        sc->add_option("--class", o->klass, "which family of checks to report")
            ->check(CLI::IsMember({"ap", "rhp", "doubling", "all"}));
        sc->add_option("--p", o->ps, "exponents (repeatable; inf allowed)")->delimiter(',');
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_weights(*o); }; });
    }
    { // product-analyze
        auto o = std::make_shared<ProductOpts>();
        auto* sc = app.add_subcommand("product-analyze", "tensor Haar expansion of a matrix signal");
        add_factor(sc, o->f1, "1", true);
        add_factor(sc, o->f2, "2", true);
        sc->add_option("--matrix", o->matrix, "row-major matrix CSV")->required();
        sc->add_option("--out", o->out, "tensor CSV output");
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_product_analyze(*o); }; });
    }
    { // h1dd
        auto o = std::make_shared<ProductOpts>();
        auto* sc = app.add_subcommand("h1dd", "product square function and its L1 norm");
        add_factor(sc, o->f1, "1", true);
        add_factor(sc, o->f2, "2", true);
        sc->add_option("--matrix", o->matrix, "row-major matrix CSV")->required();
        sc->add_option("--out", o->out, "write the square function as matrix CSV");
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_h1dd(*o); }; });
    }
    { // bmodd
        auto o = std::make_shared<ProductOpts>();
        auto* sc = app.add_subcommand("bmodd", "Carleson functional over an open-set family");
        add_factor(sc, o->f1, "1", true);
        add_factor(sc, o->f2, "2", true);
        sc->add_option("--matrix", o->matrix, "row-major matrix CSV")->required();
        sc->add_option("--omega-family", o->family, "which open sets to maximize over")
            ->check(CLI::IsMember({"rects", "levelsets", "file"}));
        sc->add_option("--omega-file", o->omega_file, "JSON list of point-id lists");
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_bmodd(*o); }; });
    }
    { // atoms
        auto o = std::make_shared<ProductOpts>();
        auto* sc = app.add_subcommand("atoms", "atomic decomposition of the square-function level sets");
        add_factor(sc, o->f1, "1", true);
        add_factor(sc, o->f2, "2", true);
        sc->add_option("--matrix", o->matrix, "row-major matrix CSV")->required();
        sc->add_option("--ctilde", o->ctilde, "support-set threshold before adaptive halving");
        sc->add_option("--tol", o->tol, "per-atom validation tolerance");
        sc->add_option("--out", o->out, "write the atoms as JSON");
        add_common(sc, o->c, false);
        sc->callback([&action, o] { action = [o] { return run_atoms(*o); }; });
    }
    { // duality-bench
        auto o = std::make_shared<DualityOpts>();
        auto* sc = app.add_subcommand("duality-bench",
                                      "sequence-space pairing against the norm product");
        sc->add_option("--trials", o->trials, "number of seeded coefficient pairs");
        sc->add_option("--n1", o->n1, "first lattice size (power of two)");
        sc->add_option("--n2", o->n2, "second lattice size (power of two)");
        add_common(sc, o->c, true);
        sc->callback([&action, o] { action = [o] { return run_duality_bench(*o); }; });
    }
    { // structure-check
        auto o = std::make_shared<StructureOpts2>();
        auto* sc = app.add_subcommand("structure-check",
                                      "split atomic pieces across adjacent system pairs");
        sc->add_option("--space1", o->space1, "first factor space")->required();
        sc->add_option("--measure1", o->measure1, "first factor measure CSV");
        sc->add_option("--space2", o->space2, "second factor space")->required();
        sc->add_option("--measure2", o->measure2, "second factor measure CSV");
        sc->add_option("--matrix", o->matrix, "row-major matrix CSV")->required();
        sc->add_option("--systems1", o->systems1, "systems JSON for factor 1");
        sc->add_option("--systems2", o->systems2, "systems JSON for factor 2");
        sc->add_option("--T1", o->T1, "systems for factor 1 when building internally");
        sc->add_option("--T2", o->T2, "systems for factor 2 when building internally");
        sc->add_option("--delta1", o->delta1, "scale base for factor 1");
        sc->add_option("--delta2", o->delta2, "scale base for factor 2");
        sc->add_option("--ctilde", o->ctilde, "support-set threshold");
        add_common(sc, o->c, true);
        sc->callback([&action, o] { action = [o] { return run_structure_check(*o); }; });
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("dyadic");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return action ? action() : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace dyadic
