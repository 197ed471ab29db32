#include "dyadic/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dyadic {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& path, const std::string& tok) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) fail(path, "bad number '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        fail(path, "bad number '" + tok + "'");
    }
}

long long to_ll(const std::string& path, const std::string& tok) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used);
        if (used != tok.size()) fail(path, "bad integer '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        fail(path, "bad integer '" + tok + "'");
    }
}

std::vector<std::string> data_lines(const std::string& path, std::string* header = nullptr) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (header && header->empty()) *header = t;
            continue;
        }
        if (first) {
            first = false;
            const std::string head = trim(split(t, ',').front());
            if (head == "id" || head == "level" || head == "k1") {
                if (header && header->empty()) *header = t;
                continue;
            }
        }
        out.push_back(t);
    }
    return out;
}

json grid_to_json(const DyadicGrid& g) {
    json jg;
    jg["delta"] = g.delta;
    jg["k_min"] = g.k_min;
    jg["k_max"] = g.k_max;
    jg["distinguished_center"] = g.distinguished_center;
    json constants;
    if (std::isfinite(g.c1))
        constants["c1"] = g.c1;
    else
        constants["c1"] = nullptr;
    constants["C1"] = g.C1;
    constants["M"] = g.M;
    jg["constants"] = constants;
    json levels = json::array();
    for (const auto& lv : g.levels) {
        json jl;
        jl["k"] = lv.k;
        json cubes = json::array();
        for (const auto& q : lv.cubes) {
            json jq;
            jq["alpha"] = q.alpha;
            jq["center"] = q.center;
            jq["members"] = q.members;
            jq["parent"] = static_cast<long long>(q.parent);
            jq["children"] = q.children;
            jq["mass"] = q.mass;
            cubes.push_back(std::move(jq));
        }
        jl["cubes"] = std::move(cubes);
        levels.push_back(std::move(jl));
    }
    jg["levels"] = std::move(levels);
    return jg;
}

DyadicGrid grid_from_json(const std::string& path, const json& jg) {
    DyadicGrid g;
    g.delta = jg.at("delta").get<double>();
    g.k_min = jg.at("k_min").get<int>();
    g.k_max = jg.at("k_max").get<int>();
    g.distinguished_center = jg.at("distinguished_center").get<std::size_t>();
    const json& constants = jg.at("constants");
    g.c1 = constants.at("c1").is_null() ? std::numeric_limits<double>::infinity()
                                        : constants.at("c1").get<double>();
    g.C1 = constants.at("C1").get<double>();
    g.M = constants.at("M").get<std::size_t>();
    for (const json& jl : jg.at("levels")) {
        GridLevel lv;
        lv.k = jl.at("k").get<int>();
        for (const json& jq : jl.at("cubes")) {
            DyadicCube q;
            q.level = lv.k;
            q.alpha = jq.at("alpha").get<std::size_t>();
            q.center = jq.at("center").get<std::size_t>();
            q.members = jq.at("members").get<std::vector<std::size_t>>();
            q.parent = static_cast<std::ptrdiff_t>(jq.at("parent").get<long long>());
            q.children = jq.at("children").get<std::vector<std::size_t>>();
            q.mass = jq.at("mass").get<double>();
            lv.centers.push_back(q.center);
            lv.cubes.push_back(std::move(q));
        }
        g.levels.push_back(std::move(lv));
    }
    if (g.levels.empty()) fail(path, "grid has no levels");
    if (g.levels.front().k != g.k_min || g.levels.back().k != g.k_max ||
        g.levels.size() != static_cast<std::size_t>(g.k_max - g.k_min) + 1)
        fail(path, "level range disagrees with k_min/k_max");
    std::size_t n = 0;
    for (const auto& q : g.levels.front().cubes) n += q.members.size();
    for (auto& lv : g.levels) {
        lv.point_cube.assign(n, 0);
        for (const auto& q : lv.cubes)
            for (std::size_t x : q.members) {
                if (x >= n) fail(path, "member index out of range");
                lv.point_cube[x] = q.alpha;
            }
    }
    return g;
}

} // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(tmp, "cannot open for writing");
        out << content;
        if (!out.flush()) fail(tmp, "write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(path, "rename failed: " + ec.message());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

SpaceBundle load_space(const std::string& path) {
    SpaceBundle out;
    if (ends_with(path, ".json")) {
        json j;
        try {
            j = json::parse(read_text_file(path));
        } catch (const json::exception& e) {
            fail(path, e.what());
        }
        const std::string metric = j.value("metric", j.contains("dist_matrix")
                                                         ? std::string("matrix")
                                                         : std::string("euclidean"));
        const double exponent = j.value("exponent", 1.0);
        if (metric == "matrix") {
            const auto rows = j.at("dist_matrix").get<std::vector<std::vector<double>>>();
            const std::size_t n = rows.size();
            std::vector<double> flat;
            flat.reserve(n * n);
            for (const auto& r : rows) {
                if (r.size() != n) fail(path, "distance matrix is not square");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            if (exponent != 1.0)
                for (double& d : flat) d = std::pow(d, exponent);
            out.space = make_space_from_matrix(std::move(flat), n);
        } else {
            const auto pts = j.at("points").get<std::vector<std::vector<double>>>();
            if (metric == "euclidean")
                out.space = make_space_euclidean(pts, exponent);
            else if (metric == "max")
                out.space = make_space_max(pts, exponent);
            else
                fail(path, "unknown metric '" + metric + "'");
        }
        if (j.contains("masses")) {
            auto masses = j.at("masses").get<std::vector<double>>();
            if (masses.size() != out.space.n) fail(path, "masses length mismatch");
            out.mu = make_measure(std::move(masses));
        } else {
            out.mu = unit_measure(out.space.n);
        }
        return out;
    }
    // CSV points
    const auto lines = data_lines(path);
    std::vector<std::vector<double>> pts;
    for (const auto& line : lines) {
        const auto toks = split(line, ',');
        if (toks.size() < 2) fail(path, "point row needs id and coordinates");
        std::vector<double> p;
        for (std::size_t i = 1; i < toks.size(); ++i) p.push_back(to_double(path, trim(toks[i])));
        pts.push_back(std::move(p));
    }
    out.space = make_space_euclidean(pts);
    out.mu = unit_measure(out.space.n);
    return out;
}

namespace {

std::vector<double> load_id_value(const std::string& path, std::size_t n, const char* what) {
    const auto lines = data_lines(path);
    std::vector<double> vals(n, 0.0);
    std::vector<char> seen(n, 0);
    for (const auto& line : lines) {
        const auto toks = split(line, ',');
        if (toks.size() != 2) fail(path, std::string(what) + " row needs id,value");
        const long long id = to_ll(path, trim(toks[0]));
        if (id < 0 || static_cast<std::size_t>(id) >= n) fail(path, "id out of range");
        if (seen[static_cast<std::size_t>(id)]) fail(path, "duplicate id");
        seen[static_cast<std::size_t>(id)] = 1;
        vals[static_cast<std::size_t>(id)] = to_double(path, trim(toks[1]));
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) fail(path, "missing id " + std::to_string(i));
    return vals;
}

} // namespace

PointMassMeasure load_measure(const std::string& path, std::size_t n) {
    return make_measure(load_id_value(path, n, "measure"));
}

std::vector<double> load_signal(const std::string& path, std::size_t n) {
    return load_id_value(path, n, "signal");
}

void save_signal(const std::string& path, const std::vector<double>& f) {
    std::string out = "id,value\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        out += std::to_string(i) + "," + format_double(f[i]) + "\n";
    write_text_file(path, out);
}

MatrixSignal load_matrix_signal(const std::string& path) {
    std::string header;
    const auto lines = data_lines(path, &header);
    MatrixSignal m;
    if (!header.empty() && header[0] == '#') {
        for (const auto& tok : split(header.substr(1), ',')) {
            const auto kv = split(trim(tok), '=');
            if (kv.size() != 2) continue;
            const std::string key = trim(kv[0]);
            if (key == "space1") m.name1 = trim(kv[1]);
            if (key == "space2") m.name2 = trim(kv[1]);
        }
    }
    for (const auto& line : lines) {
        const auto toks = split(line, ',');
        if (m.cols == 0) m.cols = toks.size();
        if (toks.size() != m.cols) fail(path, "ragged matrix row");
        for (const auto& t : toks) m.values.push_back(to_double(path, trim(t)));
        ++m.rows;
    }
    if (m.rows == 0) fail(path, "matrix file has no data");
    return m;
}

void save_matrix_csv(const std::string& path, const MatrixSignal& m) {
    if (m.values.size() != m.rows * m.cols)
        throw std::invalid_argument("matrix shape disagrees with its data");
    std::string out = "# space1=" + m.name1 + ",space2=" + m.name2 +
                      ",rows=" + std::to_string(m.rows) + ",cols=" + std::to_string(m.cols) + "\n";
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            out += format_double(m.values[r * m.cols + c]);
            out += c + 1 == m.cols ? '\n' : ',';
        }
    }
    write_text_file(path, out);
}

void save_grid_json(const std::string& path, const DyadicGrid& g) {
    write_text_file(path, grid_to_json(g).dump(2) + "\n");
}

DyadicGrid load_grid_json(const std::string& path) {
    try {
        return grid_from_json(path, json::parse(read_text_file(path)));
    } catch (const json::exception& e) {
        fail(path, e.what());
    }
}

void save_systems_json(const std::string& path, const AdjacentSystems& sys) {
    json j;
    j["delta"] = sys.delta;
    j["T"] = sys.T;
    json grids = json::array();
    for (const auto& g : sys.grids) grids.push_back(grid_to_json(g));
    j["grids"] = std::move(grids);
    write_text_file(path, j.dump(2) + "\n");
}

AdjacentSystems load_systems_json(const std::string& path) {
    try {
        const json j = json::parse(read_text_file(path));
        AdjacentSystems sys;
        sys.delta = j.at("delta").get<double>();
        sys.T = j.at("T").get<std::size_t>();
        for (const json& jg : j.at("grids")) sys.grids.push_back(grid_from_json(path, jg));
        if (sys.grids.size() != sys.T) fail(path, "grid count disagrees with T");
        return sys;
    } catch (const json::exception& e) {
        fail(path, e.what());
    }
}

void save_coefficients_csv(const std::string& path, const HaarBasis& basis,
                           const HaarCoefficients& c) {
    if (c.coeff.size() != basis.funcs.size())
        throw std::invalid_argument("coefficient count disagrees with the basis");
    std::string out = "level,alpha,u,value\n";
    out += "mean,0,0," + format_double(c.mean) + "\n";
    for (std::size_t i = 0; i < basis.funcs.size(); ++i) {
        const HaarFunction& h = basis.funcs[i];
        out += std::to_string(h.level) + "," + std::to_string(h.alpha) + "," +
               std::to_string(h.u) + "," + format_double(c.coeff[i]) + "\n";
    }
    write_text_file(path, out);
}

HaarCoefficients load_coefficients_csv(const std::string& path, const HaarBasis& basis) {
    const auto lines = data_lines(path);
    HaarCoefficients c;
    c.coeff.assign(basis.funcs.size(), 0.0);
    for (const auto& line : lines) {
        const auto toks = split(line, ',');
        if (toks.size() != 4) fail(path, "coefficient row needs level,alpha,u,value");
        if (trim(toks[0]) == "mean") {
            c.mean = to_double(path, trim(toks[3]));
            continue;
        }
        const int level = static_cast<int>(to_ll(path, trim(toks[0])));
        const std::size_t alpha = static_cast<std::size_t>(to_ll(path, trim(toks[1])));
        const std::size_t u = static_cast<std::size_t>(to_ll(path, trim(toks[2])));
        const auto it = basis.index.find({level, alpha, u});
        if (it == basis.index.end())
            fail(path, "no basis function at level " + std::to_string(level) + ", alpha " +
                           std::to_string(alpha) + ", u " + std::to_string(u));
        c.coeff[it->second] = to_double(path, trim(toks[3]));
    }
    return c;
}

void save_tensor_csv(const std::string& path, const ProductGrid& pg, const CoefficientTensor& t) {
    if (t.m1 != pg.b1.funcs.size() || t.m2 != pg.b2.funcs.size())
        throw std::invalid_argument("tensor shape disagrees with the bases");
    std::string out = "k1,a1,u1,k2,a2,u2,value\n";
    for (std::size_t i = 0; i < t.m1; ++i) {
        const HaarFunction& h1 = pg.b1.funcs[i];
        for (std::size_t j = 0; j < t.m2; ++j) {
            const double v = t.at(i, j);
            if (v == 0.0) continue;
            const HaarFunction& h2 = pg.b2.funcs[j];
            out += std::to_string(h1.level) + "," + std::to_string(h1.alpha) + "," +
                   std::to_string(h1.u) + "," + std::to_string(h2.level) + "," +
                   std::to_string(h2.alpha) + "," + std::to_string(h2.u) + "," +
                   format_double(v) + "\n";
        }
    }
    write_text_file(path, out);
}

CoefficientTensor load_tensor_csv(const std::string& path, const ProductGrid& pg) {
    const auto lines = data_lines(path);
    CoefficientTensor t = zero_tensor(pg);
    for (const auto& line : lines) {
        const auto toks = split(line, ',');
        if (toks.size() != 7) fail(path, "tensor row needs k1,a1,u1,k2,a2,u2,value");
        const int k1 = static_cast<int>(to_ll(path, trim(toks[0])));
        const std::size_t a1 = static_cast<std::size_t>(to_ll(path, trim(toks[1])));
        const std::size_t u1 = static_cast<std::size_t>(to_ll(path, trim(toks[2])));
        const int k2 = static_cast<int>(to_ll(path, trim(toks[3])));
        const std::size_t a2 = static_cast<std::size_t>(to_ll(path, trim(toks[4])));
        const std::size_t u2 = static_cast<std::size_t>(to_ll(path, trim(toks[5])));
        const auto i1 = pg.b1.index.find({k1, a1, u1});
        const auto i2 = pg.b2.index.find({k2, a2, u2});
        if (i1 == pg.b1.index.end() || i2 == pg.b2.index.end())
            fail(path, "tensor entry references a missing basis function");
        t.at(i1->second, i2->second) = to_double(path, trim(toks[6]));
    }
    return t;
}

} // namespace dyadic
