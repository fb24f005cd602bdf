#include "qg/config_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qg {

namespace {

using nlohmann::json;

// Line/column of a byte offset, for parse diagnostics.
std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Field extraction with origin + dotted-path diagnostics.
struct Parser {
    std::string origin;

    [[noreturn]] void fail(const std::string& path, const std::string& why) const {
        throw ConfigError(origin + ": field " + path + ": " + why);
    }

    const json* find(const json& j, const std::string& path, const char* key) const {
        if (!j.is_object()) fail(path, "expected an object");
        auto it = j.find(key);
        return it == j.end() ? nullptr : &*it;
    }

    const json& req(const json& j, const std::string& path, const char* key) const {
        const json* v = find(j, path, key);
        if (!v) fail(path + "." + key, "missing required field");
        return *v;
    }

    double num(const json& v, const std::string& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    int integer(const json& v, const std::string& path) const {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        return v.get<int>();
    }

    bool boolean(const json& v, const std::string& path) const {
        if (!v.is_boolean()) fail(path, "expected a boolean");
        return v.get<bool>();
    }

    std::string str(const json& v, const std::string& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    double opt_num(const json& j, const std::string& path, const char* key,
                   double dflt) const {
        const json* v = find(j, path, key);
        return v ? num(*v, path + "." + key) : dflt;
    }

    int opt_int(const json& j, const std::string& path, const char* key,
                int dflt) const {
        const json* v = find(j, path, key);
        return v ? integer(*v, path + "." + key) : dflt;
    }

    bool opt_bool(const json& j, const std::string& path, const char* key,
                  bool dflt) const {
        const json* v = find(j, path, key);
        return v ? boolean(*v, path + "." + key) : dflt;
    }

    cplx complex_pair(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 2)
            fail(path, "expected a complex number as [re, im]");
        return {num(v[0], path + "[0]"), num(v[1], path + "[1]")};
    }

    Poly poly(const json& v, const std::string& path) const {
        if (!v.is_array()) fail(path, "expected an array of [re, im] coefficients");
        Poly p;
        for (std::size_t i = 0; i < v.size(); ++i)
            p.c.push_back(complex_pair(v[i], path + "[" + std::to_string(i) + "]"));
        return p;
    }

    Sector sector(const json& v, const std::string& path, bool bounded_required) const {
        Sector s;
        s.direction = deg2rad(num(req(v, path, "direction_deg"), path + ".direction_deg"));
        s.half_opening =
            deg2rad(num(req(v, path, "half_opening_deg"), path + ".half_opening_deg"));
        const json* r = find(v, path, "radius");
        if (r) {
            s.radius = num(*r, path + ".radius");
            if (!(s.radius > 0.0)) fail(path + ".radius", "must be positive");
        } else if (bounded_required) {
            fail(path + ".radius", "missing required field");
        } else {
            s.radius = std::numeric_limits<double>::infinity();
        }
        if (!(s.half_opening > 0.0) || !(s.half_opening <= pi))
            fail(path + ".half_opening_deg", "must lie in (0, 180]");
        return s;
    }

    // h >= 1 enforced: a zero power would encode a forbidden constant term.
    std::map<int, Poly> power_map(const json& v, const std::string& path) const {
        if (!v.is_array()) fail(path, "expected an array of {h, coeffs} entries");
        std::map<int, Poly> m;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string ep = path + "[" + std::to_string(i) + "]";
            const json& e = v[i];
            const int h = integer(req(e, ep, "h"), ep + ".h");
            if (h < 1) fail(ep + ".h", "powers must be >= 1");
            if (m.count(h)) fail(ep + ".h", "duplicate power");
            m[h] = poly(req(e, ep, "coeffs"), ep + ".coeffs");
        }
        return m;
    }
};

ProblemSpec parse_problem(const Parser& P, const json& j) {
    const std::string path = "problem";
    ProblemSpec s;
    s.k = P.integer(P.req(j, path, "k"), path + ".k");
    s.S = P.integer(P.req(j, path, "S"), path + ".S");
    s.q = P.num(P.req(j, path, "q"), path + ".q");
    s.eps0 = P.num(P.req(j, path, "eps0"), path + ".eps0");
    s.Delta = P.opt_num(j, path, "delta", 0.5);
    s.k1 = P.opt_num(j, path, "k1", 1.0);
    if (s.k < 1) P.fail(path + ".k", "must be >= 1");
    if (s.S < 1) P.fail(path + ".S", "must be >= 1");
    if (!(s.q > 1.0)) P.fail(path + ".q", "must be > 1");
    s.P = P.poly(P.req(j, path, "P"), path + ".P");
    if (s.P.degree() < 1 || s.P.c[0] == cplx{0.0, 0.0})
        P.fail(path + ".P", "symbol must have degree >= 1 and P(0) != 0");

    const json& terms = P.req(j, path, "terms");
    if (!terms.is_array()) P.fail(path + ".terms", "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = path + ".terms[" + std::to_string(i) + "]";
        const json& tj = terms[i];
        MonomialTerm t;
        t.l0 = P.integer(P.req(tj, tp, "l0"), tp + ".l0");
        t.l1 = P.integer(P.req(tj, tp, "l1"), tp + ".l1");
        t.l2 = P.integer(P.req(tj, tp, "l2"), tp + ".l2");
        t.l3 = P.integer(P.req(tj, tp, "l3"), tp + ".l3");
        t.Delta_l = P.integer(P.req(tj, tp, "delta_l"), tp + ".delta_l");
        if (t.l0 < 0 || t.l1 < 0 || t.l2 < 0 || t.l3 < 0)
            P.fail(tp, "term exponents must be non-negative");
        t.c = P.power_map(P.req(tj, tp, "c"), tp + ".c");
        s.terms.push_back(std::move(t));
    }

    const json& cauchy = P.req(j, path, "cauchy");
    if (!cauchy.is_array()) P.fail(path + ".cauchy", "expected an array");
    for (std::size_t i = 0; i < cauchy.size(); ++i) {
        const std::string cp = path + ".cauchy[" + std::to_string(i) + "]";
        const json& cj = cauchy[i];
        const int jj = P.integer(P.req(cj, cp, "j"), cp + ".j");
        if (jj < 0 || jj >= s.S) P.fail(cp + ".j", "Cauchy index must lie in [0, S)");
        if (s.cauchy.p.count(jj)) P.fail(cp + ".j", "duplicate Cauchy index");
        s.cauchy.p[jj] = P.power_map(P.req(cj, cp, "data"), cp + ".data");
    }
    return s;
}

}  // namespace

std::vector<std::vector<double>> LabConfig::probe_phases() const {
    std::vector<std::vector<double>> phases;
    for (const Sector& s : covering.sectors) {
        std::vector<double> row;
        for (double off : probe_offsets) row.push_back(s.direction + off);
        phases.push_back(std::move(row));
    }
    return phases;
}

LabConfig parse_config(const std::string& text, const std::string& origin) {
    Parser P{origin};
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream os;
        os << origin << ": JSON parse error at line " << line << ", column " << col
           << ": " << e.what();
        throw ConfigError(os.str());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    LabConfig cfg;
    cfg.raw_text = text;
    cfg.origin = origin;
    cfg.schema_version = P.opt_int(root, "", "schema_version", 1);
    if (cfg.schema_version != 1)
        P.fail("schema_version", "unsupported version (this build reads version 1)");
    cfg.name = P.str(P.req(root, "", "name"), "name");
    cfg.problem = parse_problem(P, P.req(root, "", "problem"));

    const std::string vs =
        P.find(root, "", "variant") ? P.str(*P.find(root, "", "variant"), "variant")
                                    : "eps";
    if (vs == "eps")
        cfg.variant = Variant::eps_family;
    else if (vs == "t")
        cfg.variant = Variant::t_family;
    else
        P.fail("variant", "expected \"eps\" or \"t\"");

    const json& geo = P.req(root, "", "geometry");
    const std::string gp = "geometry";
    const json& cov = P.req(geo, gp, "covering");
    if (!cov.is_array() || cov.size() < 2)
        P.fail(gp + ".covering", "expected an array of at least two sectors");
    std::vector<Sector> sectors;
    for (std::size_t i = 0; i < cov.size(); ++i)
        sectors.push_back(
            P.sector(cov[i], gp + ".covering[" + std::to_string(i) + "]", true));
    const double punctured =
        P.num(P.req(geo, gp, "punctured_radius"), gp + ".punctured_radius");
    try {
        cfg.covering = GoodCovering::make(sectors, punctured);
    } catch (const std::exception& e) {
        P.fail(gp + ".covering", e.what());
    }
    cfg.companion = P.sector(P.req(geo, gp, "companion"), gp + ".companion", true);
    const json& borel = P.req(geo, gp, "borel");
    if (!borel.is_array() || borel.size() != sectors.size())
        P.fail(gp + ".borel", "expected one unbounded sector per covering sector");
    for (std::size_t i = 0; i < borel.size(); ++i)
        cfg.borel.push_back(
            P.sector(borel[i], gp + ".borel[" + std::to_string(i) + "]", false));
    const json& offs = P.req(geo, gp, "probe_offsets_deg");
    if (!offs.is_array() || offs.empty())
        P.fail(gp + ".probe_offsets_deg", "expected a non-empty array of degrees");
    for (std::size_t i = 0; i < offs.size(); ++i)
        cfg.probe_offsets.push_back(deg2rad(
            P.num(offs[i], gp + ".probe_offsets_deg[" + std::to_string(i) + "]")));

    if (const json* sv = P.find(root, "", "solver")) {
        const std::string sp = "solver";
        cfg.solver.N = P.opt_int(*sv, sp, "N", cfg.solver.N);
        cfg.solver.r_out = P.opt_num(*sv, sp, "r_out", cfg.solver.r_out);
        cfg.solver.nodes_per_decade =
            P.opt_int(*sv, sp, "nodes_per_decade", cfg.solver.nodes_per_decade);
        cfg.solver.decades = P.opt_num(*sv, sp, "decades", cfg.solver.decades);
        cfg.solver.gl_points = P.opt_int(*sv, sp, "gl_points", cfg.solver.gl_points);
        cfg.solver.disc_rays = P.opt_int(*sv, sp, "disc_rays", cfg.solver.disc_rays);
        if (cfg.solver.N < cfg.problem.S)
            P.fail(sp + ".N", "truncation must be >= the Cauchy order S");
    }
    if (const json* av = P.find(root, "", "assemble")) {
        const std::string ap = "assemble";
        cfg.assemble.R1 = P.opt_num(*av, ap, "R1", cfg.assemble.R1);
        cfg.assemble.min_margin =
            P.opt_num(*av, ap, "min_margin", cfg.assemble.min_margin);
        cfg.assemble.N_z = P.opt_int(*av, ap, "N_z", cfg.assemble.N_z);
    }
    if (const json* pg = P.find(root, "", "probe_grid")) {
        const std::string pp = "probe_grid";
        cfg.probe_grid.r_min = P.opt_num(*pg, pp, "r_min", cfg.probe_grid.r_min);
        cfg.probe_grid.r_max = P.opt_num(*pg, pp, "r_max", cfg.probe_grid.r_max);
        cfg.probe_grid.count = P.opt_int(*pg, pp, "count", cfg.probe_grid.count);
        cfg.probe_grid.open_upper =
            P.opt_bool(*pg, pp, "open_upper", cfg.probe_grid.open_upper);
        if (!(cfg.probe_grid.r_min > 0.0) ||
            !(cfg.probe_grid.r_max > cfg.probe_grid.r_min))
            P.fail(pp, "requires 0 < r_min < r_max");
        if (cfg.probe_grid.count < 4)
            P.fail(pp + ".count", "flatness fitting needs at least 4 probes");
    }

    cfg.norm.base = cfg.companion;
    cfg.norm.q = cfg.problem.q;
    cfg.norm.R1 = cfg.assemble.R1;
    if (const json* nv = P.find(root, "", "norm")) {
        const std::string np = "norm";
        if (const json* var = P.find(*nv, np, "variant")) {
            const std::string nvs = P.str(*var, np + ".variant");
            if (nvs == "q-relative")
                cfg.norm.variant = NormSpec::Variant::q_relative;
            else if (nvs == "sup")
                cfg.norm.variant = NormSpec::Variant::sup;
            else
                P.fail(np + ".variant", "expected \"q-relative\" or \"sup\"");
        }
        cfg.norm.R1 = P.opt_num(*nv, np, "R1", cfg.norm.R1);
        cfg.norm.levels = P.opt_int(*nv, np, "levels", cfg.norm.levels);
        cfg.norm.arc_nodes = P.opt_int(*nv, np, "arc_nodes", cfg.norm.arc_nodes);
        cfg.norm.radial_nodes =
            P.opt_int(*nv, np, "radial_nodes", cfg.norm.radial_nodes);
    }

    cfg.ch_n_max = P.opt_int(root, "", "ch_n_max", cfg.ch_n_max);
    if (cfg.ch_n_max < 8)
        P.fail("ch_n_max", "growth classification needs at least 8 coefficients");

    if (const json* rv = P.find(root, "", "rs")) {
        const std::string rp = "rs";
        if (const json* nr = P.find(*rv, rp, "n_range")) {
            if (!nr->is_array() || nr->empty()) P.fail(rp + ".n_range", "expected an array");
            cfg.rs.N_range.clear();
            for (std::size_t i = 0; i < nr->size(); ++i)
                cfg.rs.N_range.push_back(
                    P.integer((*nr)[i], rp + ".n_range[" + std::to_string(i) + "]"));
        }
        if (const json* rr = P.find(*rv, rp, "radii")) {
            if (!rr->is_array() || rr->empty()) P.fail(rp + ".radii", "expected an array");
            cfg.rs.radii.clear();
            for (std::size_t i = 0; i < rr->size(); ++i)
                cfg.rs.radii.push_back(
                    P.num((*rr)[i], rp + ".radii[" + std::to_string(i) + "]"));
        }
        cfg.rs.n_z_levels = P.opt_int(*rv, rp, "n_z_levels", cfg.rs.n_z_levels);
        cfg.rs.circle_nodes = P.opt_int(*rv, rp, "circle_nodes", cfg.rs.circle_nodes);
        cfg.rs.circle_factor =
            P.opt_num(*rv, rp, "circle_factor", cfg.rs.circle_factor);
        cfg.rs.cut_factor = P.opt_num(*rv, rp, "cut_factor", cfg.rs.cut_factor);
    }

    return cfg;
}

LabConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace qg
