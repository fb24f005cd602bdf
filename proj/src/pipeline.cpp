#include "qg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qg/asymptotics.hpp"
#include "qg/fitting.hpp"
#include "qg/laplace.hpp"
#include "qg/report.hpp"

namespace qg {

namespace {

std::string join_path(const std::string& dir, const std::string& leaf) {
    return (std::filesystem::path(dir) / leaf).string();
}

std::string config_hash(const LabConfig& cfg) { return hash_hex(fnv1a64(cfg.raw_text)); }

const char* variant_name(Variant v) { return v == Variant::eps_family ? "eps" : "t"; }

const char* norm_name(NormSpec::Variant v) {
    return v == NormSpec::Variant::q_relative ? "q-relative" : "sup";
}

const char* norm_slug(NormSpec::Variant v) {
    return v == NormSpec::Variant::q_relative ? "qrel" : "sup";
}

JsonValue cplx_json(cplx z) {
    JsonValue v = JsonValue::array();
    v.push(JsonValue::number(z.real()));
    v.push(JsonValue::number(z.imag()));
    return v;
}

JsonValue sector_json(const Sector& s) {
    JsonValue v = JsonValue::object();
    v.set("direction_deg", JsonValue::number(rad2deg(s.direction)));
    v.set("half_opening_deg", JsonValue::number(rad2deg(s.half_opening)));
    if (s.bounded())
        v.set("radius", JsonValue::number(s.radius));
    else
        v.set("radius", JsonValue::string("unbounded"));
    return v;
}

JsonValue hypotheses_json(const HypothesisReport& rep) {
    JsonValue v = JsonValue::object();
    v.set("all_pass", JsonValue::boolean(rep.all_pass));
    JsonValue lines = JsonValue::array();
    for (const HypothesisLine& l : rep.lines) {
        JsonValue lv = JsonValue::object();
        lv.set("id", JsonValue::string(l.id));
        lv.set("pass", JsonValue::boolean(l.pass));
        lv.set("slack", JsonValue::number(l.slack));
        lv.set("detail", JsonValue::string(l.detail));
        lines.push(std::move(lv));
    }
    v.set("lines", std::move(lines));
    return v;
}

std::string failing_ids(const HypothesisReport& rep, std::size_t cap = 4) {
    std::string out;
    std::size_t n = 0;
    for (const HypothesisLine& l : rep.lines) {
        if (l.pass) continue;
        if (n == cap) {
            out += ", ...";
            break;
        }
        if (n) out += ", ";
        out += l.id;
        ++n;
    }
    return out;
}

JsonValue flatness_json(const FlatnessFit& f) {
    JsonValue v = JsonValue::object();
    v.set("A", JsonValue::number(f.A));
    v.set("B", JsonValue::number(f.B));
    v.set("r2", JsonValue::number(f.r2));
    v.set("k", JsonValue::number(f.k));
    v.set("flat", JsonValue::boolean(f.flat));
    v.set("x_min", JsonValue::number(f.x_min));
    v.set("x_max", JsonValue::number(f.x_max));
    v.set("n_samples", JsonValue::integer(f.n_samples));
    return v;
}

JsonValue classification_json(const GrowthClassification& c) {
    JsonValue v = JsonValue::object();
    const char* verdict = "ambiguous";
    switch (c.verdict) {
        case GrowthClassification::Verdict::convergent: verdict = "convergent"; break;
        case GrowthClassification::Verdict::gevrey: verdict = "gevrey"; break;
        case GrowthClassification::Verdict::mixed: verdict = "mixed"; break;
        case GrowthClassification::Verdict::ambiguous: verdict = "ambiguous"; break;
    }
    v.set("verdict", JsonValue::string(verdict));
    v.set("s", JsonValue::number(c.s));
    v.set("s_err", JsonValue::number(c.s_err));
    v.set("qhat", JsonValue::number(c.qhat));
    v.set("qhat_err", JsonValue::number(c.qhat_err));
    v.set("resid_gevrey", JsonValue::number(c.resid_g));
    v.set("resid_mixed", JsonValue::number(c.resid_m));
    v.set("n_used", JsonValue::integer(c.n_used));
    v.set("detail", JsonValue::string(c.detail));
    return v;
}

JsonValue rs_json(const RsBoundReport& r) {
    JsonValue v = JsonValue::object();
    v.set("mode", JsonValue::string(r.mode == RsMode::gevrey ? "gevrey" : "mixed"));
    v.set("pass", JsonValue::boolean(r.pass));
    v.set("C", JsonValue::number(r.C));
    v.set("M", JsonValue::number(r.M));
    v.set("violation", JsonValue::number(r.violation));
    v.set("degenerate_zero", JsonValue::boolean(r.degenerate_zero));
    v.set("detail", JsonValue::string(r.detail));
    JsonValue samples = JsonValue::array();
    for (const MixedBoundSample& s : r.samples) {
        JsonValue sv = JsonValue::object();
        sv.set("N", JsonValue::integer(s.N));
        sv.set("x", JsonValue::number(s.x));
        sv.set("y", JsonValue::number(s.y));
        samples.push(std::move(sv));
    }
    v.set("samples", std::move(samples));
    return v;
}

JsonValue bound_fit_json(const BoundFitReport& r) {
    JsonValue v = JsonValue::object();
    const char* id = "ray_envelope";
    switch (r.id) {
        case BoundId::series_envelope: id = "series_envelope"; break;
        case BoundId::ray_envelope: id = "ray_envelope"; break;
        case BoundId::disc_envelope: id = "disc_envelope"; break;
        case BoundId::annulus_envelope: id = "annulus_envelope"; break;
    }
    v.set("id", JsonValue::string(id));
    v.set("pass", JsonValue::boolean(r.pass));
    v.set("violation", JsonValue::number(r.violation));
    JsonValue consts = JsonValue::object();
    for (const auto& [k, val] : r.constants) consts.set(k, JsonValue::number(val));
    v.set("constants", std::move(consts));
    v.set("detail", JsonValue::string(r.detail));
    return v;
}

struct Assembly {
    std::shared_ptr<FamilyProvider> provider;
    AdmissibleConfig config;
    std::vector<SectorialSolution> sols;
    Variant variant = Variant::eps_family;
    cplx other_rep;  // fixed representative of the companion variable
    cplx param_rep;  // representative parameter on sector 0's bisector
};

Assembly build_assembly(const LabConfig& cfg, Variant variant, std::optional<int> N) {
    Assembly a;
    a.variant = variant;
    SolverOptions sopts = cfg.solver;
    if (N) sopts.N = *N;
    if (sopts.N < cfg.problem.S)
        throw ConfigError(cfg.origin +
                          ": solver truncation N must be >= the Cauchy order S");
    a.provider = std::make_shared<FamilyProvider>(cfg.problem, sopts);
    a.config = build_admissible(cfg.covering, cfg.companion, cfg.borel, cfg.problem.P,
                                cfg.problem.k, cfg.probe_phases());
    a.other_rep = std::polar(0.5 * cfg.companion.radius, cfg.companion.direction);
    const double mid_r = 0.5 * (cfg.probe_grid.r_min + cfg.probe_grid.r_max);
    a.param_rep = std::polar(mid_r, cfg.covering.sectors[0].direction);
    for (std::size_t p = 0; p < cfg.covering.sectors.size(); ++p) {
        const cplx pr = std::polar(mid_r, cfg.covering.sectors[p].direction);
        std::vector<cplx> t_probes, eps_probes;
        if (variant == Variant::eps_family) {
            t_probes = {a.other_rep};
            eps_probes = {pr};
        } else {
            t_probes = {pr};
            eps_probes = {a.other_rep};
        }
        a.sols.push_back(assemble(a.provider, a.config, variant, static_cast<int>(p),
                                  t_probes, eps_probes, cfg.assemble));
    }
    return a;
}

// The scalar solution value used for Cauchy-Heine extraction, with the
// asymptotic parameter in its variant slot.
cplx scalar_at(const SectorialSolution& sol, cplx other_rep, cplx z0, cplx param) {
    return sol.variant == Variant::eps_family ? evaluate(sol, other_rep, z0, param).value
                                              : evaluate(sol, param, z0, other_rep).value;
}

}  // namespace

RunResult run_validate(const LabConfig& cfg, const PipelineOptions& opts) {
    const HypothesisReport hyp = validate(cfg.problem);

    JsonValue root = JsonValue::object();
    root.set("schema_version", JsonValue::integer(1));
    root.set("tool", JsonValue::string("qglab validate"));
    root.set("name", JsonValue::string(cfg.name));
    root.set("config_hash", JsonValue::string(config_hash(cfg)));
    JsonValue hj = hypotheses_json(hyp);
    root.set("hypothesis_report_hash", JsonValue::string(hash_hex(fnv1a64(hj.dump()))));
    root.set("hypotheses", std::move(hj));

    bool adm_ok = false;
    JsonValue adm = JsonValue::object();
    try {
        const AdmissibleConfig ac =
            build_admissible(cfg.covering, cfg.companion, cfg.borel, cfg.problem.P,
                             cfg.problem.k, cfg.probe_phases());
        adm_ok = true;
        adm.set("pass", JsonValue::boolean(true));
        JsonValue margins = JsonValue::array();
        for (double m : ac.margins) margins.push(JsonValue::number(m));
        adm.set("margins", std::move(margins));
        adm.set("root_clearance", JsonValue::number(ac.root_clearance));
        JsonValue roots = JsonValue::array();
        for (cplx r : ac.symbol_roots) roots.push(cplx_json(r));
        adm.set("symbol_roots", std::move(roots));
    } catch (const std::exception& e) {
        adm.set("pass", JsonValue::boolean(false));
        adm.set("error", JsonValue::string(e.what()));
    }
    root.set("admissibility", std::move(adm));

    const std::string path = join_path(opts.out_dir, cfg.name + "_validate.json");
    write_file(path, root.dump());

    if (!hyp.all_pass)
        return {exit_contract_failure, "hypotheses failed: " + failing_ids(hyp), {path}};
    if (!adm_ok)
        return {exit_contract_failure, "sectorial configuration is not admissible",
                {path}};
    return {exit_ok, "all hypotheses pass", {path}};
}

RunResult run_solve(const LabConfig& cfg, const PipelineOptions& opts) {
    const HypothesisReport hyp = validate(cfg.problem);
    if (!hyp.all_pass)
        return {exit_contract_failure, "hypotheses failed: " + failing_ids(hyp), {}};

    const Variant variant = opts.variant.value_or(cfg.variant);
    if (opts.N && *opts.N < cfg.problem.S)
        return {exit_usage, "solver truncation N must be >= the Cauchy order S", {}};
    Assembly A = build_assembly(cfg, variant, opts.N);

    // Reference family for the coefficient dumps and envelope fits: sector 0
    // at the representative parameter, with the disc stack attached.
    const cplx eps_rep = variant == Variant::eps_family ? A.param_rep : A.other_rep;
    std::vector<double> gammas;
    for (const SectorialSolution& s : A.sols) gammas.push_back(s.gamma);
    A.provider->disc(eps_rep, gammas);
    const auto fam = A.provider->family(A.sols[0].gamma, 0, eps_rep);

    JsonValue root = JsonValue::object();
    root.set("schema_version", JsonValue::integer(1));
    root.set("tool", JsonValue::string("qglab solve"));
    root.set("name", JsonValue::string(cfg.name));
    root.set("variant", JsonValue::string(variant_name(variant)));
    root.set("config_hash", JsonValue::string(config_hash(cfg)));
    root.set("hypothesis_report_hash",
             JsonValue::string(hash_hex(fnv1a64(hypotheses_json(hyp).dump()))));
    root.set("N", JsonValue::integer(fam->N));

    JsonValue sectors = JsonValue::array();
    for (const SectorialSolution& s : A.sols) {
        JsonValue sv = JsonValue::object();
        sv.set("p", JsonValue::integer(s.p));
        sv.set("gamma_deg", JsonValue::number(rad2deg(s.gamma)));
        sv.set("margin", JsonValue::number(s.margin));
        sv.set("t_dom", sector_json(s.t_dom));
        sv.set("par_dom", sector_json(s.par_dom));
        sectors.push(std::move(sv));
    }
    root.set("sectors", std::move(sectors));

    bool bounds_ok = true;
    JsonValue fits = JsonValue::array();
    for (BoundId id : {BoundId::ray_envelope, BoundId::disc_envelope,
                       BoundId::annulus_envelope, BoundId::series_envelope}) {
        const BoundFitReport rep = verify_coeff_bounds(*fam, cfg.problem, id,
                                                       cfg.problem.Delta);
        bounds_ok = bounds_ok && rep.pass;
        fits.push(bound_fit_json(rep));
    }
    root.set("bound_fits", std::move(fits));

    const cplx z0{0.5 * cfg.assemble.R1, 0.0};
    const cplx t_probe = variant == Variant::eps_family ? A.other_rep : A.param_rep;
    const cplx e_probe = variant == Variant::eps_family ? A.param_rep : A.other_rep;
    const PdeResidualReport pde = pde_residual(A.sols[0], t_probe, z0, e_probe);
    JsonValue pj = JsonValue::object();
    pj.set("t", cplx_json(t_probe));
    pj.set("z", cplx_json(z0));
    pj.set("eps", cplx_json(e_probe));
    pj.set("residual", JsonValue::number(pde.residual));
    pj.set("fd_check", JsonValue::number(pde.fd_check));
    root.set("pde_residual", std::move(pj));
    root.set("cache_reproduction_error",
             JsonValue::number(cache_reproduction_error(A.sols[0])));

    // Coefficient CSV along the sector-0 ray: radii of the top coefficient
    // (the common innermost range), thinned to a plot-friendly row count.
    std::vector<std::string> header = {"r"};
    for (int n = 0; n <= fam->N; ++n) {
        header.push_back("omega" + std::to_string(n) + "_re");
        header.push_back("omega" + std::to_string(n) + "_im");
    }
    CsvBuilder family_csv(header);
    const std::vector<double>& radii = fam->ray.at(fam->N).radii;
    const std::size_t stride = std::max<std::size_t>(1, radii.size() / 200);
    for (std::size_t i = 0; i < radii.size(); i += stride) {
        std::vector<std::string> row = {fmt_g15(radii[i])};
        for (int n = 0; n <= fam->N; ++n) {
            const cplx v = fam->eval_ray(n, radii[i]);
            row.push_back(fmt_g15(v.real()));
            row.push_back(fmt_g15(v.imag()));
        }
        family_csv.row(row);
    }

    CsvBuilder probes_csv({"p", "n", "t_re", "t_im", "eps_re", "eps_im", "u_re", "u_im"});
    for (const SectorialSolution& s : A.sols)
        for (const ProbeCache& pc : s.cache)
            for (std::size_t n = 0; n < pc.u_n.size(); ++n)
                probes_csv.row({std::to_string(s.p), std::to_string(n),
                                fmt_g15(pc.t.real()), fmt_g15(pc.t.imag()),
                                fmt_g15(pc.eps.real()), fmt_g15(pc.eps.imag()),
                                fmt_g15(pc.u_n[n].real()), fmt_g15(pc.u_n[n].imag())});

    const std::string json_path = join_path(opts.out_dir, cfg.name + "_solve.json");
    const std::string family_path = join_path(opts.out_dir, cfg.name + "_family.csv");
    const std::string probes_path = join_path(opts.out_dir, cfg.name + "_probes.csv");
    write_file(json_path, root.dump());
    write_file(family_path, family_csv.text());
    write_file(probes_path, probes_csv.text());

    if (!bounds_ok)
        return {exit_contract_failure, "coefficient envelope fit failed; see " + json_path,
                {json_path, family_path, probes_path}};
    return {exit_ok, "solved " + std::to_string(A.sols.size()) + " sectors",
            {json_path, family_path, probes_path}};
}

RunResult run_asym(const LabConfig& cfg, const PipelineOptions& opts) {
    const Variant variant = opts.variant.value_or(cfg.variant);
    NormSpec norm = cfg.norm;
    if (opts.norm_variant) norm.variant = *opts.norm_variant;

    // Artifact gate: the solve stage must have run on this exact config.
    if (!opts.solve_inline) {
        const std::string solve_path = join_path(opts.out_dir, cfg.name + "_solve.json");
        if (!file_exists(solve_path))
            return {exit_missing_artifacts,
                    "missing solve artifact " + solve_path +
                        " (run solve first or pass --solve-inline)",
                    {}};
        try {
            const auto doc = nlohmann::json::parse(read_file(solve_path));
            if (doc.at("config_hash").get<std::string>() != config_hash(cfg))
                return {exit_usage,
                        "solve artifact " + solve_path +
                            " was produced from a different config (hash mismatch)",
                        {}};
        } catch (const nlohmann::json::exception& e) {
            return {exit_usage,
                    "unreadable solve artifact " + solve_path + ": " + e.what(),
                    {}};
        }
    }

    const HypothesisReport hyp = validate(cfg.problem);
    if (!hyp.all_pass)
        return {exit_contract_failure, "hypotheses failed: " + failing_ids(hyp), {}};

    Assembly A = build_assembly(cfg, variant, opts.N);
    const int P = static_cast<int>(A.sols.size());
    const int k = cfg.problem.k;

    const std::string slug =
        cfg.name + "_asym_" + variant_name(variant) + "_" + norm_slug(norm.variant);

    JsonValue root = JsonValue::object();
    root.set("schema_version", JsonValue::integer(1));
    root.set("tool", JsonValue::string("qglab asym"));
    root.set("name", JsonValue::string(cfg.name));
    root.set("variant", JsonValue::string(variant_name(variant)));
    root.set("norm", JsonValue::string(norm_name(norm.variant)));
    root.set("config_hash", JsonValue::string(config_hash(cfg)));
    root.set("hypothesis_report_hash",
             JsonValue::string(hash_hex(fnv1a64(hypotheses_json(hyp).dump()))));

    const cplx z0{0.5 * cfg.assemble.R1, 0.0};
    JsonValue ev = JsonValue::object();
    ev.set("companion_rep", cplx_json(A.other_rep));
    ev.set("z0", cplx_json(z0));
    root.set("evaluation", std::move(ev));

    // Stage 1: cocycle measurements and flatness fits on every neighboring
    // pair. The fits run first: they are the decay precondition for the
    // Cauchy-Heine extraction below.
    struct PairData {
        int a = 0, b = 0;
        Sector overlap;
        CocycleReport rep;
        std::optional<FlatnessFit> fit, free_fit;
        std::string skip_reason;
    };
    std::vector<PairData> pairs;
    std::vector<std::string> files;
    for (int j = 0; j < P; ++j) {
        PairData pd;
        pd.a = j;
        pd.b = (j + 1) % P;
        const SectorialSolution& sa = A.sols[pd.a];
        const SectorialSolution& sb = A.sols[pd.b];
        const Sector& da = variant == Variant::eps_family ? sa.par_dom : sa.t_dom;
        const Sector& db = variant == Variant::eps_family ? sb.par_dom : sb.t_dom;
        pd.overlap = sector_intersection(da, db);
        std::vector<cplx> probes;
        for (int i = 0; i < cfg.probe_grid.count; ++i) {
            double r = cfg.probe_grid.r_min +
                       (cfg.probe_grid.r_max - cfg.probe_grid.r_min) *
                           (cfg.probe_grid.count == 1
                                ? 0.0
                                : static_cast<double>(i) / (cfg.probe_grid.count - 1));
            if (cfg.probe_grid.open_upper && r >= pd.overlap.radius)
                r = std::nextafter(pd.overlap.radius, 0.0);
            probes.push_back(std::polar(r, pd.overlap.direction));
        }
        pd.rep = cocycle(sa, sb, probes, norm);
        std::vector<std::pair<double, double>> xy;
        for (const CocyclePoint& pt : pd.rep.points)
            if (pt.norm > 0.0) xy.push_back({pt.magnitude, pt.norm});
        if (xy.size() >= 4) {
            pd.fit = fit_exponential_flatness(xy, k);
            pd.free_fit = fit_exponential_flatness_free_k(xy);
        } else {
            pd.skip_reason = "fewer than 4 positive cocycle samples";
        }
        pairs.push_back(std::move(pd));
    }

    JsonValue pairs_json = JsonValue::array();
    for (const PairData& pd : pairs) {
        JsonValue pv = JsonValue::object();
        pv.set("pair", JsonValue::string(std::to_string(pd.a) + "-" +
                                         std::to_string(pd.b)));
        pv.set("overlap", sector_json(pd.overlap));
        pv.set("arc_margin", JsonValue::number(pd.rep.arc_margin));
        JsonValue pts = JsonValue::array();
        for (const CocyclePoint& pt : pd.rep.points) {
            JsonValue tv = JsonValue::object();
            tv.set("radius", JsonValue::number(pt.magnitude));
            tv.set("norm", JsonValue::number(pt.norm));
            tv.set("tail", JsonValue::number(pt.tail));
            pts.push(std::move(tv));
        }
        pv.set("cocycle", std::move(pts));
        if (pd.fit) {
            pv.set("fit", flatness_json(*pd.fit));
            pv.set("fit_free_k", flatness_json(*pd.free_fit));
        } else {
            pv.set("fit_skipped", JsonValue::string(pd.skip_reason));
        }
        pairs_json.push(std::move(pv));

        CsvBuilder csv({"radius", "norm", "model"});
        for (const CocyclePoint& pt : pd.rep.points) {
            std::string model;
            if (pd.fit)
                model = fmt_g15(pd.fit->A *
                                std::exp(-pd.fit->B / std::pow(pt.magnitude, k)));
            csv.row({fmt_g15(pt.magnitude), fmt_g15(pt.norm), model});
        }
        const std::string path = join_path(
            opts.out_dir, slug + "_cocycle_p" + std::to_string(pd.a) + ".csv");
        write_file(path, csv.text());
        files.push_back(path);
    }
    root.set("pairs", std::move(pairs_json));

    // Stage 2: Cauchy-Heine coefficients, gated on the measured decay.
    std::string ch_skip;
    for (const PairData& pd : pairs)
        if (pd.fit && !(pd.fit->B > 0.0 && std::isfinite(pd.fit->B))) {
            ch_skip = "cocycle " + std::to_string(pd.a) + "-" + std::to_string(pd.b) +
                      " does not decay (fitted B <= 0)";
            break;
        }

    std::vector<cplx> a_hat;
    if (ch_skip.empty()) {
        std::vector<CauchyHeinePath> paths;
        double outer_scale = 0.0;
        for (const PairData& pd : pairs) {
            CauchyHeinePath path;
            path.direction = pd.overlap.direction;
            path.radius = cfg.rs.cut_factor * pd.overlap.radius;
            const SectorialSolution& sa = A.sols[pd.a];
            const SectorialSolution& sb = A.sols[pd.b];
            const cplx other = A.other_rep;
            path.theta = [&sa, &sb, other, z0](cplx xi) {
                return scalar_at(sb, other, z0, xi) - scalar_at(sa, other, z0, xi);
            };
            const cplx xi_out = std::polar(path.radius, path.direction);
            outer_scale = std::max(outer_scale,
                                   std::abs(scalar_at(sa, other, z0, xi_out)) +
                                       std::abs(scalar_at(sb, other, z0, xi_out)));
            paths.push_back(std::move(path));
        }
        CauchyHeineOptions cho;
        // Differences below the quadrature accuracy of the solution values
        // are measurement noise; integrating them against xi^{-n-1} would
        // swamp the high-order coefficients.
        cho.noise_floor = 1e-13 * outer_scale;
        try {
            a_hat = cauchy_heine_coefficients(paths, cfg.ch_n_max, cho);
        } catch (const std::domain_error& e) {
            ch_skip = e.what();
        }
    }

    if (ch_skip.empty()) {
        JsonValue ch = JsonValue::object();
        ch.set("n_max", JsonValue::integer(cfg.ch_n_max));
        JsonValue coeffs = JsonValue::array();
        CsvBuilder csv({"n", "re", "im", "abs"});
        for (std::size_t n = 0; n < a_hat.size(); ++n) {
            JsonValue cv = JsonValue::object();
            cv.set("n", JsonValue::integer(static_cast<long long>(n)));
            cv.set("re", JsonValue::number(a_hat[n].real()));
            cv.set("im", JsonValue::number(a_hat[n].imag()));
            cv.set("abs", JsonValue::number(std::abs(a_hat[n])));
            coeffs.push(std::move(cv));
            csv.row({std::to_string(n), fmt_g15(a_hat[n].real()),
                     fmt_g15(a_hat[n].imag()), fmt_g15(std::abs(a_hat[n]))});
        }
        ch.set("coefficients", std::move(coeffs));
        root.set("cauchy_heine", std::move(ch));
        const std::string path = join_path(opts.out_dir, slug + "_ch.csv");
        write_file(path, csv.text());
        files.push_back(path);
    } else {
        JsonValue ch = JsonValue::object();
        ch.set("skipped", JsonValue::string(ch_skip));
        root.set("cauchy_heine", std::move(ch));
    }

    // Stage 3: growth classification of the extracted coefficients.
    if (ch_skip.empty()) {
        std::vector<double> mags;
        for (cplx c : a_hat) mags.push_back(std::abs(c));
        try {
            root.set("classification", classification_json(classify_growth(mags)));
        } catch (const std::invalid_argument& e) {
            JsonValue cv = JsonValue::object();
            cv.set("skipped", JsonValue::string(e.what()));
            root.set("classification", std::move(cv));
        }
    } else {
        JsonValue cv = JsonValue::object();
        cv.set("skipped", JsonValue::string(ch_skip));
        root.set("classification", std::move(cv));
    }

    // Stage 4: remainder bound check. The norm variant selects the envelope:
    // the q-relative norm carries the Gevrey-shaped bound, the sup norm the
    // mixed-shaped one.
    const RsMode mode = norm.variant == NormSpec::Variant::q_relative ? RsMode::gevrey
                                                                      : RsMode::mixed;
    const RsBoundReport rs = rs_error_bound_check(A.sols, 0, norm, mode, cfg.rs);
    root.set("rs_bound", rs_json(rs));
    {
        CsvBuilder csv({"N", "x", "y", "envelope"});
        for (const MixedBoundSample& s : rs.samples) {
            const double q_eff = mode == RsMode::gevrey ? 1.0 : cfg.problem.q;
            const double env = rs.C * std::pow(rs.M, s.N) *
                               std::exp(std::lgamma(static_cast<double>(s.N) / k)) *
                               std::pow(q_eff, 0.5 * s.N * s.N) * std::pow(s.x, s.N);
            csv.row({std::to_string(s.N), fmt_g15(s.x), fmt_g15(s.y), fmt_g15(env)});
        }
        const std::string path = join_path(opts.out_dir, slug + "_rs.csv");
        write_file(path, csv.text());
        files.push_back(path);
    }

    const std::string json_path = join_path(opts.out_dir, slug + ".json");
    write_file(json_path, root.dump());
    files.insert(files.begin(), json_path);
    return {exit_ok, "asymptotics report written to " + json_path, files};
}

RunResult run_selftest(const SelftestOptions& opts, std::string* json_text) {
    JsonValue root = JsonValue::object();
    root.set("schema_version", JsonValue::integer(1));
    root.set("tool", JsonValue::string("qglab selftest"));
    root.set("quick", JsonValue::boolean(opts.quick));
    bool all = true;

    // Identity battery over randomized polynomial integrands.
    {
        const int draws = opts.quick ? 4 : 20;
        const std::vector<int> ks = opts.quick ? std::vector<int>{1, 2}
                                               : std::vector<int>{1, 2, 3};
        const IdentityBatteryResult bat =
            run_identity_battery(424242, draws, ks, opts.gamma_scale);
        all = all && bat.pass;
        JsonValue bv = JsonValue::object();
        bv.set("draws", JsonValue::integer(bat.draws));
        JsonValue kv = JsonValue::array();
        for (int kk : ks) kv.push(JsonValue::integer(kk));
        bv.set("orders", std::move(kv));
        bv.set("max_monomial", JsonValue::number(bat.max_monomial));
        bv.set("max_derivation", JsonValue::number(bat.max_derivation));
        bv.set("max_convolution", JsonValue::number(bat.max_convolution));
        bv.set("max_dilation", JsonValue::number(bat.max_dilation));
        bv.set("pass", JsonValue::boolean(bat.pass));
        root.set("identity_battery", std::move(bv));
    }

    // Flatness-fit exactness on noiseless synthetic decay, plus the free-k
    // recovery of a deliberately mis-ordered fit.
    {
        double errA = 0.0, errB = 0.0, min_r2 = 1.0;
        for (int kk : {1, 2, 3}) {
            std::vector<std::pair<double, double>> xy;
            for (int i = 0; i < 12; ++i) {
                const double x = 0.35 * std::pow(10.0, i / 11.0);
                xy.push_back({x, 2.0 * std::exp(-3.0 / std::pow(x, kk))});
            }
            const FlatnessFit fit = fit_exponential_flatness(xy, kk);
            errA = std::max(errA, std::abs(fit.A - 2.0));
            errB = std::max(errB, std::abs(fit.B - 3.0));
            min_r2 = std::min(min_r2, fit.r2);
        }
        std::vector<std::pair<double, double>> k1;
        for (int i = 0; i < 12; ++i) {
            const double x = 0.1 * std::pow(10.0, i / 11.0);
            k1.push_back({x, std::exp(-1.0 / x)});
        }
        const FlatnessFit rec = fit_exponential_flatness_free_k(k1, 0.25, 4.0);
        const bool pass = errA <= 1e-6 && errB <= 1e-6 && min_r2 >= 1.0 - 1e-9 &&
                          std::abs(rec.k - 1.0) <= 0.05;
        all = all && pass;
        JsonValue fv = JsonValue::object();
        fv.set("max_err_A", JsonValue::number(errA));
        fv.set("max_err_B", JsonValue::number(errB));
        fv.set("min_r2", JsonValue::number(min_r2));
        fv.set("free_k_recovered", JsonValue::number(rec.k));
        fv.set("pass", JsonValue::boolean(pass));
        root.set("flatness_battery", std::move(fv));
    }

    // Mixed-bound envelope: exact recovery, violation detection, and the
    // degenerate all-zero case.
    {
        const std::vector<double> xs = {0.02, 0.05, 0.1, 0.2};
        std::vector<MixedBoundSample> exact, viol, zero;
        for (int N = 1; N <= 5; ++N)
            for (double x : xs) {
                exact.push_back({N, x,
                                 std::pow(2.0, N) * std::tgamma(double(N)) *
                                     std::pow(1.5, 0.5 * N * N) * std::pow(x, N)});
                viol.push_back({N, x, std::exp(double(N) * N * N)});
                zero.push_back({N, x, 0.0});
            }
        const MixedBoundFit r = check_mixed_bound(exact, 1, 1.5);
        const MixedBoundFit v = check_mixed_bound(viol, 1, 1.5);
        const MixedBoundFit z = check_mixed_bound(zero, 1, 1.5);
        const bool pass = r.pass && std::abs(r.A - 1.0) <= 1e-6 &&
                          std::abs(r.B - 2.0) <= 1e-6 && !v.pass && z.pass &&
                          z.degenerate_zero;
        all = all && pass;
        JsonValue mv = JsonValue::object();
        mv.set("recovered_A", JsonValue::number(r.A));
        mv.set("recovered_B", JsonValue::number(r.B));
        mv.set("violation_detected", JsonValue::boolean(!v.pass));
        mv.set("degenerate_zero_pass", JsonValue::boolean(z.pass && z.degenerate_zero));
        mv.set("pass", JsonValue::boolean(pass));
        root.set("mixed_bound_battery", std::move(mv));
    }

    // Classifier separation battery: synthetic Gevrey and mixed sequences
    // with randomized prefactors.
    {
        std::mt19937 rng(987654);
        std::uniform_real_distribution<double> uc(0.5, 2.0), um(0.5, 3.0);
        const double svals[3] = {1.0 / 3.0, 0.5, 1.0};
        const double qvals[3] = {1.2, 1.5, 2.0};
        int correct = 0;
        const int total = 20;
        for (int i = 0; i < 10; ++i) {
            const double s = svals[i % 3], C = uc(rng), M = um(rng);
            std::vector<double> seq;
            for (int n = 0; n <= 24; ++n)
                seq.push_back(C * std::pow(M, n) * std::exp(s * std::lgamma(n + 1.0)));
            const GrowthClassification r = classify_growth(seq);
            if (r.verdict == GrowthClassification::Verdict::gevrey &&
                std::abs(r.s - s) <= 0.05)
                ++correct;
        }
        for (int i = 0; i < 10; ++i) {
            const double q = qvals[i % 3], s = (i % 2) ? 1.0 : 0.5;
            const double C = uc(rng), M = um(rng);
            std::vector<double> seq;
            for (int n = 0; n <= 24; ++n)
                seq.push_back(C * std::pow(M, n) * std::exp(s * std::lgamma(n + 1.0)) *
                              std::pow(q, 0.5 * n * n));
            const GrowthClassification r = classify_growth(seq);
            if (r.verdict == GrowthClassification::Verdict::mixed &&
                std::abs(r.s - s) <= 0.05 && std::abs(r.qhat - q) <= 0.1)
                ++correct;
        }
        const bool pass = correct == total;
        all = all && pass;
        JsonValue cv = JsonValue::object();
        cv.set("correct", JsonValue::integer(correct));
        cv.set("total", JsonValue::integer(total));
        cv.set("pass", JsonValue::boolean(pass));
        root.set("classifier_battery", std::move(cv));
    }

    root.set("pass", JsonValue::boolean(all));
    const std::string text = root.dump();
    if (json_text) *json_text = text;

    RunResult res;
    res.exit_code = all ? exit_ok : exit_contract_failure;
    res.message = all ? "all selftest batteries pass" : "selftest battery failure";
    if (!opts.out_dir.empty()) {
        const std::string path = join_path(opts.out_dir, "selftest.json");
        write_file(path, text);
        res.files.push_back(path);
    }
    return res;
}

}  // namespace qg
