#include "qg/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qg {

namespace {

cplx ipow(cplx b, int e) {
    cplx acc{1.0, 0.0};
    for (int i = 0; i < e; ++i) acc *= b;
    return acc;
}

bool same_angle(double a, double b) { return std::abs(wrap_angle(a - b + pi) - pi) < 1e-9; }

}  // namespace

FamilyProvider::FamilyProvider(ProblemSpec spec, SolverOptions opts)
    : spec_(std::move(spec)), opts_(opts), eps_independent_(spec_.eps_independent()) {}

cplx FamilyProvider::key_eps(cplx eps) const {
    return eps_independent_ ? cplx{0.0, 0.0} : eps;
}

std::shared_ptr<const CoefficientFamily> FamilyProvider::family(double gamma, int p,
                                                                cplx eps) {
    const cplx ke = key_eps(eps);
    const auto key = std::make_tuple(gamma, ke.real(), ke.imag());
    auto it = fams_.find(key);
    if (it != fams_.end()) return it->second;
    auto fam = std::make_shared<CoefficientFamily>(solve_family(spec_, gamma, p, ke, opts_));
    auto dit = discs_.find({ke.real(), ke.imag()});
    if (dit != discs_.end()) fam->disc = dit->second;
    fams_.emplace(key, fam);
    return fam;
}

std::shared_ptr<const DiscStack> FamilyProvider::disc(
    cplx eps, const std::vector<double>& extra_directions) {
    const cplx ke = key_eps(eps);
    const auto key = std::make_pair(ke.real(), ke.imag());
    auto it = discs_.find(key);
    if (it != discs_.end()) {
        bool covered = true;
        for (double d : extra_directions) {
            bool found = false;
            for (double have : it->second->directions)
                if (same_angle(d, have)) found = true;
            if (!found) {
                covered = false;
                break;
            }
        }
        if (covered) return it->second;
    }
    // Rebuild with the union of previously requested extras and the new ones.
    std::vector<double> dirs;
    if (it != discs_.end())
        dirs.assign(it->second->directions.begin() + opts_.disc_rays,
                    it->second->directions.end());
    dirs.insert(dirs.end(), extra_directions.begin(), extra_directions.end());
    auto stack = solve_disc_stack(spec_, ke, opts_, dirs);
    discs_[key] = stack;
    for (auto& [fk, fam] : fams_)
        if (std::get<1>(fk) == key.first && std::get<2>(fk) == key.second)
            fam->disc = stack;
    return stack;
}

DirectionChoice choose_direction_for_phases(const Sector& U, int k,
                                            const std::vector<double>& phases,
                                            double inset, double min_margin) {
    U.validate();
    if (phases.empty())
        throw std::invalid_argument("choose_direction_for_phases: empty phase set");
    if (U.half_opening <= inset)
        throw DirectionError("choose_direction_for_phases: sector narrower than the inset",
                             U.direction);
    const double lo = U.direction - U.half_opening + inset;
    const double hi = U.direction + U.half_opening - inset;
    auto margin_at = [&](double g) {
        double m = std::numeric_limits<double>::infinity();
        for (double ph : phases) m = std::min(m, std::cos(k * (g - ph)));
        return m;
    };
    double a = lo, b = hi;
    int pts = 2048;
    double best_g = lo, best_m = -std::numeric_limits<double>::infinity();
    for (int round = 0; round < 3; ++round) {
        double bg = a, bm = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= pts; ++i) {
            const double g = a + (b - a) * i / pts;
            const double m = margin_at(g);
            if (m > bm) {
                bm = m;
                bg = g;
            }
        }
        if (bm > best_m) {
            best_m = bm;
            best_g = bg;
        }
        const double w = 4.0 * (b - a) / pts;
        a = std::max(lo, bg - w);
        b = std::min(hi, bg + w);
        pts = 128;
    }
    if (!(best_m >= min_margin)) {
        double worst_ph = phases.front();
        double wm = std::numeric_limits<double>::infinity();
        for (double ph : phases) {
            const double m = std::cos(k * (best_g - ph));
            if (m < wm) {
                wm = m;
                worst_ph = ph;
            }
        }
        std::ostringstream os;
        os << "choose_direction_for_phases: best margin " << best_m
           << " below the required " << min_margin << " (worst kernel phase "
           << rad2deg(worst_ph) << " deg)";
        throw DirectionError(os.str(), worst_ph);
    }
    return {best_g, best_m};
}

namespace {

// Integrand for L_k((k u^k)^weight * omega_n) along the family ray, with the
// extra power folded into the log-square envelope: (k r^k)^w <= k^w (r+u0)^(kw).
LaplaceIntegrand weighted_integrand(const CoefficientFamily& fam, const ProblemSpec& spec,
                                    int n, int weight) {
    LaplaceIntegrand f = family_integrand(fam, spec, n);
    if (weight > 0) {
        const int k = spec.k;
        f.alpha += static_cast<double>(k) * weight;
        f.C *= std::pow(static_cast<double>(k), weight);
        auto base = f.eval;
        const double gamma = fam.gamma;
        f.eval = [base, k, weight, gamma](double r) {
            const cplx kuk =
                static_cast<double>(k) * std::polar(std::pow(r, k), k * gamma);
            return ipow(kuk, weight) * base(r);
        };
    }
    return f;
}

// Integrand for L_k(P(k u^k) * omega_n): |P(k u^k)| <= scale_at(k) (r+u0)^(k deg P).
LaplaceIntegrand symbol_weighted_integrand(const CoefficientFamily& fam,
                                           const ProblemSpec& spec, int n) {
    LaplaceIntegrand f = family_integrand(fam, spec, n);
    const int k = spec.k;
    f.alpha += static_cast<double>(k) * std::max(0, spec.P.degree());
    f.C *= spec.P.scale_at(static_cast<double>(k));
    auto base = f.eval;
    const double gamma = fam.gamma;
    const Poly P = spec.P;
    f.eval = [base, k, gamma, P](double r) {
        const cplx kuk = static_cast<double>(k) * std::polar(std::pow(r, k), k * gamma);
        return P.eval(kuk) * base(r);
    };
    return f;
}

void check_domains(const SectorialSolution& sol, cplx t, cplx eps) {
    if (!sol.t_dom.contains(t)) {
        std::ostringstream os;
        os << "point t = (" << t.real() << ", " << t.imag()
           << ") outside the solution's t-domain";
        throw std::domain_error(os.str());
    }
    if (!sol.par_dom.contains(eps)) {
        std::ostringstream os;
        os << "parameter eps = (" << eps.real() << ", " << eps.imag()
           << ") outside the solution's parameter domain";
        throw std::domain_error(os.str());
    }
}

}  // namespace

SectorialSolution assemble(std::shared_ptr<FamilyProvider> provider,
                           const AdmissibleConfig& config, Variant variant, int p,
                           const std::vector<cplx>& t_probes,
                           const std::vector<cplx>& eps_probes,
                           const AssembleOptions& opts) {
    if (!provider) throw std::invalid_argument("assemble: null provider");
    const auto& cov = config.covering.sectors;
    if (p < 0 || p >= static_cast<int>(cov.size()))
        throw std::out_of_range("assemble: sector index outside the covering");

    SectorialSolution sol;
    sol.variant = variant;
    sol.p = p;
    sol.N = provider->options().N;
    sol.N_z = (opts.N_z > 0) ? std::min(opts.N_z, sol.N) : sol.N;
    sol.R1 = opts.R1;
    sol.laplace = opts.laplace;
    if (variant == Variant::eps_family) {
        sol.par_dom = cov[p];
        sol.t_dom = config.companion;
    } else {
        sol.t_dom = cov[p];
        sol.par_dom = config.companion;
    }
    sol.borel = config.borel.at(p);
    sol.provider = std::move(provider);

    // Kernel phases arg(eps t) span the sum of the two domain arcs.
    const double c = sol.t_dom.direction + sol.par_dom.direction;
    const double w = sol.t_dom.half_opening + sol.par_dom.half_opening;
    const std::vector<double> phases{c - w, c - 0.5 * w, c, c + 0.5 * w, c + w};
    const DirectionChoice dc = choose_direction_for_phases(
        sol.borel, sol.provider->spec().k, phases, opts.inset, opts.min_margin);
    sol.gamma = dc.gamma;
    sol.margin = dc.margin;

    for (const cplx& eps : eps_probes) (void)sol.provider->family(sol.gamma, p, eps);
    for (const cplx& t : t_probes)
        for (const cplx& eps : eps_probes) {
            ProbeCache pc;
            pc.t = t;
            pc.eps = eps;
            pc.u_n.resize(sol.N + 1);
            for (int n = 0; n <= sol.N; ++n)
                pc.u_n[n] = solution_coefficient(sol, n, t, eps);
            sol.cache.push_back(std::move(pc));
        }
    return sol;
}

cplx solution_coefficient(const SectorialSolution& sol, int n, cplx t, cplx eps) {
    if (n < 0 || n > sol.N)
        throw std::out_of_range("solution_coefficient: coefficient index");
    check_domains(sol, t, eps);
    const ProblemSpec& spec = sol.provider->spec();
    auto fam = sol.provider->family(sol.gamma, sol.p, eps);
    const LaplaceIntegrand f = family_integrand(*fam, spec, n);
    return laplace_ray(f, spec.k, sol.gamma, eps * t, sol.laplace);
}

EvalResult evaluate(const SectorialSolution& sol, cplx t, cplx z, cplx eps) {
    if (!(std::abs(z) < sol.R1)) {
        std::ostringstream os;
        os << "evaluate: |z| = " << std::abs(z) << " outside the z-disc of radius "
           << sol.R1;
        throw std::domain_error(os.str());
    }
    check_domains(sol, t, eps);
    EvalResult res;
    std::vector<double> term(sol.N + 1, 0.0);
    cplx zn{1.0, 0.0};
    double fact = 1.0;
    for (int n = 0; n <= sol.N; ++n) {
        const cplx un = solution_coefficient(sol, n, t, eps);
        const cplx tn = un * zn / fact;
        if (n <= sol.N_z) res.value += tn;
        term[n] = std::abs(tn);
        zn *= z;
        fact *= static_cast<double>(n + 1);
    }
    // Remainder: computed lookahead terms beyond N_z, plus a geometric
    // extrapolation beyond the family from the last three nonzero terms.
    double rem = 0.0;
    for (int n = sol.N_z + 1; n <= sol.N; ++n) rem += term[n];
    std::vector<int> nz;
    for (int n = 0; n <= sol.N; ++n)
        if (term[n] > 0.0) nz.push_back(n);
    if (std::abs(z) > 0.0 && nz.size() >= 2) {
        const int i1 = nz[nz.size() >= 3 ? nz.size() - 3 : 0];
        const int i3 = nz.back();
        const double rho = std::pow(term[i3] / term[i1], 1.0 / (i3 - i1));
        if (rho >= 1.0)
            rem = std::numeric_limits<double>::infinity();
        else
            rem += term[i3] * std::pow(rho, sol.N + 1 - i3) / (1.0 - rho);
    }
    res.remainder = rem;
    return res;
}

PdeResidualReport pde_residual(const SectorialSolution& sol, cplx t, cplx z, cplx eps) {
    const ProblemSpec& spec = sol.provider->spec();
    if (!(std::abs(z) < sol.R1))
        throw std::domain_error("pde_residual: z outside the z-disc");
    check_domains(sol, t, eps);
    for (const MonomialTerm& term : spec.terms) {
        const cplx td = std::pow(spec.q, term.l3) * t;
        if (!sol.t_dom.contains(td)) {
            std::ostringstream os;
            os << "pde_residual: dilated point q^" << term.l3
               << " t outside the solution's t-domain";
            throw std::domain_error(os.str());
        }
    }
    auto fam = sol.provider->family(sol.gamma, sol.p, eps);
    const cplx T = eps * t;
    const int k = spec.k;

    PdeResidualReport rep;
    cplx lhs{0.0, 0.0}, rhs{0.0, 0.0};
    double largest = 0.0;

    // LHS: sum_{n <= N_z - S} L(P(k u^k) omega_{n+S})(T) z^n / n!.
    {
        cplx zn{1.0, 0.0};
        double fact = 1.0;
        for (int n = 0; n + spec.S <= sol.N_z; ++n) {
            const LaplaceIntegrand f = symbol_weighted_integrand(*fam, spec, n + spec.S);
            const cplx v = laplace_ray(f, k, sol.gamma, T, sol.laplace) * zn / fact;
            lhs += v;
            largest = std::max(largest, std::abs(v));
            zn *= z;
            fact *= static_cast<double>(n + 1);
        }
    }

    // RHS: per term, eps^Delta_l c_l(z,eps) t^l0 acting on the dilated,
    // weighted, z-shifted truncated series.
    for (const MonomialTerm& term : spec.terms) {
        const cplx Td = std::pow(spec.q, term.l3) * T;
        const cplx front = ipow(eps, term.Delta_l) * ipow(t, term.l0);
        // c_l(z, eps) = sum_h c_{l,h}(eps) z^h.
        cplx cl{0.0, 0.0};
        for (const auto& [h, chp] : term.c) cl += chp.eval(eps) * ipow(z, h);
        if (cl == cplx{0.0, 0.0} && front == cplx{0.0, 0.0}) continue;
        cplx series{0.0, 0.0};
        cplx zn{1.0, 0.0};
        double fact = 1.0;
        for (int n = 0; n + term.l2 <= sol.N_z; ++n) {
            const LaplaceIntegrand f = weighted_integrand(*fam, spec, n + term.l2, term.l1);
            series += laplace_ray(f, k, sol.gamma, Td, sol.laplace) * zn / fact;
            zn *= z;
            fact *= static_cast<double>(n + 1);
        }
        const cplx v = front * cl * series;
        rhs += v;
        largest = std::max(largest, std::abs(v));
    }

    rep.defect = lhs - rhs;
    rep.largest_term = largest;
    rep.residual = (largest == 0.0) ? 0.0 : std::abs(rep.defect) / largest;

    // Borel-identity cross-check: L(k u^k omega_n)(T) against the Richardson
    // finite difference of eps^k t^{k+1} d_t u_n along arg t.
    double fd_worst = 0.0;
    std::vector<int> ns{0};
    if (sol.N >= 2) ns.push_back(2);
    if (sol.N >= 4) ns.push_back(4);
    for (int n : ns) {
        const LaplaceIntegrand fw = weighted_integrand(*fam, spec, n, 1);
        const cplx ident = laplace_ray(fw, k, sol.gamma, T, sol.laplace);
        const cplx dir = t / std::abs(t);
        auto un_at = [&](cplx tt) { return solution_coefficient(sol, n, tt, eps); };
        auto diff = [&](double h) {
            return (un_at(t + h * dir) - un_at(t - h * dir)) / (2.0 * h * dir);
        };
        const double h = 1e-3 * std::abs(t);
        const cplx d = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
        const cplx fd = ipow(eps, k) * ipow(t, k + 1) * d;
        const double s = std::max({std::abs(ident), std::abs(fd), 1e-300});
        const double rel = std::abs(ident - fd) / s;
        if (std::abs(ident) > 1e-280 || std::abs(fd) > 1e-280)
            fd_worst = std::max(fd_worst, rel);
    }
    rep.fd_check = fd_worst;
    return rep;
}

double cache_reproduction_error(const SectorialSolution& sol) {
    double worst = 0.0;
    for (const ProbeCache& pc : sol.cache)
        for (int n = 0; n <= sol.N; ++n) {
            const cplx fresh = solution_coefficient(sol, n, pc.t, pc.eps);
            const double s = std::max({std::abs(fresh), std::abs(pc.u_n[n]), 1e-300});
            worst = std::max(worst, std::abs(fresh - pc.u_n[n]) / s);
        }
    return worst;
}

}  // namespace qg
