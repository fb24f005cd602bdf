#include "qg/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qg/numerics.hpp"

namespace qg {

namespace {

cplx ipow(cplx b, int e) {
    cplx acc{1.0, 0.0};
    for (int i = 0; i < e; ++i) acc *= b;
    return acc;
}

// Geometric tail extrapolation from the last three nonzero terms (parity
// safe); infinite when the terms do not decay.
double ratio_tail(const std::vector<double>& terms, int beyond) {
    std::vector<int> nz;
    for (int i = 0; i < static_cast<int>(terms.size()); ++i)
        if (terms[i] > 0.0) nz.push_back(i);
    if (nz.size() < 2) return 0.0;
    const int i1 = nz[nz.size() >= 3 ? nz.size() - 3 : 0];
    const int i3 = nz.back();
    const double rho = std::pow(terms[i3] / terms[i1], 1.0 / (i3 - i1));
    if (rho >= 1.0) return std::numeric_limits<double>::infinity();
    return terms[i3] * std::pow(rho, beyond + 1 - i3) / (1.0 - rho);
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

// The asymptotic parameter lives on the covering sectors: eps for the
// eps-family, t for the t-family; the other variable spans the norm base.
const Sector& param_domain(const SectorialSolution& s) {
    return s.variant == Variant::eps_family ? s.par_dom : s.t_dom;
}

// Coefficient access with (norm-base point, asymptotic parameter) arguments,
// mapped onto solution_coefficient's fixed (t, eps) order per the variant.
cplx coeff_at(const SectorialSolution& s, int n, cplx base_pt, cplx param) {
    return s.variant == Variant::eps_family
               ? solution_coefficient(s, n, base_pt, param)
               : solution_coefficient(s, n, param, base_pt);
}

}  // namespace

std::vector<cplx> make_sector_grid(const Sector& base, double radius_cap, int arc_nodes,
                                   int radial_nodes, double inset) {
    base.validate();
    double rc = std::min(base.radius, radius_cap);
    if (!(rc > 0.0) || !std::isfinite(rc)) return {};
    rc *= (1.0 - inset);
    const double half = base.half_opening * (1.0 - inset);
    std::vector<cplx> grid;
    for (int i = 0; i < arc_nodes; ++i) {
        const double a = (arc_nodes == 1)
                             ? base.direction
                             : base.direction - half + 2.0 * half * i / (arc_nodes - 1);
        grid.push_back(std::polar(rc, a));
    }
    // Two decades of geometric descent along the edges and the bisector.
    for (const double a :
         {base.direction - half, base.direction, base.direction + half})
        for (int j = 1; j <= radial_nodes; ++j)
            grid.push_back(std::polar(rc * std::pow(10.0, -2.0 * j / radial_nodes), a));
    return grid;
}

SeriesNormResult series_norm(const LevelFunction& h, const NormSpec& ns) {
    if (!h) throw std::invalid_argument("series_norm: missing coefficient function");
    if (!(ns.R1 > 0.0)) throw std::invalid_argument("series_norm: R1 must be positive");
    if (ns.levels < 0) throw std::invalid_argument("series_norm: negative level count");

    SeriesNormResult res;
    std::vector<double> terms(ns.levels + 1, 0.0);
    for (int n = 0; n <= ns.levels; ++n) {
        const double cap = (ns.variant == NormSpec::Variant::q_relative)
                               ? std::pow(ns.q, -n)
                               : std::numeric_limits<double>::infinity();
        const std::vector<cplx> grid =
            make_sector_grid(ns.base, cap, ns.arc_nodes, ns.radial_nodes, ns.inset);
        if (grid.empty()) {
            std::ostringstream os;
            os << "series_norm: empty sample set at level " << n;
            throw std::domain_error(os.str());
        }
        double sup = 0.0;
        for (const cplx& x : grid) sup = std::max(sup, std::abs(h(n, x)));
        res.level_sups.push_back(sup);
        terms[n] = sup * std::pow(ns.R1, n) / factorial(n);
        res.value += terms[n];
    }
    res.tail = ratio_tail(terms, ns.levels);
    return res;
}

Sector sector_intersection(const Sector& a, const Sector& b) {
    a.validate();
    b.validate();
    const double d0 = wrap_angle(b.direction - a.direction + pi) - pi;
    double best_lo = 0.0, best_hi = -1.0;
    for (const double delta : {d0, d0 + 2.0 * pi, d0 - 2.0 * pi}) {
        const double lo = std::max(-a.half_opening, delta - b.half_opening);
        const double hi = std::min(a.half_opening, delta + b.half_opening);
        if (hi > lo && hi - lo > best_hi - best_lo) {
            best_lo = lo;
            best_hi = hi;
        }
    }
    if (!(best_hi > best_lo))
        throw std::invalid_argument("sector_intersection: sectors do not overlap");
    Sector s;
    s.direction = a.direction + 0.5 * (best_lo + best_hi);
    s.half_opening = 0.5 * (best_hi - best_lo);
    s.radius = std::min(a.radius, b.radius);
    return s;
}

CocycleReport cocycle(const SectorialSolution& a, const SectorialSolution& b,
                      const std::vector<cplx>& probes, const NormSpec& ns) {
    if (a.variant != b.variant)
        throw std::invalid_argument("cocycle: solutions use different variants");
    CocycleReport rep;
    rep.overlap = sector_intersection(param_domain(a), param_domain(b));
    rep.arc_margin = std::numeric_limits<double>::infinity();

    NormSpec local = ns;
    local.levels = std::min({ns.levels, a.N_z, b.N_z});
    const int k = a.provider->spec().k;

    for (const cplx& probe : probes) {
        if (!param_domain(a).contains(probe) || !param_domain(b).contains(probe)) {
            std::ostringstream os;
            os << "cocycle: probe (" << probe.real() << ", " << probe.imag()
               << ") outside the parameter overlap";
            throw std::domain_error(os.str());
        }
        auto h = [&](int n, cplx x) {
            const double phase = std::arg(probe * x);  // T = eps t either way
            rep.arc_margin = std::min(
                {rep.arc_margin, std::cos(k * (a.gamma - phase)),
                 std::cos(k * (b.gamma - phase))});
            return coeff_at(b, n, x, probe) - coeff_at(a, n, x, probe);
        };
        const SeriesNormResult nr = series_norm(h, local);
        rep.points.push_back({probe, std::abs(probe), nr.value, nr.tail});
    }
    return rep;
}

namespace {

struct PathSample {
    double r = 0.0;
    double w = 0.0;  // quadrature weight along the radius
    cplx theta{0.0, 0.0};
};

struct SampledPath {
    double direction = 0.0;
    std::vector<PathSample> samples;  // only nodes that were actually visited
    double max_abs = 0.0;
};

// Samples theta along the ray with geometric panels descending from the
// outer radius, stopping after two consecutive panels fall below the dead
// threshold. Enforces the decay-toward-origin precondition.
SampledPath sample_path(const CauchyHeinePath& path, const CauchyHeineOptions& opts,
                        double dead_rel) {
    if (!path.theta)
        throw std::invalid_argument("cauchy_heine: missing theta on a path");
    if (!(path.radius > 0.0) || !std::isfinite(path.radius))
        throw std::invalid_argument("cauchy_heine: path radius must be positive");

    SampledPath sp;
    sp.direction = path.direction;
    const GaussRule& rule = gauss_legendre(opts.gl_points);
    const int total_panels =
        std::max(1, static_cast<int>(std::ceil(opts.decades * opts.panels_per_decade)));
    const double g = std::pow(10.0, -1.0 / opts.panels_per_decade);
    double deep_max = 0.0;  // max |theta| over the deepest visited decade
    double deep_r = path.radius * std::pow(10.0, -(opts.decades - 1.0));
    int dead_streak = 0;
    bool stopped_early = false;

    double hi = path.radius;
    for (int pnl = 0; pnl < total_panels; ++pnl) {
        const double lo = hi * g;
        const double mid = 0.5 * (lo + hi), halfw = 0.5 * (hi - lo);
        double panel_max = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) {
            PathSample s;
            s.r = mid + halfw * rule.x[i];
            s.w = halfw * rule.w[i];
            s.theta = path.theta(std::polar(s.r, path.direction));
            if (std::abs(s.theta) <= opts.noise_floor) s.theta = cplx{0.0, 0.0};
            panel_max = std::max(panel_max, std::abs(s.theta));
            sp.samples.push_back(s);
        }
        sp.max_abs = std::max(sp.max_abs, panel_max);
        if (hi <= deep_r) deep_max = std::max(deep_max, panel_max);
        if (panel_max <= std::max(opts.noise_floor, dead_rel * sp.max_abs)) {
            if (++dead_streak >= 2) {
                stopped_early = true;
                break;
            }
        } else {
            dead_streak = 0;
        }
        hi = lo;
    }
    if (!stopped_early && sp.max_abs > 0.0 &&
        deep_max > opts.decay_check_ratio * sp.max_abs) {
        std::ostringstream os;
        os << "cauchy_heine: theta does not decay toward the origin along direction "
           << rad2deg(path.direction) << " deg (deep max " << deep_max
           << " vs overall " << sp.max_abs << ")";
        throw std::domain_error(os.str());
    }
    return sp;
}

// a_n contribution of one sampled path: (2 pi i)^{-1} e^{-i n d} sum w theta r^{-n-1}.
cplx path_coefficient(const SampledPath& sp, int n) {
    cplx acc{0.0, 0.0};
    for (const PathSample& s : sp.samples) {
        if (s.theta == cplx{0.0, 0.0}) continue;
        const double l = std::log(std::abs(s.theta)) - (n + 1) * std::log(s.r);
        if (l > 700.0)
            throw std::domain_error(
                "cauchy_heine: integrand overflow near the origin (theta not flat)");
        acc += s.w * s.theta * std::exp(-(n + 1) * std::log(s.r));
    }
    const cplx phase = std::polar(1.0, -static_cast<double>(n) * sp.direction);
    return acc * phase / cplx{0.0, 2.0 * pi};
}

// Cauchy transform of one sampled path at a point off the ray:
// (2 pi i)^{-1} int theta(xi) / (xi - eps) dxi.
cplx path_transform(const SampledPath& sp, cplx eps) {
    cplx acc{0.0, 0.0};
    const cplx dir = std::polar(1.0, sp.direction);
    for (const PathSample& s : sp.samples) {
        if (s.theta == cplx{0.0, 0.0}) continue;
        acc += s.w * s.theta * dir / (s.r * dir - eps);
    }
    return acc / cplx{0.0, 2.0 * pi};
}

constexpr double kDefaultDeadRel = 1e-18;  // noise-free synthetic data

}  // namespace

std::vector<cplx> cauchy_heine_coefficients(const std::vector<CauchyHeinePath>& paths,
                                            int n_max, const CauchyHeineOptions& opts) {
    if (n_max < 0) throw std::invalid_argument("cauchy_heine: negative n_max");
    std::vector<SampledPath> sampled;
    for (const CauchyHeinePath& p : paths) sampled.push_back(sample_path(p, opts, kDefaultDeadRel));
    std::vector<cplx> a(n_max + 1, cplx{0.0, 0.0});
    for (int n = 0; n <= n_max; ++n)
        for (const SampledPath& sp : sampled) a[n] += path_coefficient(sp, n);
    return a;
}

RsBoundReport rs_fit_bound(const std::vector<MixedBoundSample>& samples, int k,
                           double q, RsMode mode) {
    const double q_eff = (mode == RsMode::gevrey) ? 1.0 : q;
    const MixedBoundFit fit = check_mixed_bound(samples, k, q_eff);
    RsBoundReport rep;
    rep.mode = mode;
    rep.pass = fit.pass;
    rep.C = fit.A;
    rep.M = fit.B;
    rep.violation = fit.violation;
    rep.degenerate_zero = fit.degenerate_zero;
    rep.samples = samples;
    std::ostringstream os;
    os << (mode == RsMode::gevrey ? "gevrey" : "mixed") << " envelope: C = " << rep.C
       << ", M = " << rep.M << ", violation = " << rep.violation << ", "
       << samples.size() << " samples";
    rep.detail = os.str();
    return rep;
}

RsBoundReport rs_error_bound_check(const std::vector<SectorialSolution>& family, int p,
                                   const NormSpec& ns, RsMode mode,
                                   const RsOptions& opts) {
    const int P = static_cast<int>(family.size());
    if (P < 2)
        throw std::invalid_argument("rs_error_bound_check: need at least two sectors");
    if (p < 0 || p >= P)
        throw std::out_of_range("rs_error_bound_check: sector index");
    for (const SectorialSolution& s : family)
        if (s.variant != family[0].variant)
            throw std::invalid_argument("rs_error_bound_check: mixed variants");
    if (opts.N_range.empty() || opts.radii.empty())
        throw std::invalid_argument("rs_error_bound_check: empty sample plan");

    const ProblemSpec& spec = family[p].provider->spec();
    const int k = spec.k;
    const int n_max = *std::max_element(opts.N_range.begin(), opts.N_range.end());
    const int levels = std::min(opts.n_z_levels, family[p].N_z);

    // Cut rays along the cyclic overlap bisectors.
    std::vector<double> cut_dir(P), cut_radius(P);
    for (int j = 0; j < P; ++j) {
        const Sector ov = sector_intersection(param_domain(family[j]),
                                              param_domain(family[(j + 1) % P]));
        cut_dir[j] = ov.direction;
        cut_radius[j] = opts.cut_factor * ov.radius;
    }
    const double rho =
        opts.circle_factor * *std::min_element(cut_radius.begin(), cut_radius.end());

    // Trapezoid circle for the regular part; the half-step offset keeps nodes
    // off the cut directions.
    std::vector<cplx> circle(opts.circle_nodes);
    std::vector<int> circle_sector(opts.circle_nodes);
    for (int c = 0; c < opts.circle_nodes; ++c) {
        const double a = 2.0 * pi * (c + 0.5) / opts.circle_nodes;
        circle[c] = std::polar(rho, a);
        int best = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < P; ++j) {
            const double d =
                std::abs(wrap_angle(a - param_domain(family[j]).direction + pi) - pi);
            if (d < bestd) {
                bestd = d;
                best = j;
            }
        }
        circle_sector[c] = best;
    }

    // Remainder samples along sector p's bisector.
    std::vector<cplx> par_samples;
    for (double r : opts.radii)
        par_samples.push_back(std::polar(r, param_domain(family[p]).direction));

    // Per z-level: asymptotic coefficients on the level grid, then remainder
    // sups per (epsilon sample, truncation order).
    std::vector<std::vector<std::vector<double>>> sups(
        opts.N_range.size(),
        std::vector<std::vector<double>>(par_samples.size(),
                                         std::vector<double>(levels + 1, 0.0)));
    for (int nz = 0; nz <= levels; ++nz) {
        const double cap = (ns.variant == NormSpec::Variant::q_relative)
                               ? std::pow(ns.q, -nz)
                               : std::numeric_limits<double>::infinity();
        const std::vector<cplx> grid =
            make_sector_grid(ns.base, cap, ns.arc_nodes, ns.radial_nodes, ns.inset);
        if (grid.empty()) {
            std::ostringstream os;
            os << "rs_error_bound_check: empty norm grid at level " << nz;
            throw std::domain_error(os.str());
        }
        for (const cplx& t : grid) {
            // Cauchy-Heine part of the asymptotic coefficients at this point.
            std::vector<SampledPath> sampled;
            for (int j = 0; j < P; ++j) {
                CauchyHeinePath path;
                path.direction = cut_dir[j];
                path.radius = cut_radius[j];
                const SectorialSolution& lo = family[j];
                const SectorialSolution& hi = family[(j + 1) % P];
                path.theta = [&lo, &hi, nz, t](cplx xi) {
                    return coeff_at(hi, nz, t, xi) - coeff_at(lo, nz, t, xi);
                };
                // Differences below the quadrature accuracy of the two
                // solution values are measurement noise, not cocycle signal;
                // integrating them against xi^{-n-1} would pollute the
                // high-order coefficients.
                CauchyHeineOptions cho = opts.ch;
                const cplx xi_out = std::polar(cut_radius[j], cut_dir[j]);
                cho.noise_floor = std::max(
                    cho.noise_floor,
                    1e-13 * (std::abs(coeff_at(lo, nz, t, xi_out)) +
                             std::abs(coeff_at(hi, nz, t, xi_out))));
                sampled.push_back(sample_path(path, cho, 1e-11));
            }
            std::vector<cplx> a_hat(n_max + 1, cplx{0.0, 0.0});
            for (int n = 0; n <= n_max; ++n)
                for (const SampledPath& sp : sampled) a_hat[n] += path_coefficient(sp, n);

            // Regular part: the cut-corrected family is one analytic function
            // on the punctured disc; its Taylor coefficients come from the
            // circle trapezoid.
            for (int c = 0; c < opts.circle_nodes; ++c) {
                cplx psi = coeff_at(family[circle_sector[c]], nz, t, circle[c]);
                for (const SampledPath& sp : sampled)
                    psi -= path_transform(sp, circle[c]);
                const cplx w = psi / static_cast<double>(opts.circle_nodes);
                cplx epow{1.0, 0.0};
                for (int n = 0; n <= n_max; ++n) {
                    a_hat[n] += w * epow;
                    epow /= circle[c];
                }
            }

            // Truncated remainders at every sample, reusing one u evaluation.
            for (std::size_t e = 0; e < par_samples.size(); ++e) {
                const cplx par = par_samples[e];
                const cplx u = coeff_at(family[p], nz, t, par);
                for (std::size_t iN = 0; iN < opts.N_range.size(); ++iN) {
                    const int N = opts.N_range[iN];
                    cplx trunc{0.0, 0.0};
                    cplx ppow{1.0, 0.0};
                    for (int n = 0; n <= std::min(N, n_max); ++n) {
                        trunc += a_hat[n] * ppow;
                        ppow *= par;
                    }
                    sups[iN][e][nz] =
                        std::max(sups[iN][e][nz], std::abs(u - trunc));
                }
            }
        }
    }

    // Assemble norm values and fit the envelope.
    std::vector<MixedBoundSample> samples;
    for (std::size_t iN = 0; iN < opts.N_range.size(); ++iN)
        for (std::size_t e = 0; e < par_samples.size(); ++e) {
            double norm = 0.0;
            for (int nz = 0; nz <= levels; ++nz)
                norm += sups[iN][e][nz] * std::pow(ns.R1, nz) / factorial(nz);
            MixedBoundSample s;
            s.N = opts.N_range[iN] + 1;  // the theorem's exponent
            s.x = std::abs(par_samples[e]);
            s.y = norm;
            samples.push_back(s);
        }
    RsBoundReport rep = rs_fit_bound(samples, k, spec.q, mode);
    std::ostringstream os;
    os << rep.detail << "; sector " << p << ", " << levels + 1 << " z-levels, rho = "
       << rho;
    rep.detail = os.str();
    return rep;
}

}  // namespace qg
