#include "qg/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace qg {

namespace {

double beta_real(double a, double b) {
    return gamma_real(a) * gamma_real(b) / gamma_real(a + b);
}

double log_envelope(const LaplaceIntegrand& f, int k, double r) {
    double lc = std::log(std::max(f.C, 1e-300));
    if (f.growth == LaplaceIntegrand::Growth::exponential)
        return lc + std::log(std::max(r, 1e-300)) + f.K * std::pow(r, k);
    double L = std::log(r + f.u0);
    return lc + f.alpha * L + f.k1 * L * L;
}

// Smallest radius at which the kernel has beaten the growth envelope down to
// tail_tol (with five extra e-foldings of slack) relative to its value at |T|.
double solve_r_cut(const LaplaceIntegrand& f, int k, double margin_over_Tk, double abs_T,
                   double tail_tol) {
    const double target = std::log(tail_tol) - 5.0;
    auto decay = [&](double r) {
        return log_envelope(f, k, r) - margin_over_Tk * std::pow(r, k);
    };
    const double ref = decay(abs_T);
    double r = 2.0 * abs_T;
    for (int i = 0; i < 4000 && decay(r) > ref + target; ++i) r *= 1.25;
    return r;
}

struct PanelSum {
    cplx total{0.0, 0.0};
    double abs_sum = 0.0;
    double outer_abs = 0.0;  // |contribution| of the outermost panel
};

}  // namespace

cplx laplace_ray(const LaplaceIntegrand& f, int k, double gamma, cplx T,
                 const LaplaceOptions& opts) {
    if (k < 1) throw std::invalid_argument("laplace_ray: k must be >= 1");
    if (!f.eval) throw std::invalid_argument("laplace_ray: missing integrand");
    const double abs_T = std::abs(T);
    if (!(abs_T > 0.0) || !std::isfinite(abs_T))
        throw std::invalid_argument("laplace_ray: T must be finite and nonzero");

    const double arg_T = std::arg(T);
    const double margin = std::cos(static_cast<double>(k) * (gamma - arg_T));
    if (!(margin >= opts.min_margin)) {
        std::ostringstream os;
        os << "laplace_ray: cosine margin " << margin << " below " << opts.min_margin
           << " for direction " << rad2deg(gamma) << " deg at arg T = " << rad2deg(arg_T)
           << " deg";
        throw DirectionError(os.str(), gamma);
    }

    const double margin_over_Tk = margin / std::pow(abs_T, k);
    if (f.growth == LaplaceIntegrand::Growth::exponential && f.K > 0.0 &&
        !(f.K <= 0.9 * margin_over_Tk)) {
        std::ostringstream os;
        os << "laplace_ray: growth rate K = " << f.K << " defeats the kernel; |T| must stay "
           << "below " << std::pow(0.9 * margin / f.K, 1.0 / k) << " (radius constraint)";
        throw std::domain_error(os.str());
    }

    const cplx w = std::pow(std::polar(1.0, gamma) / T, k);
    const GaussRule& rule = gauss_legendre(opts.gl_points);
    auto integrand = [&](double r) {
        return static_cast<double>(k) * f.eval(r) * std::exp(-w * std::pow(r, k)) / r;
    };
    auto panel = [&](double a, double b) {
        // Split so the exponent varies by at most ~3 per Gauss application.
        double var = std::abs(w) * (std::pow(b, k) - std::pow(a, k));
        int chunks = 1 + static_cast<int>(std::min(63.0, var / 3.0));
        cplx acc{0.0, 0.0};
        for (int c = 0; c < chunks; ++c) {
            double lo = a + (b - a) * c / chunks;
            double hi = a + (b - a) * (c + 1) / chunks;
            double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (std::size_t i = 0; i < rule.x.size(); ++i)
                acc += half * rule.w[i] * integrand(mid + half * rule.x[i]);
        }
        return acc;
    };

    // The envelope solve finds where the integrand itself is down to tail_tol;
    // doubling once puts the whole outermost panel past that point.
    double r_cut = 2.0 * solve_r_cut(f, k, margin_over_Tk, abs_T, opts.tail_tol);
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (r_cut > f.max_radius * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "laplace_ray: truncation radius " << r_cut << " exceeds sampled range "
               << f.max_radius;
            throw RayRangeError(os.str(), r_cut);
        }
        PanelSum s;
        double hi = r_cut;
        const double r_lo = abs_T * 1e-7;
        for (int p = 0; p < opts.max_panels && hi > 0.0; ++p) {
            double lo = (hi / 2.0 > r_lo) ? hi / 2.0 : 0.0;
            cplx c = panel(lo, hi);
            if (p == 0) s.outer_abs = std::abs(c);
            s.total += c;
            s.abs_sum += std::abs(c);
            hi = lo;
        }
        if (s.outer_abs <= 1e3 * opts.tail_tol * s.abs_sum + 1e-300) return s.total;
        r_cut *= 2.0;  // envelope underestimated the tail; push the cut out
    }
    throw std::runtime_error("laplace_ray: truncation tail failed to converge");
}

cplx conv_star(int m, int k, const std::function<cplx(double)>& f_on_ray, double r,
               double gamma, const JacobiOptions& jopts) {
    if (m < 1 || k < 1) throw std::invalid_argument("conv_star: m and k must be >= 1");
    if (!(r >= 0.0)) throw std::invalid_argument("conv_star: negative radius");
    if (r == 0.0) return cplx{0.0, 0.0};
    // Substituting s = u^k tau collapses the segment [0, u^k] onto the ray:
    //   (u^m / Gamma(m/k)) int_0^1 (1 - tau)^(m/k - 1) f(u tau^(1/k)) dtau / tau.
    JacobiOptions j = jopts;
    j.k_root = k;
    auto g = [&](double tau) { return f_on_ray(r * std::pow(tau, 1.0 / k)) / tau; };
    cplx um = std::pow(std::polar(r, gamma), m);
    return um / gamma_real(static_cast<double>(m) / k) *
           integrate_jacobi(g, static_cast<double>(m) / k, j);
}

double check_monomial_identity(int h, int k, double gamma, cplx T,
                               const LaplaceOptions& opts) {
    if (h < 1) throw std::invalid_argument("check_monomial_identity: h must be >= 1");
    LaplaceIntegrand f;
    f.eval = [h, gamma](double r) { return std::pow(std::polar(r, gamma), h); };
    f.growth = LaplaceIntegrand::Growth::log_square;
    f.C = 1.0;
    f.alpha = h;
    f.u0 = 1.0;
    cplx lhs = laplace_ray(f, k, gamma, T, opts);
    cplx ref = gamma_real(static_cast<double>(h) / k) * std::pow(T, h);
    return std::abs(lhs - ref) / std::abs(ref);
}

namespace {

LaplaceIntegrand scale_by_kuk(const LaplaceIntegrand& f, int k, double gamma) {
    LaplaceIntegrand g = f;
    g.eval = [f, k, gamma](double r) {
        return static_cast<double>(k) * std::pow(std::polar(r, gamma), k) * f.eval(r);
    };
    if (f.growth == LaplaceIntegrand::Growth::log_square) {
        g.alpha = f.alpha + k;
        g.C = f.C * k;
    } else {
        // r^k exp(K r^k) <= (1 / (0.1 e)) exp((K + 0.1) r^k)
        g.K = f.K + 0.1;
        g.C = f.C * k / (0.1 * std::exp(1.0));
    }
    return g;
}

LaplaceIntegrand convolve_envelope(const LaplaceIntegrand& f, int m, int k, double gamma,
                                   const JacobiOptions& jopts) {
    LaplaceIntegrand g = f;
    g.eval = [f, m, k, gamma, jopts](double r) { return conv_star(m, k, f.eval, r, gamma, jopts); };
    double bk = beta_real(static_cast<double>(m) / k, 1.0 / k) /
                gamma_real(static_cast<double>(m) / k);
    if (f.growth == LaplaceIntegrand::Growth::log_square) {
        g.alpha = f.alpha + m;
        g.C = f.C * (1.0 + bk);
    } else {
        g.K = f.K + 0.1;
        g.C = f.C * bk * std::pow(m / (0.1 * std::exp(1.0) * k), static_cast<double>(m) / k);
    }
    return g;
}

LaplaceIntegrand dilate_integrand(const LaplaceIntegrand& f, double q, int l3, int k) {
    double scale = std::pow(q, l3);
    LaplaceIntegrand g = f;
    g.eval = [f, scale](double r) { return f.eval(scale * r); };
    g.max_radius = f.max_radius / scale;
    if (f.growth == LaplaceIntegrand::Growth::log_square) {
        double dl = l3 * std::log(q);
        g.alpha = f.alpha + 2.0 * f.k1 * dl;
        g.C = f.C * std::exp(f.alpha * dl + f.k1 * dl * dl);
    } else {
        g.K = f.K * std::pow(q, static_cast<double>(k) * l3);
        g.C = f.C * scale;
    }
    return g;
}

double rel_diff(cplx a, cplx b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

double check_derivation_identity(const LaplaceIntegrand& f, int k, double gamma, cplx T,
                                 const LaplaceOptions& opts) {
    cplx lhs = laplace_ray(scale_by_kuk(f, k, gamma), k, gamma, T, opts);
    // T^{k+1} dF/dT via Richardson on F(T (1 +/- h)): D(h) -> T F'(T).
    auto D = [&](double h) {
        cplx fp = laplace_ray(f, k, gamma, T * (1.0 + h), opts);
        cplx fm = laplace_ray(f, k, gamma, T * (1.0 - h), opts);
        return (fp - fm) / (2.0 * h);
    };
    const double h = 1e-3;
    cplx tfp = (4.0 * D(h / 2.0) - D(h)) / 3.0;
    cplx rhs = std::pow(T, k) * tfp;
    return rel_diff(lhs, rhs);
}

double check_convolution_identity(const LaplaceIntegrand& f, int m, int k, double gamma,
                                  cplx T, const LaplaceOptions& opts) {
    JacobiOptions jopts;
    cplx lhs = laplace_ray(convolve_envelope(f, m, k, gamma, jopts), k, gamma, T, opts);
    cplx rhs = std::pow(T, m) * laplace_ray(f, k, gamma, T, opts);
    return rel_diff(lhs, rhs);
}

double check_dilation_identity(const LaplaceIntegrand& f, double q, int l3, int k,
                               double gamma, cplx T, const LaplaceOptions& opts) {
    if (!(q > 1.0)) throw std::invalid_argument("check_dilation_identity: q must be > 1");
    if (l3 < 0) throw std::invalid_argument("check_dilation_identity: l3 must be >= 0");
    cplx lhs = laplace_ray(dilate_integrand(f, q, l3, k), k, gamma, T, opts);
    cplx rhs = laplace_ray(f, k, gamma, std::pow(q, l3) * T, opts);
    return rel_diff(lhs, rhs);
}

IdentityBatteryResult run_identity_battery(std::uint64_t seed, int draws,
                                           const std::vector<int>& ks, double gamma_scale,
                                           const IdentityTolerances& tol) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    IdentityBatteryResult out;
    LaplaceOptions opts;

    for (int k : ks) {
        for (int d = 0; d < draws; ++d) {
            // Random polynomial with unit-disc coefficients, vanishing at 0.
            std::vector<cplx> coef(5, cplx{0.0, 0.0});
            double cnorm = 0.0;
            for (int h = 1; h <= 4; ++h) {
                double rho = 0.2 + 0.8 * unit(rng);
                coef[h] = std::polar(rho, 2.0 * pi * unit(rng));
                cnorm += rho;
            }
            double gamma = -pi + 2.0 * pi * unit(rng);
            double phi = 0.9 * (pi / (3.0 * k)) * (2.0 * unit(rng) - 1.0);
            double aT = 0.1 + 0.4 * unit(rng);
            cplx T = std::polar(aT, gamma + phi);

            LaplaceIntegrand f;
            f.eval = [coef, gamma](double r) {
                cplx u = std::polar(r, gamma), acc{0.0, 0.0};
                for (int h = 4; h >= 1; --h) acc = (acc + coef[h]) * u;
                return acc;
            };
            f.growth = LaplaceIntegrand::Growth::log_square;
            f.C = cnorm;
            f.alpha = 4.0;
            f.u0 = 1.0;

            // Monomial identity with an exact reference (gamma_scale perturbs
            // the reference to model an injected bug).
            int h = 1 + d % 4;
            LaplaceIntegrand mono;
            mono.eval = [h, gamma](double r) { return std::pow(std::polar(r, gamma), h); };
            mono.growth = LaplaceIntegrand::Growth::log_square;
            mono.alpha = h;
            cplx lm = laplace_ray(mono, k, gamma, T, opts);
            cplx ref = gamma_scale * gamma_real(static_cast<double>(h) / k) * std::pow(T, h);
            out.max_monomial = std::max(out.max_monomial, std::abs(lm - ref) / std::abs(ref));

            out.max_derivation =
                std::max(out.max_derivation, check_derivation_identity(f, k, gamma, T, opts));
            int m = 1 + static_cast<int>(rng() % 3);
            out.max_convolution = std::max(out.max_convolution,
                                           check_convolution_identity(f, m, k, gamma, T, opts));
            double q = 1.1 + 0.9 * unit(rng);
            int l3 = static_cast<int>(rng() % 3);
            out.max_dilation =
                std::max(out.max_dilation, check_dilation_identity(f, q, l3, k, gamma, T, opts));
            ++out.draws;
        }

        // One exponential-growth integrand per k: the dilation radius
        // constraint is active (|T| sized to leave a factor-2 safety margin).
        double q = 1.3;
        int l3 = 1;
        double K = 0.4;
        LaplaceIntegrand fe;
        fe.eval = [K, k](double r) {
            cplx u = std::polar(r, 0.0);
            return u * std::exp(K * std::pow(u, k));
        };
        fe.growth = LaplaceIntegrand::Growth::exponential;
        fe.C = 1.0;
        fe.K = K;
        cplx T = std::polar(0.7 * std::pow(1.0 / (K * std::pow(q, k * l3)), 1.0 / k), 0.0);
        out.max_derivation =
            std::max(out.max_derivation, check_derivation_identity(fe, k, 0.0, T, opts));
        out.max_dilation =
            std::max(out.max_dilation, check_dilation_identity(fe, q, l3, k, 0.0, T, opts));
    }

    out.pass = out.max_monomial <= tol.monomial && out.max_derivation <= tol.derivation &&
               out.max_convolution <= tol.convolution && out.max_dilation <= tol.dilation;
    return out;
}

}  // namespace qg
