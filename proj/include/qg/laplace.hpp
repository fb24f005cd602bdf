#pragma once

#include <functional>
#include <limits>

#include "qg/common.hpp"
#include "qg/numerics.hpp"

namespace qg {

// Integrand for the order-k ray Laplace transform. `eval` returns
// f(r e^{i gamma}) for the radius r along the transform's ray; the growth
// descriptor bounds |f| and places the truncation radius.
struct LaplaceIntegrand {
    std::function<cplx(double)> eval;
    double max_radius = std::numeric_limits<double>::infinity();

    enum class Growth { exponential, log_square } growth = Growth::exponential;
    // exponential:  |f| <= C r exp(K r^k), requires K < margin / |T|^k
    // log_square:   |f| <= C (r + u0)^alpha exp(k1 log^2(r + u0))
    double C = 1.0;
    double K = 0.0;
    double k1 = 0.0, alpha = 1.0, u0 = 1.0;
};

struct LaplaceOptions {
    double min_margin = 1e-3;  // required floor for cos(k (gamma - arg T))
    double tail_tol = 1e-12;   // analytic tail bound relative to the peak
    int gl_points = 20;
    int max_panels = 80;  // geometric panels from R_cut toward 0
};

// Order-k Laplace transform along the ray arg u = gamma:
//   k * int_0^{R_cut} f(r e^{i gamma}) exp(-(r e^{i gamma} / T)^k) dr / r.
// Errors: DirectionError when the cosine margin is below min_margin,
// std::domain_error when the growth rate defeats the kernel, RayRangeError
// when the needed truncation radius exceeds f.max_radius.
cplx laplace_ray(const LaplaceIntegrand& f, int k, double gamma, cplx T,
                 const LaplaceOptions& opts = {});

// Star convolution against the monomial u^m (m >= 1):
//   (u^m * f)(u) = u^k / Gamma(m/k) int_0^{u^k} (u^k - s)^(m/k - 1) f(s^(1/k)) ds / s
// evaluated at u = r e^{i gamma}; the path is the segment [0, u^k], which the
// k-th root maps back onto the ray through u.
cplx conv_star(int m, int k, const std::function<cplx(double)>& f_on_ray, double r,
               double gamma, const JacobiOptions& jopts = {});

// Relative residuals of the operational identities; each compares two
// independently computed sides. T must satisfy the identity's preconditions.
double check_monomial_identity(int h, int k, double gamma, cplx T,
                               const LaplaceOptions& opts = {});
double check_derivation_identity(const LaplaceIntegrand& f, int k, double gamma, cplx T,
                                 const LaplaceOptions& opts = {});
double check_convolution_identity(const LaplaceIntegrand& f, int m, int k, double gamma,
                                  cplx T, const LaplaceOptions& opts = {});
double check_dilation_identity(const LaplaceIntegrand& f, double q, int l3, int k,
                               double gamma, cplx T, const LaplaceOptions& opts = {});

struct IdentityBatteryResult {
    int draws = 0;
    double max_monomial = 0.0;
    double max_derivation = 0.0;
    double max_convolution = 0.0;
    double max_dilation = 0.0;
    bool pass = false;  // against the per-identity tolerances below
};

// Tolerances for the battery verdict (pinned; also used by the acceptance
// suite).
struct IdentityTolerances {
    double monomial = 1e-7;
    double derivation = 1e-5;
    double convolution = 1e-5;
    double dilation = 1e-6;
};

// Randomized identity battery: `draws` random degree <= 4 polynomials with
// unit-disc coefficients for each k in `ks`, all four identities per draw,
// plus one exponential-growth integrand per k exercising the dilation radius
// constraint. gamma_scale != 1 perturbs the monomial reference (selftest's
// injected-bug fixture).
IdentityBatteryResult run_identity_battery(std::uint64_t seed, int draws,
                                           const std::vector<int>& ks,
                                           double gamma_scale = 1.0,
                                           const IdentityTolerances& tol = {});

}  // namespace qg
