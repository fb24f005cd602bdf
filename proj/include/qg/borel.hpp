#pragma once

#include <functional>
#include <map>
#include <memory>

#include "qg/common.hpp"
#include "qg/laplace.hpp"
#include "qg/numerics.hpp"
#include "qg/problem.hpp"

namespace qg {

struct SolverOptions {
    int N = 8;          // truncation order of the z-series
    double r_out = 1.0; // outer radius of the top (n = N) ray sampling
    int nodes_per_decade = 64;
    double decades = 6.0;
    // Septic keeps the interpolation error compounded through the recursion
    // and the Laplace quadrature near 1e-10, well inside the 1e-8
    // direction-independence and 1e-7 ray/disc consistency budgets.
    int interp_order = 7;
    int gl_points = 20;
    int jacobi_depth = 42;
    double small_divisor_rel = 1e-8;
    // Resource guard: the radius pyramid must not require sampling beyond
    // this radius (large N with strong dilation can blow it up).
    double max_pyramid_radius = 1e6;
    // Reproduce the literal dilation-factor exponent of the source recursion
    // (k1 in place of k in the l0 = 0 branch); off by default.
    bool literal_dilation_exponent = false;
    int disc_rays = 8;  // uniform directions of the shrinking-disc stack
    double disc_r0_factor = 0.75;  // R0 = factor * min |root of P(k u^k)|
    int disc_nodes_per_decade = 64;
    // As deep as the family rays: the recursion integral samples the previous
    // coefficient below its lowest node, where extrapolation decays linearly
    // while the coefficient itself decays like a high power; a shallow grid
    // lets that mismatch pollute the next coefficient near the origin.
    double disc_decades = 6.0;
};

// Coefficients on the shrinking discs D(0, R0/q^n): the common analytic
// extension shared by all Borel sectors, sampled on a fan of rays.
struct DiscStack {
    cplx eps{0.0, 0.0};
    double r0 = 0.0;
    double q = 1.0;
    int S = 1;
    int N = 0;
    std::vector<double> directions;
    std::vector<std::vector<RaySampling>> rays;  // [direction][n]
    std::vector<Poly> exact;                     // u-polynomials for n < S
    int interp_order = 7;

    double radius(int n) const { return r0 / std::pow(q, n); }
    int direction_index(double phase) const;  // exact match expected
    // interp_order <= 0 means "use the stack's stored order".
    cplx eval(int n, cplx u, int interp_order = 0) const;
};

// Coefficients omega_n along one Borel-sector ray, on the radius pyramid
// R_out(n) = r_out * q^(L * ceil((N - n) / sigma_min)) so that every dilated
// evaluation point q^l3 u stays inside the sampled range.
struct CoefficientFamily {
    int p = -1;  // sector index (bookkeeping only)
    double gamma = 0.0;
    cplx eps{0.0, 0.0};
    int S = 1;
    int N = 0;
    double r_out = 0.0;
    std::vector<RaySampling> ray;  // n = 0..N
    std::vector<Poly> exact;       // n < S
    std::shared_ptr<const DiscStack> disc;  // optional common extension
    int interp_order = 7;

    // interp_order <= 0 means "use the family's stored order".
    cplx eval_ray(int n, double r, int interp_order = 0) const;
    double outer_radius(int n) const { return ray.at(n).r_max(); }
};

// Evaluator of already-computed lower coefficients along the working ray.
using CoefficientAccess = std::function<cplx(int m, double r)>;

// One application of the coefficient recursion: returns omega_{n+S}(u, eps)
// at u = r e^{i phase} from the lower coefficients.
cplx recursion_step(const ProblemSpec& spec, int n, const CoefficientAccess& access,
                    double r, double phase, cplx eps, const SolverOptions& opts);

CoefficientFamily solve_family(const ProblemSpec& spec, double gamma, int p, cplx eps,
                               const SolverOptions& opts,
                               std::shared_ptr<const DiscStack> disc = nullptr);

// extra_directions are appended to the uniform fan (deduplicated) so sector
// rays can be compared against the disc stack directly.
std::shared_ptr<const DiscStack> solve_disc_stack(
    const ProblemSpec& spec, cplx eps, const SolverOptions& opts,
    const std::vector<double>& extra_directions = {});

// Laplace integrand for omega_n along the family ray, with a crude log-square
// growth envelope scanned from the samples (truncation-radius seeding only).
LaplaceIntegrand family_integrand(const CoefficientFamily& fam, const ProblemSpec& spec,
                                  int n);

// The four bound shapes of the coefficient proposition, named by role:
//   series_envelope  - |sum omega_n z^n/n!| <= 2 C3 |u| exp(k1 log^2(|u|+u0) + alpha log(|u|+u0))
//   ray_envelope     - |omega_n(u)| <= C3 (2R)^-n n! |u| exp(k1 log^2(|u|+u0) + alpha log(|u|+u0))
//   disc_envelope    - |omega_n(u)| <= C1 C2^n n! q^(-n^2 Delta) |u| on D(0, R0/q^n)
//   annulus_envelope - |omega_n(u)| <= C5 C6^n n! q^(-h^2 Delta) |u| on the h-th annulus
enum class BoundId { series_envelope, ray_envelope, disc_envelope, annulus_envelope };

struct BoundCaps {
    double log_c = 18.420680743952367;     // log 1e8: intercept constants
    double log_base = 9.210340371976184;   // log 1e4: per-n growth bases
};

struct BoundFitReport {
    BoundId id = BoundId::ray_envelope;
    bool pass = false;
    double violation = 0.0;  // max log-excess over the fitted bound
    std::map<std::string, double> constants;
    std::string detail;
};

// Fits the free constants one-sidedly (smallest total log-slack envelope,
// capped) and reports the residual violation; pass = violation <= 1e-9.
BoundFitReport verify_coeff_bounds(const CoefficientFamily& fam, const ProblemSpec& spec,
                                   BoundId id, double Delta, const BoundCaps& caps = {});

}  // namespace qg
