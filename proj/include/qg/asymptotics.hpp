#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qg/assemble.hpp"
#include "qg/fitting.hpp"
#include "qg/geometry.hpp"

namespace qg {

// Weighted coefficient norm of a z-series h(x, z) = sum_n h_n(x) z^n / n!
// over a base sector in x: sum_{n<=levels} sup|h_n| R1^n / n!. The
// q-relative variant caps the n-th sup region at the disc of radius 1/q^n;
// the sup variant uses the full base sector at every level.
struct NormSpec {
    enum class Variant { q_relative, sup };
    Variant variant = Variant::q_relative;
    Sector base;
    double q = 2.0;
    double R1 = 0.5;
    int levels = 8;
    // Sup sampling (maximum-modulus: boundary arc + radial spokes).
    int arc_nodes = 16;
    int radial_nodes = 6;
    double inset = 1e-9;  // relative pull-back keeping samples strictly interior
};

// Deterministic sample grid for sup over (base sector) ∩ D(0, radius_cap):
// an outer arc plus geometric radial spokes along both edges and the
// bisector, pulled inside by the relative inset.
std::vector<cplx> make_sector_grid(const Sector& base, double radius_cap, int arc_nodes,
                                   int radial_nodes, double inset = 1e-9);

using LevelFunction = std::function<cplx(int n, cplx x)>;

struct SeriesNormResult {
    double value = 0.0;              // truncated sum over n <= levels
    double tail = 0.0;               // ratio-test extrapolation past the truncation
    std::vector<double> level_sups;  // per-n grid suprema (before weights)
};

// Truncated norm with sup taken over the sample grid; throws std::domain_error
// when a level has an empty sample set.
SeriesNormResult series_norm(const LevelFunction& h, const NormSpec& ns);

// Angular intersection of two sectors (radius = min); throws
// std::invalid_argument when the sectors do not overlap.
Sector sector_intersection(const Sector& a, const Sector& b);

struct CocyclePoint {
    cplx probe;         // parameter value (eps or t depending on the variant)
    double magnitude;   // |probe|
    double norm;        // series norm of the coefficient differences
    double tail;
};

struct CocycleReport {
    Sector overlap;                  // intersection of the parameter domains
    std::vector<CocyclePoint> points;
    double arc_margin = 0.0;  // min Laplace cosine margin met while sampling
};

// Norm of u_b - u_a at each probe of the shared parameter overlap, by
// differencing the solutions' coefficients on the norm grid. Probes outside
// the overlap raise std::domain_error.
CocycleReport cocycle(const SectorialSolution& a, const SectorialSolution& b,
                      const std::vector<cplx>& probes, const NormSpec& ns);

// One contour leg of the Cauchy-Heine construction: a ray segment from the
// origin to `radius` along `direction`, carrying the (exponentially flat)
// overlap difference theta.
struct CauchyHeinePath {
    double direction = 0.0;
    double radius = 0.0;
    std::function<cplx(cplx)> theta;
};

struct CauchyHeineOptions {
    int gl_points = 20;
    int panels_per_decade = 8;  // geometric refinement toward the origin
    double decades = 14.0;      // descent below the outer radius
    double noise_floor = 0.0;   // |theta| at or below this is treated as zero
    // Decay precondition: the deepest-decade max of |theta| must stay below
    // this fraction of the overall max.
    double decay_check_ratio = 1e-3;
};

// a_n = sum_paths (2*pi*i)^{-1} \int_Gamma theta(xi) xi^{-n-1} dxi for
// n = 0..n_max. Throws std::domain_error when a path's theta fails the
// decay-toward-the-origin precondition.
std::vector<cplx> cauchy_heine_coefficients(const std::vector<CauchyHeinePath>& paths,
                                            int n_max,
                                            const CauchyHeineOptions& opts = {});

enum class RsMode { gevrey, mixed };

struct RsBoundReport {
    RsMode mode = RsMode::gevrey;
    bool pass = false;
    double C = 0.0;              // fitted minimal constants of the envelope
    double M = 0.0;
    double violation = 0.0;      // max log-excess over the capped envelope
    bool degenerate_zero = false;
    std::vector<MixedBoundSample> samples;  // (N+1, |parameter|, remainder norm)
    std::string detail;
};

// Minimal-constant feasibility of the remainder inequality
//   norm <= C M^(N+1) Gamma((N+1)/k) [q^((N+1)^2/2)] |parameter|^(N+1):
// thin wrapper over check_mixed_bound (q = 1 in Gevrey mode). Samples carry
// the already-shifted order N+1.
RsBoundReport rs_fit_bound(const std::vector<MixedBoundSample>& samples, int k,
                           double q, RsMode mode);

struct RsOptions {
    std::vector<int> N_range{0, 1, 2, 3, 4};
    std::vector<double> radii{0.02, 0.03, 0.05, 0.08};  // |parameter| of the samples
    int n_z_levels = 4;        // z-levels of the norm actually used
    int circle_nodes = 64;     // trapezoid nodes for the regular part
    double circle_factor = 0.6;   // circle radius / cut-ray length
    double cut_factor = 0.9;      // cut-ray length / overlap radius
    CauchyHeineOptions ch;
};

// Full Ramis-Sibuya-shaped remainder verification for the solution family
// (one SectorialSolution per covering sector, cyclically adjacent): builds
// the asymptotic coefficients through Cauchy-Heine integrals along the
// overlap bisectors plus the regular part (circle integral of the
// cut-corrected family), forms truncated remainders in the chosen norm at
// samples along sector p's bisector, and fits the minimal envelope.
RsBoundReport rs_error_bound_check(const std::vector<SectorialSolution>& family, int p,
                                   const NormSpec& ns, RsMode mode,
                                   const RsOptions& opts = {});

}  // namespace qg
