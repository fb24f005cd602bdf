#pragma once

#include <functional>
#include <optional>

#include "qg/common.hpp"

namespace qg {

// Gamma(x) for real x > 0, x <= 170 (overflow guard). Relative error <= 1e-12.
double gamma_real(double x);

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1]; cached per n.
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

// Values of a function sampled along the ray arg(u) = direction.
// Radii are strictly increasing and positive. The origin is an implicit
// extra node carrying value_at_zero; coefficient samplings always have
// value_at_zero = 0 (Cauchy data and recursion output vanish at u = 0).
struct RaySampling {
    double direction = 0.0;
    std::vector<double> radii;
    std::vector<cplx> values;
    cplx value_at_zero{0.0, 0.0};

    void validate() const;
    double r_max() const { return radii.empty() ? 0.0 : radii.back(); }
};

// Geometric radius grid: about `per_decade` nodes per decade over `decades`
// decades up to r_max, plus extra exact radii (deduplicated, sorted).
std::vector<double> geometric_radii(double r_max, int per_decade, double decades,
                                    const std::vector<double>& extra = {});

// Local polynomial interpolation along a ray (default cubic), clamped
// one-sided stencils at the ends; the origin acts as an implicit node with
// value value_at_zero. r beyond the sampled range raises RayRangeError.
cplx interpolate_ray(const RaySampling& f, double r, int order = 3);

struct JacobiOptions {
    // Substitute tau = sigma^k_root on the lower half so integrands carrying a
    // tau^(1/k_root - 1) factor become regular.
    int k_root = 1;
    int gl_points = 20;
    // Geometric panel refinement toward both endpoints (ratio 2), down to
    // interval * 2^-depth.
    int depth = 42;
};

// \int_0^1 (1-tau)^(alpha-1) g(tau) dtau for alpha > 0 and g = O(tau^beta),
// beta > -1. The endpoint weight is absorbed exactly by v = (1-tau)^alpha on
// the upper half; the lower half uses the k_root substitution plus geometric
// panels.
cplx integrate_jacobi(const std::function<cplx(double)>& g, double alpha,
                      const JacobiOptions& opts = {});

}  // namespace qg
