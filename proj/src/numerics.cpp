#include "qg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace qg {

// Lanczos approximation, g = 7, 9 terms. Evaluated through logs so large
// arguments (up to the x <= 170 overflow guard) keep <= 1e-12 relative error.
double gamma_real(double x) {
    if (!(x > 0.0)) throw std::domain_error("gamma_real: requires x > 0");
    if (x > 170.0) throw std::domain_error("gamma_real: x > 170 overflows double range");
    if (x < 0.5) return gamma_real(x + 1.0) / x;  // one stable recurrence step

    static const double c[9] = {
        0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
        771.32342877765313,   -176.61502916214059, 12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

    const double z = x - 1.0;
    double a = c[0];
    for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
    const double t = z + 7.5;
    const double logg = 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(a);
    return std::exp(logg);
}

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 256) throw std::invalid_argument("gauss_legendre: n out of range");
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

void RaySampling::validate() const {
    if (radii.size() != values.size())
        throw std::invalid_argument("RaySampling: radii/values size mismatch");
    if (radii.empty()) throw std::invalid_argument("RaySampling: empty");
    double prev = 0.0;
    for (double r : radii) {
        if (!(r > prev)) throw std::invalid_argument("RaySampling: radii not strictly increasing positive");
        prev = r;
    }
    if (!std::isfinite(direction)) throw std::invalid_argument("RaySampling: direction not finite");
}

std::vector<double> geometric_radii(double r_max, int per_decade, double decades,
                                    const std::vector<double>& extra) {
    if (!(r_max > 0.0) || per_decade < 1 || !(decades > 0.0))
        throw std::invalid_argument("geometric_radii: bad parameters");
    const double ratio = std::pow(10.0, 1.0 / per_decade);
    const int count = static_cast<int>(std::ceil(decades * per_decade));
    std::vector<double> out;
    out.reserve(count + 1 + extra.size());
    for (int j = count; j >= 0; --j) out.push_back(r_max * std::pow(ratio, -j));
    for (double e : extra)
        if (e > 0.0 && e <= r_max * (1.0 + 1e-12)) out.push_back(std::min(e, r_max));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
              out.end());
    return out;
}

cplx interpolate_ray(const RaySampling& f, double r, int order) {
    if (order < 1) throw std::invalid_argument("interpolate_ray: order < 1");
    if (r < 0.0) throw std::invalid_argument("interpolate_ray: negative radius");
    if (r == 0.0) return f.value_at_zero;
    const auto& rad = f.radii;
    const int n = static_cast<int>(rad.size());
    if (n == 0) throw std::invalid_argument("interpolate_ray: empty sampling");
    if (r > rad[n - 1] * (1.0 + 1e-12))
        throw RayRangeError("interpolate_ray: radius beyond sampled range", r);
    const double rc = std::min(r, rad[n - 1]);

    // Stencil indices run over [-1, n-1]; index -1 is the implicit origin
    // node (0, 0).
    const int npts = std::min(order + 1, n + 1);
    const int hi = static_cast<int>(std::upper_bound(rad.begin(), rad.end(), rc) - rad.begin());
    int lo = hi - npts / 2;
    lo = std::max(-1, std::min(lo, n - npts));
    const int hi_end = lo + npts;

    // Lagrange evaluation on the stencil.
    cplx acc{0.0, 0.0};
    for (int i = lo; i < hi_end; ++i) {
        const double xi = (i < 0) ? 0.0 : rad[i];
        const cplx yi = (i < 0) ? f.value_at_zero : f.values[i];
        double w = 1.0;
        for (int j = lo; j < hi_end; ++j) {
            if (j == i) continue;
            const double xj = (j < 0) ? 0.0 : rad[j];
            w *= (rc - xj) / (xi - xj);
        }
        acc += w * yi;
    }
    return acc;
}

namespace {

// Gauss-Legendre over [a, b].
cplx gl_panel(const std::function<cplx(double)>& h, double a, double b, int pts) {
    const GaussRule& g = gauss_legendre(pts);
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * h(c + s * g.x[i]);
    return s * acc;
}

// Integrates h over (0, b] with geometric panel refinement toward 0.
cplx geometric_panels_to_zero(const std::function<cplx(double)>& h, double b, int pts,
                              int depth) {
    cplx acc{0.0, 0.0};
    double hi = b;
    for (int j = 0; j < depth; ++j) {
        const double lo = hi * 0.5;
        acc += gl_panel(h, lo, hi, pts);
        hi = lo;
    }
    acc += gl_panel(h, 0.0, hi, pts);
    return acc;
}

}  // namespace

cplx integrate_jacobi(const std::function<cplx(double)>& g, double alpha,
                      const JacobiOptions& opts) {
    if (!(alpha > 0.0)) throw std::domain_error("integrate_jacobi: requires alpha > 0");
    if (opts.k_root < 1) throw std::invalid_argument("integrate_jacobi: k_root < 1");

    // Lower half [0, 1/2]: tau = sigma^k_root removes a tau^(1/k_root - 1)
    // factor; remaining algebraic behavior is absorbed by the panels.
    const double k = static_cast<double>(opts.k_root);
    const double sigma_mid = std::pow(0.5, 1.0 / k);
    auto low = [&](double sigma) -> cplx {
        const double tau = std::pow(sigma, k);
        return std::pow(1.0 - tau, alpha - 1.0) * g(tau) * k * std::pow(sigma, k - 1.0);
    };
    const cplx i_low = geometric_panels_to_zero(low, sigma_mid, opts.gl_points, opts.depth);

    // Upper half [1/2, 1]: v = (1-tau)^alpha absorbs the weight exactly:
    // integral = (1/alpha) * int_0^{(1/2)^alpha} g(1 - v^(1/alpha)) dv.
    const double v_mid = std::pow(0.5, alpha);
    auto high = [&](double v) -> cplx { return g(1.0 - std::pow(v, 1.0 / alpha)); };
    const cplx i_high =
        geometric_panels_to_zero(high, v_mid, opts.gl_points, opts.depth) / alpha;

    return i_low + i_high;
}

}  // namespace qg
