#include <cmath>
#include <complex>

#include "doctest.h"
#include "qg/laplace.hpp"
#include "qg/numerics.hpp"

using namespace qg;

namespace {

LaplaceIntegrand monomial(int h, double gamma) {
    LaplaceIntegrand f;
    f.eval = [h, gamma](double r) { return std::pow(std::polar(r, gamma), h); };
    f.growth = LaplaceIntegrand::Growth::log_square;
    f.alpha = h;
    return f;
}

}  // namespace

TEST_CASE("laplace of a monomial matches Gamma(h/k) T^h") {
    // k = 1, f = u, T = 0.3: Gamma(1) * 0.3 = 0.3.
    cplx v1 = laplace_ray(monomial(1, 0.0), 1, 0.0, cplx{0.3, 0.0});
    CHECK(std::abs(v1 - cplx{0.3, 0.0}) <= 1e-9);

    // k = 2, f = u^2, T = 0.5: Gamma(1) * 0.25 = 0.25.
    cplx v2 = laplace_ray(monomial(2, 0.0), 2, 0.0, cplx{0.5, 0.0});
    CHECK(std::abs(v2 - cplx{0.25, 0.0}) <= 1e-9);

    // Fractional Gamma factor: k = 2, f = u, T = 0.4.
    cplx v3 = laplace_ray(monomial(1, 0.0), 2, 0.0, cplx{0.4, 0.0});
    CHECK(std::abs(v3 - std::sqrt(pi) * 0.4) <= 1e-9);
}

TEST_CASE("monomial identity holds off-axis with margin 0.5") {
    // T = 0.3 e^{i pi/3}, gamma = 0: cos(1 * pi/3) = 0.5 margin.
    cplx T = std::polar(0.3, pi / 3.0);
    CHECK(check_monomial_identity(2, 1, 0.0, T) <= 1e-8);
    // k = 3 with gamma - arg T = 10 degrees: cos(30 deg) margin.
    cplx T3 = std::polar(0.25, deg2rad(35.0));
    CHECK(check_monomial_identity(1, 3, deg2rad(45.0), T3) <= 1e-8);
    CHECK(check_monomial_identity(4, 3, deg2rad(45.0), T3) <= 1e-8);
}

TEST_CASE("transform is homogeneous of degree h along the T ray") {
    LaplaceIntegrand f = monomial(3, 0.0);
    cplx base = laplace_ray(f, 1, 0.0, cplx{0.2, 0.0});
    for (double lam : {0.5, 1.3, 2.0}) {
        cplx v = laplace_ray(f, 1, 0.0, cplx{0.2 * lam, 0.0});
        CHECK(std::abs(v - base * std::pow(lam, 3)) <= 1e-8 * std::abs(v));
    }
}

TEST_CASE("derivation identity: k u^k multiplication maps to T^{k+1} d/dT") {
    LaplaceIntegrand f;
    f.eval = [](double r) {
        cplx u{r, 0.0};
        return u + 0.5 * u * u;
    };
    f.growth = LaplaceIntegrand::Growth::log_square;
    f.C = 1.5;
    f.alpha = 2.0;
    for (int k : {1, 2}) {
        double res = check_derivation_identity(f, k, 0.0, cplx{0.3, 0.0});
        CHECK(res <= 1e-6);
    }
}

TEST_CASE("star convolution against monomials is exact on monomials") {
    // m = 1, k = 1, f = u: u int_0^u (u-s)^0 s ds/s = u^2; at u = 2 -> 4.
    auto f = [](double r) { return cplx{r, 0.0}; };
    cplx v = conv_star(1, 1, f, 2.0, 0.0);
    CHECK(std::abs(v - cplx{4.0, 0.0}) <= 1e-10);

    // m = 2, k = 1, f = u: (u/Gamma(2)) int_0^u (u-s) ds = u^3/2; 0.5 at u = 1.
    cplx v2 = conv_star(2, 1, f, 1.0, 0.0);
    CHECK(std::abs(v2 - cplx{0.5, 0.0}) <= 1e-10);

    // m = 2, k = 2, f = u^2: u^2 int_0^{u^2} (u^2-s)^0 s ds/s = u^4.
    auto f2 = [](double r) { return cplx{r * r, 0.0}; };
    cplx v3 = conv_star(2, 2, f2, 1.5, 0.0);
    CHECK(std::abs(v3 - cplx{std::pow(1.5, 4), 0.0}) <= 1e-9);
}

TEST_CASE("convolution identity: u^m * f maps to T^m multiplication") {
    LaplaceIntegrand f = monomial(1, 0.0);
    // u^2 * u = u^3/2, so both sides equal T^3 = 0.008 at T = 0.2.
    double res = check_convolution_identity(f, 2, 1, 0.0, cplx{0.2, 0.0});
    CHECK(res <= 1e-8);

    LaplaceIntegrand g;
    g.eval = [](double r) {
        cplx u{r, 0.0};
        return u * u - 0.3 * u;
    };
    g.growth = LaplaceIntegrand::Growth::log_square;
    g.C = 1.3;
    g.alpha = 2.0;
    CHECK(check_convolution_identity(g, 1, 2, 0.0, cplx{0.4, 0.0}) <= 1e-7);
    CHECK(check_convolution_identity(g, 3, 2, 0.0, cplx{0.4, 0.0}) <= 1e-7);
}

TEST_CASE("pinned convolution transform value") {
    // u^1 * u = u^2, so L_1(u^1 * u)(T) = Gamma(2) T^2 = 0.04 at T = 0.2.
    LaplaceIntegrand f = monomial(1, 0.0);
    JacobiOptions jopts;
    LaplaceIntegrand conv;
    conv.eval = [&](double r) { return conv_star(1, 1, f.eval, r, 0.0, jopts); };
    conv.growth = LaplaceIntegrand::Growth::log_square;
    conv.alpha = 2.0;
    cplx v = laplace_ray(conv, 1, 0.0, cplx{0.2, 0.0});
    CHECK(std::abs(v - cplx{0.04, 0.0}) <= 1e-9);
}

TEST_CASE("dilation identity and its radius constraint") {
    // Polynomial integrand: no growth constraint, q^l3 transfers exactly.
    LaplaceIntegrand f = monomial(2, 0.0);
    CHECK(check_dilation_identity(f, 1.2, 1, 1, 0.0, cplx{0.25, 0.0}) <= 1e-8);
    CHECK(check_dilation_identity(f, 1.5, 2, 2, 0.0, cplx{0.3, 0.0}) <= 1e-8);

    // Exponential growth: fine inside the radius bound ...
    LaplaceIntegrand fe;
    fe.eval = [](double r) {
        cplx u{r, 0.0};
        return u * std::exp(0.4 * u);
    };
    fe.growth = LaplaceIntegrand::Growth::exponential;
    fe.K = 0.4;
    CHECK(check_dilation_identity(fe, 1.3, 1, 1, 0.0, cplx{0.9, 0.0}) <= 1e-7);
    // ... and rejected once q^{k l3} |T|^k reaches margin / K: need
    // |q T| < 0.9 / 0.4 = 2.25, so T = 2.0 with q = 1.3 violates it.
    CHECK_THROWS_AS(check_dilation_identity(fe, 1.3, 1, 1, 0.0, cplx{2.0, 0.0}),
                    std::domain_error);
}

TEST_CASE("direction margin below the floor raises DirectionError") {
    LaplaceIntegrand f = monomial(1, 0.0);
    // k = 2, gamma - arg T = 50 deg: cos(100 deg) < 0.
    CHECK_THROWS_AS(laplace_ray(f, 2, deg2rad(50.0), cplx{0.3, 0.0}), DirectionError);
    try {
        laplace_ray(f, 2, deg2rad(50.0), cplx{0.3, 0.0});
    } catch (const DirectionError& e) {
        CHECK(e.phase == doctest::Approx(deg2rad(50.0)));
    }
}

TEST_CASE("sampled integrands too short for the truncation radius raise RayRangeError") {
    RaySampling s;
    s.direction = 0.0;
    s.radii = geometric_radii(1.5, 24, 4.0);
    s.values.resize(s.radii.size());
    for (std::size_t i = 0; i < s.radii.size(); ++i) s.values[i] = cplx{s.radii[i], 0.0};
    LaplaceIntegrand f;
    f.eval = [&](double r) { return interpolate_ray(s, r); };
    f.max_radius = s.r_max();
    f.growth = LaplaceIntegrand::Growth::log_square;
    f.alpha = 1.0;
    // T = 0.3 needs a cut radius of roughly 2 * 0.3 * 33 >> 1.5.
    try {
        laplace_ray(f, 1, 0.0, cplx{0.3, 0.0});
        CHECK(false);
    } catch (const RayRangeError& e) {
        CHECK(e.needed_radius > 1.5);
    }
    // A small enough T fits inside the sampled range.
    cplx v = laplace_ray(f, 1, 0.0, cplx{0.02, 0.0});
    CHECK(std::abs(v - cplx{0.02, 0.0}) <= 1e-7 * 0.02);
}

TEST_CASE("identity battery passes at pinned tolerances and flags injected bugs") {
    IdentityBatteryResult r = run_identity_battery(20260814ull, 3, {1, 2});
    CHECK(r.pass);
    CHECK(r.max_monomial <= 1e-7);
    CHECK(r.max_derivation <= 1e-5);
    CHECK(r.max_convolution <= 1e-5);
    CHECK(r.max_dilation <= 1e-6);

    IdentityBatteryResult bad = run_identity_battery(20260814ull, 2, {1}, 1.0 + 2e-7);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_monomial > 1e-7);
}
