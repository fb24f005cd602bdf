#include <cmath>

#include "doctest.h"
#include "qg/numerics.hpp"

using namespace qg;

namespace {
double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}
double rel_err(cplx got, cplx want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}
}  // namespace

TEST_CASE("gamma_real: pinned values") {
    CHECK(rel_err(gamma_real(1.0), 1.0) <= 1e-13);
    CHECK(rel_err(gamma_real(0.5), std::sqrt(pi)) <= 1e-13);
    // Gamma(2.5) = 1.5 * 0.5 * sqrt(pi)
    CHECK(rel_err(gamma_real(2.5), 1.3293403881791370) <= 1e-12);
    CHECK(rel_err(gamma_real(6.0), 120.0) <= 1e-13);
    CHECK(rel_err(gamma_real(1.0 / 3.0), 2.6789385347077476) <= 1e-12);
}

TEST_CASE("gamma_real: recurrence oracle Gamma(x+1) = x Gamma(x)") {
    for (double x = 0.07; x < 150.0; x *= 1.37) {
        const double lhs = gamma_real(x + 1.0);
        const double rhs = x * gamma_real(x);
        CHECK(rel_err(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("gamma_real: domain guards") {
    CHECK_THROWS_AS(gamma_real(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_real(-2.5), std::domain_error);
    CHECK_THROWS_AS(gamma_real(171.0), std::domain_error);
    CHECK(std::isfinite(gamma_real(170.0)));
}

TEST_CASE("gauss_legendre: polynomial exactness and smooth integrand") {
    const GaussRule& g = gauss_legendre(8);
    for (int m = 0; m <= 15; m += 3) {  // degree <= 2n-1 = 15
        double acc = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * std::pow(g.x[i], m);
        const double want = (m % 2) ? 0.0 : 2.0 / (m + 1);
        CHECK(std::abs(acc - want) <= 1e-14);
    }
    const GaussRule& g20 = gauss_legendre(20);
    double acc = 0.0;
    for (std::size_t i = 0; i < g20.x.size(); ++i) acc += g20.w[i] * std::cos(g20.x[i]);
    CHECK(rel_err(acc, 2.0 * std::sin(1.0)) <= 1e-14);
}

TEST_CASE("geometric_radii: density, extras, ordering") {
    auto r = geometric_radii(1.0, 12, 3.0, {0.5, 0.77});
    CHECK(r.back() == doctest::Approx(1.0));
    CHECK(r.front() == doctest::Approx(1e-3).epsilon(1e-9));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
    bool has_half = false;
    for (double x : r) has_half = has_half || std::abs(x - 0.5) < 1e-15;
    CHECK(has_half);
}

TEST_CASE("interpolate_ray: origin node, nodal exactness, cubic reproduction") {
    RaySampling f;
    f.direction = 0.0;
    f.radii = geometric_radii(1.0, 16, 4.0);
    for (double r : f.radii) f.values.push_back(cplx{r * r * r - 2.0 * r, 0.5 * r});
    f.validate();
    // cubic interpolation reproduces a cubic exactly
    for (double r : {0.013, 0.11, 0.43, 0.77, 0.999}) {
        const cplx want{r * r * r - 2.0 * r, 0.5 * r};
        CHECK(rel_err(interpolate_ray(f, r), want) <= 1e-11);
    }
    // nodal exactness
    CHECK(interpolate_ray(f, f.radii[5]) == f.values[5]);
    // implicit origin
    CHECK(std::abs(interpolate_ray(f, 0.0)) == 0.0);
}

TEST_CASE("interpolate_ray: default-resolution accuracy on 1/(1+u^3)") {
    // Non-polynomial target at the documented default density (48/decade).
    RaySampling f;
    f.direction = 0.0;
    f.radii = geometric_radii(1.0, 48, 6.0);
    for (double r : f.radii) f.values.push_back(cplx{1.0 / (1.0 + r * r * r), 0.0});
    f.value_at_zero = cplx{1.0, 0.0};
    CHECK(rel_err(interpolate_ray(f, 0.5), cplx{8.0 / 9.0, 0.0}) <= 1e-6);
    CHECK(rel_err(interpolate_ray(f, 0.05), cplx{1.0 / (1.0 + 0.05 * 0.05 * 0.05), 0.0}) <= 1e-6);
}

TEST_CASE("interpolate_ray: superposition is exact") {
    RaySampling a, b, s;
    a.direction = b.direction = s.direction = 0.3;
    a.radii = b.radii = s.radii = geometric_radii(2.0, 10, 2.0);
    for (double r : a.radii) {
        a.values.push_back(cplx{std::sin(r), r});
        b.values.push_back(cplx{r * r, -0.25 * r});
    }
    for (std::size_t i = 0; i < a.radii.size(); ++i)
        s.values.push_back(a.values[i] + 3.0 * b.values[i]);
    for (double r : {0.031, 0.4, 1.7}) {
        const cplx lhs = interpolate_ray(s, r);
        const cplx rhs = interpolate_ray(a, r) + 3.0 * interpolate_ray(b, r);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("interpolate_ray: range error carries the needed radius") {
    RaySampling f;
    f.radii = {0.1, 0.2, 0.4, 0.8};
    f.values = {cplx{1, 0}, cplx{2, 0}, cplx{3, 0}, cplx{4, 0}};
    try {
        interpolate_ray(f, 1.5);
        FAIL("expected RayRangeError");
    } catch (const RayRangeError& e) {
        CHECK(e.needed_radius == doctest::Approx(1.5));
    }
}

TEST_CASE("integrate_jacobi: pinned examples") {
    auto one = [](double) { return cplx{1.0, 0.0}; };
    auto id = [](double t) { return cplx{t, 0.0}; };
    CHECK(rel_err(integrate_jacobi(one, 2.0), cplx{0.5, 0.0}) <= 1e-11);
    CHECK(rel_err(integrate_jacobi(id, 1.0), cplx{0.5, 0.0}) <= 1e-11);
    CHECK(rel_err(integrate_jacobi(id, 0.5), cplx{4.0 / 3.0, 0.0}) <= 1e-11);
}

TEST_CASE("integrate_jacobi: Beta-function oracle battery") {
    // int_0^1 (1-t)^(a-1) t^m dt = B(m+1, a) = Gamma(m+1)Gamma(a)/Gamma(m+1+a)
    for (double a : {0.25, 0.5, 1.0, 4.0 / 3.0, 2.0, 3.7}) {
        for (int m = 0; m <= 4; ++m) {
            auto g = [m](double t) { return cplx{std::pow(t, m), 0.0}; };
            const double want = gamma_real(m + 1.0) * gamma_real(a) / gamma_real(m + 1.0 + a);
            const cplx got = integrate_jacobi(g, a);
            CHECK(rel_err(got, cplx{want, 0.0}) <= 1e-9);
        }
    }
}

TEST_CASE("integrate_jacobi: k_root substitution handles t^(1/k - 1) factors") {
    JacobiOptions o2;
    o2.k_root = 2;
    auto g2 = [](double t) { return cplx{1.0 / std::sqrt(t), 0.0}; };
    // B(1/2, 1) = 2 and B(1/2, 1/2) = pi
    CHECK(rel_err(integrate_jacobi(g2, 1.0, o2), cplx{2.0, 0.0}) <= 1e-9);
    CHECK(rel_err(integrate_jacobi(g2, 0.5, o2), cplx{pi, 0.0}) <= 1e-9);

    JacobiOptions o3;
    o3.k_root = 3;
    auto g3 = [](double t) { return cplx{std::pow(t, 1.0 / 3.0 - 1.0), 0.0}; };
    // B(1/3, 2/3) = pi / sin(pi/3)
    CHECK(rel_err(integrate_jacobi(g3, 2.0 / 3.0, o3), cplx{pi / std::sin(pi / 3.0), 0.0}) <= 1e-9);
}

TEST_CASE("integrate_jacobi: complex linearity and domain guard") {
    auto g = [](double t) { return cplx{t, 2.0 * t * t}; };
    const cplx got = integrate_jacobi(g, 1.0);
    CHECK(rel_err(got, cplx{0.5, 2.0 / 3.0}) <= 1e-11);
    CHECK_THROWS_AS(integrate_jacobi(g, 0.0), std::domain_error);
    CHECK_THROWS_AS(integrate_jacobi(g, -1.0), std::domain_error);
}
