#include "qg/borel.hpp"

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace qg;
using qgtest::make_toy1;
using qgtest::make_toy2;
using qgtest::make_toy_dilation;

namespace {

double rel(cplx a, cplx b) {
    double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Symbolic value of omega_2 for the reference problem.
cplx toy1_omega2(cplx u, double q) { return q * u * u * u / (2.0 * (1.0 + u * u * u)); }

SolverOptions quick_opts(int N) {
    SolverOptions o;
    o.N = N;
    return o;
}

}  // namespace

TEST_CASE("toy1 family matches the symbolic oracle") {
    ProblemSpec spec = make_toy1();
    REQUIRE(validate(spec).all_pass);
    SolverOptions opts = quick_opts(4);
    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts);

    // Odd coefficients vanish identically (exact zeros, not just small).
    for (int n : {1, 3}) {
        for (const cplx& v : fam.ray.at(n).values) {
            CHECK(v.real() == 0.0);
            CHECK(v.imag() == 0.0);
        }
    }

    // omega_2 against the closed form on every node with |u| <= 1.
    double worst = 0.0;
    int used = 0;
    const RaySampling& rs = fam.ray.at(2);
    for (std::size_t i = 0; i < rs.radii.size(); ++i) {
        if (rs.radii[i] > 1.0) continue;
        worst = std::max(worst, rel(rs.values[i], toy1_omega2(rs.radii[i], spec.q)));
        ++used;
    }
    CHECK(used > 100);
    CHECK(worst <= 1e-8);

    // Pinned point (interpolated, so grid accuracy applies).
    CHECK(std::abs(fam.eval_ray(2, 0.5) - cplx{1.0 / 15.0, 0.0}) <= 1e-8);

    // omega_4 is finite everywhere on the gamma = 0 ray.
    for (const cplx& v : fam.ray.at(4).values) {
        CHECK(std::isfinite(v.real()));
        CHECK(std::isfinite(v.imag()));
        }
}

TEST_CASE("radius pyramid and resource cap") {
    ProblemSpec spec = make_toy1();  // L = 1, sigma_min = 2
    SolverOptions opts = quick_opts(4);
    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts);
    CHECK(fam.outer_radius(4) == doctest::Approx(1.0));
    CHECK(fam.outer_radius(3) == doctest::Approx(spec.q));
    CHECK(fam.outer_radius(2) == doctest::Approx(spec.q));
    CHECK(fam.outer_radius(1) == doctest::Approx(spec.q * spec.q));
    CHECK(fam.outer_radius(0) == doctest::Approx(spec.q * spec.q));

    SolverOptions capped = opts;
    capped.max_pyramid_radius = 1.3;  // < q^2 = 1.44
    CHECK_THROWS_AS(solve_family(spec, 0.0, 0, {0.05, 0.0}, capped), RayRangeError);
    try {
        solve_family(spec, 0.0, 0, {0.05, 0.0}, capped);
    } catch (const RayRangeError& e) {
        CHECK(e.needed_radius == doctest::Approx(spec.q * spec.q));
    }

    CHECK_THROWS_AS(solve_family(spec, 0.0, 0, {0.05, 0.0}, quick_opts(0)),
                    std::invalid_argument);
}

TEST_CASE("toy2 picks up one eps factor per application") {
    SolverOptions opts = quick_opts(2);
    const cplx eps{0.05, 0.02};
    CoefficientFamily f1 = solve_family(make_toy1(), 0.0, 0, eps, opts);
    CoefficientFamily f2 = solve_family(make_toy2(), 0.0, 0, eps, opts);
    const RaySampling& a = f1.ray.at(2);
    const RaySampling& b = f2.ray.at(2);
    REQUIRE(a.radii.size() == b.radii.size());
    for (std::size_t i = 0; i < a.radii.size(); ++i)
        CHECK(rel(b.values[i], eps * a.values[i]) <= 1e-12);
}

TEST_CASE("dilation-derivative fixture: standard vs literal envelope exponent") {
    ProblemSpec spec = make_toy_dilation();
    REQUIRE(validate(spec).all_pass);
    const double q = spec.q;

    SolverOptions opts = quick_opts(2);
    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts);
    for (const cplx& v : fam.ray.at(1).values) CHECK(std::abs(v) == 0.0);
    const RaySampling& rs = fam.ray.at(2);
    for (std::size_t i = 0; i < rs.radii.size(); ++i) {
        const double r = rs.radii[i];
        const cplx oracle{2.0 * q * q * q * r * r * r / (1.0 + 4.0 * r * r * r * r), 0.0};
        CHECK(rel(rs.values[i], oracle) <= 1e-12);
    }

    SolverOptions lit = opts;
    lit.literal_dilation_exponent = true;  // k1 = 3 replaces k = 2 in the factor
    CoefficientFamily lam = solve_family(spec, 0.0, 0, {0.05, 0.0}, lit);
    const RaySampling& ls = lam.ray.at(2);
    for (std::size_t i = 0; i < ls.radii.size(); ++i) {
        const double r = ls.radii[i];
        const cplx oracle{2.0 * std::pow(q * r, 3.0) * q * r / (1.0 + 4.0 * r * r * r * r),
                          0.0};
        CHECK(rel(ls.values[i], oracle) <= 1e-12);
    }
}

TEST_CASE("linearity in the Cauchy data") {
    ProblemSpec base = make_toy1();
    const cplx lambda{0.7, -1.3};
    ProblemSpec scaled = base;
    scaled.cauchy.p[0][1] = Poly({lambda});
    SolverOptions opts = quick_opts(4);
    CoefficientFamily fa = solve_family(base, 0.0, 0, {0.05, 0.0}, opts);
    CoefficientFamily fb = solve_family(scaled, 0.0, 0, {0.05, 0.0}, opts);
    for (int n = 0; n <= 4; ++n) {
        const RaySampling& a = fa.ray.at(n);
        const RaySampling& b = fb.ray.at(n);
        double sup = 0.0;
        for (const cplx& v : a.values) sup = std::max(sup, std::abs(v));
        for (std::size_t i = 0; i < a.radii.size(); ++i) {
            const cplx ref = lambda * a.values[i];
            // Norm-relative deviation everywhere; pointwise-relative wherever
            // the value carries meaningful support (grid-bottom values around
            // 1e-30 only see rounding of extrapolated interpolation).
            CHECK(std::abs(b.values[i] - ref) <= 1e-12 * std::abs(lambda) * sup + 1e-300);
            if (std::abs(a.values[i]) >= 1e-3 * sup)
                CHECK(rel(b.values[i], ref) <= 1e-12);
        }
    }
}

TEST_CASE("zero Cauchy data gives the all-zero family") {
    ProblemSpec spec = make_toy1();
    spec.cauchy.p[0][1] = Poly({{0.0, 0.0}});
    SolverOptions opts = quick_opts(4);
    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts);
    for (int n = 0; n <= 4; ++n)
        for (const cplx& v : fam.ray.at(n).values) CHECK(std::abs(v) == 0.0);
    BoundFitReport rep = verify_coeff_bounds(fam, spec, BoundId::ray_envelope, 0.5);
    CHECK(rep.pass);
    CHECK(rep.constants.at("C3") == 0.0);
}

TEST_CASE("grid convergence: doubled resolution moves values below 1e-6") {
    ProblemSpec spec = make_toy1();
    SolverOptions coarse = quick_opts(8);
    SolverOptions fine = coarse;
    fine.nodes_per_decade *= 2;
    fine.disc_nodes_per_decade *= 2;
    fine.gl_points *= 2;
    CoefficientFamily fc = solve_family(spec, 0.0, 0, {0.05, 0.0}, coarse);
    CoefficientFamily ff = solve_family(spec, 0.0, 0, {0.05, 0.0}, fine);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double r = 0.05 * std::pow(0.95 / 0.05, i / 40.0);
        worst = std::max(worst, rel(fc.eval_ray(8, r), ff.eval_ray(8, r)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("small-divisor guard near a symbol root") {
    ProblemSpec spec = make_toy1();  // P(u) = 1 + u^3 vanishes at u = e^{i pi/3}
    SolverOptions opts = quick_opts(4);
    CoefficientAccess access = [](int, double r) { return cplx{r, 0.0}; };
    CHECK_THROWS_AS(
        recursion_step(spec, 1, access, 1.0 + 1e-10, pi / 3.0, {0.05, 0.0}, opts),
        SmallDivisorError);
    try {
        recursion_step(spec, 1, access, 1.0 + 1e-10, pi / 3.0, {0.05, 0.0}, opts);
    } catch (const SmallDivisorError& e) {
        CHECK(std::abs(e.point - std::polar(1.0 + 1e-10, pi / 3.0)) <= 1e-9);
    }
    // Same point rotated off the root direction is fine.
    CHECK_NOTHROW(
        recursion_step(spec, 1, access, 1.0 + 1e-10, pi / 6.0, {0.05, 0.0}, opts));
}

TEST_CASE("disc stack: geometry, direction lookup, ray consistency") {
    ProblemSpec spec = make_toy1();
    SolverOptions opts = quick_opts(6);
    auto stack = solve_disc_stack(spec, {0.05, 0.0}, opts, {0.0, deg2rad(1e-10)});
    CHECK(stack->r0 == doctest::Approx(0.75));  // roots of 1 + u^3 on |u| = 1
    CHECK(stack->directions.size() == 8);       // extras deduplicated against the fan
    CHECK(stack->radius(3) == doctest::Approx(0.75 / std::pow(spec.q, 3)));
    CHECK(stack->direction_index(0.0) == 0);
    CHECK_THROWS_AS(stack->direction_index(deg2rad(7.0)), std::invalid_argument);

    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts, stack);
    double worst = 0.0;
    for (int n = 0; n <= 6; ++n) {
        const double cap = std::min(stack->radius(n), fam.outer_radius(n));
        for (int i = 0; i <= 24; ++i) {
            const double r = cap * 1e-3 * std::pow(0.98 / 1e-3, i / 24.0);
            const cplx a = fam.eval_ray(n, r);
            const cplx b = stack->eval(n, std::polar(r, 0.0));
            if (std::max(std::abs(a), std::abs(b)) < 1e-300) continue;
            worst = std::max(worst, rel(a, b));
        }
    }
    CHECK(worst <= 1e-7);

    // The stack is the common extension: evaluating on a fan direction works
    // for every n, and values at the origin vanish.
    CHECK(std::abs(stack->eval(2, cplx{0.0, 0.0})) == 0.0);
    const cplx v = stack->eval(2, std::polar(0.1, stack->directions[3]));
    CHECK(std::isfinite(v.real()));
}

TEST_CASE("coefficient envelopes: all four bound shapes hold on toy1") {
    ProblemSpec spec = make_toy1();
    SolverOptions opts = quick_opts(8);
    auto stack = solve_disc_stack(spec, {0.05, 0.0}, opts, {0.0});
    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts, stack);

    BoundFitReport ray = verify_coeff_bounds(fam, spec, BoundId::ray_envelope, 0.5);
    CHECK(ray.pass);
    CHECK(ray.constants.at("C3") > 0.0);
    CHECK(ray.constants.at("C3") < 1.0001e8);
    CHECK(ray.constants.at("R") > 0.0);

    BoundFitReport disc = verify_coeff_bounds(fam, spec, BoundId::disc_envelope, 0.5);
    CHECK(disc.pass);
    CHECK(disc.constants.at("C1") > 0.0);
    CHECK(disc.constants.at("C1") < 1.0001e8);
    CHECK(disc.constants.at("C2") < 1.0001e4);

    BoundFitReport ann = verify_coeff_bounds(fam, spec, BoundId::annulus_envelope, 0.5);
    CHECK(ann.pass);
    CHECK(ann.constants.at("C5") > 0.0);

    BoundFitReport ser = verify_coeff_bounds(fam, spec, BoundId::series_envelope, 0.5);
    CHECK(ser.pass);
    CHECK(ser.detail.find("series") != std::string::npos);
}

TEST_CASE("envelope verification rejects super-factorial growth") {
    ProblemSpec spec = make_toy1();
    // Hand-built family whose level-n values grow like exp(n^3): no
    // C (2R)^-n n! envelope (capped) can dominate that.
    CoefficientFamily fam;
    fam.S = 1;
    fam.N = 8;
    fam.gamma = 0.0;
    fam.r_out = 1.0;
    fam.exact.push_back(Poly({{0.0, 0.0}, {1.0, 0.0}}));
    for (int n = 0; n <= 8; ++n) {
        RaySampling rs;
        rs.direction = 0.0;
        rs.radii = geometric_radii(1.0, 8, 2.0);
        for (double r : rs.radii)
            rs.values.push_back(cplx{r * std::exp(static_cast<double>(n) * n * n), 0.0});
        rs.validate();
        fam.ray.push_back(rs);
    }
    BoundFitReport rep = verify_coeff_bounds(fam, spec, BoundId::ray_envelope, 0.5);
    CHECK_FALSE(rep.pass);
    CHECK(rep.violation > 1.0);

    // Disc-shaped checks demand the disc stack.
    CHECK_THROWS_AS(verify_coeff_bounds(fam, spec, BoundId::disc_envelope, 0.5),
                    std::invalid_argument);

    // Same growth injected into a disc stack.
    auto stack = std::make_shared<DiscStack>();
    stack->q = spec.q;
    stack->S = 1;
    stack->N = 8;
    stack->r0 = 0.75;
    stack->directions = {0.0};
    stack->exact.push_back(fam.exact[0]);
    stack->rays.resize(1);
    for (int n = 0; n <= 8; ++n) {
        RaySampling rs;
        rs.direction = 0.0;
        rs.radii = geometric_radii(stack->radius(n), 8, 2.0);
        for (double r : rs.radii)
            rs.values.push_back(cplx{r * std::exp(static_cast<double>(n) * n * n), 0.0});
        rs.validate();
        stack->rays[0].push_back(rs);
    }
    fam.disc = stack;
    BoundFitReport drep = verify_coeff_bounds(fam, spec, BoundId::disc_envelope, 0.5);
    CHECK_FALSE(drep.pass);

    CoefficientFamily empty;
    CHECK_THROWS_AS(verify_coeff_bounds(empty, spec, BoundId::ray_envelope, 0.5),
                    std::domain_error);
}

TEST_CASE("family integrand carries a dominating envelope") {
    ProblemSpec spec = make_toy1();
    SolverOptions opts = quick_opts(4);
    CoefficientFamily fam = solve_family(spec, 0.0, 0, {0.05, 0.0}, opts);
    LaplaceIntegrand f = family_integrand(fam, spec, 2);
    CHECK(f.max_radius == doctest::Approx(fam.outer_radius(2)));
    CHECK(f.growth == LaplaceIntegrand::Growth::log_square);
    CHECK(f.C > 0.0);
    const RaySampling& rs = fam.ray.at(2);
    for (std::size_t i = 0; i < rs.radii.size(); i += 7) {
        const double r = rs.radii[i];
        CHECK(rel(f.eval(r), rs.values[i]) <= 1e-9);
        const double L = std::log(r + f.u0);
        CHECK(std::abs(rs.values[i]) <= f.C * r * std::exp(f.k1 * L * L));
    }
}
