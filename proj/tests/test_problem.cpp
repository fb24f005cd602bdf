#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qg/numerics.hpp"
#include "qg/problem.hpp"

using namespace qg;

namespace {
const HypothesisLine* find_line(const HypothesisReport& rep, const std::string& id) {
    for (const auto& l : rep.lines)
        if (l.id == id) return &l;
    return nullptr;
}
}  // namespace

TEST_CASE("validate: reference problem passes with pinned slacks") {
    const auto spec = qgtest::make_toy1();
    const auto rep = validate(spec);
    CHECK(rep.all_pass);

    const auto* d1 = find_line(rep, "term0:h1:borel_weight_positivity");
    REQUIRE(d1 != nullptr);
    CHECK(d1->slack == doctest::Approx(1.0));  // 2(0-1)(1/2) + 2 + 0 - 0

    const auto* d2 = find_line(rep, "term0:h1:pyramid_domination");
    REQUIRE(d2 != nullptr);
    CHECK(d2->slack == doctest::Approx(0.5));  // rhs 0 - lhs (-1/2)

    const auto* d3 = find_line(rep, "term0:h1:dilation_weight_positivity");
    REQUIRE(d3 != nullptr);
    CHECK(d3->slack == doctest::Approx(1.0));  // -2(1/2)(1) + 2

    const auto* e3 = find_line(rep, "term0:symbol_degree_budget");
    REQUIRE(e3 != nullptr);
    CHECK(e3->slack == doctest::Approx(3.0 - 2.0 - 2.0 * std::log(1.2)).epsilon(1e-12));
}

TEST_CASE("validate: violations are reported line by line") {
    auto spec = qgtest::make_toy1();
    spec.terms[0].Delta_l = 1;  // below l0 = 2
    auto rep = validate(spec);
    CHECK_FALSE(rep.all_pass);
    const auto* l = find_line(rep, "term0:eps_weight_covers_t_power");
    REQUIRE(l != nullptr);
    CHECK_FALSE(l->pass);
    CHECK(l->slack == doctest::Approx(-1.0));

    spec = qgtest::make_toy1();
    spec.P = Poly({{1, 0}, {0, 0}, {1, 0}});  // degree 2: budget 2 < 2.3646
    rep = validate(spec);
    CHECK_FALSE(rep.all_pass);
    const auto* b = find_line(rep, "term0:symbol_degree_budget");
    REQUIRE(b != nullptr);
    CHECK_FALSE(b->pass);

    spec = qgtest::make_toy1();
    spec.terms[0].l2 = 1;  // l2 = S
    rep = validate(spec);
    CHECK_FALSE(find_line(rep, "term0:z_order_below_S")->pass);

    spec = qgtest::make_toy1();
    spec.q = 1.0;
    CHECK_FALSE(validate(spec).all_pass);

    spec = qgtest::make_toy1();
    spec.cauchy.p[0][0] = Poly({{1, 0}});  // constant term: omega_0(0) != 0
    CHECK_FALSE(find_line(validate(spec), "cauchy_vanishes_at_origin")->pass);
}

TEST_CASE("structural helpers") {
    const auto spec = qgtest::make_toy1();
    CHECK(spec.eps_independent());
    CHECK(spec.max_l3() == 1);
    CHECK(spec.sigma_min() == 2);  // S - l2 + h = 1 - 0 + 1
    CHECK_FALSE(qgtest::make_toy2().eps_independent());
}

TEST_CASE("cauchy_u_poly evaluates the Borel data at eps") {
    const auto spec = qgtest::make_toy2();
    const Poly p0 = cauchy_u_poly(spec, 0, cplx{0.05, 0.0});
    REQUIRE(p0.c.size() == 2);
    CHECK(std::abs(p0.c[1] - cplx{1.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(cauchy_u_poly(spec, 1, cplx{0.05, 0.0}), std::out_of_range);
}

TEST_CASE("phi_eval: pinned physical Cauchy values") {
    // omega_0 = u, k = 1: phi_0(t, eps) = Gamma(1) eps t.
    const auto spec = qgtest::make_toy1();
    CHECK(std::abs(phi_eval(spec, 0, cplx{2.0, 0.0}, cplx{0.1, 0.0}) - cplx{0.2, 0.0}) <= 1e-15);

    // omega_0 = u^2, k = 2: phi_0 = Gamma(1) (eps t)^2.
    ProblemSpec s2 = spec;
    s2.k = 2;
    s2.cauchy.p.clear();
    s2.cauchy.p[0][2] = Poly({{1, 0}});
    CHECK(std::abs(phi_eval(s2, 0, cplx{0.5, 0.0}, cplx{1.0, 0.0}) - cplx{0.25, 0.0}) <= 1e-15);

    // omega_0 = u + u^2, k = 1: phi_0(1, 1) = Gamma(1) + Gamma(2) = 2.
    ProblemSpec s3 = spec;
    s3.cauchy.p.clear();
    s3.cauchy.p[0][1] = Poly({{1, 0}});
    s3.cauchy.p[0][2] = Poly({{1, 0}});
    CHECK(std::abs(phi_eval(s3, 0, cplx{1.0, 0.0}, cplx{1.0, 0.0}) - cplx{2.0, 0.0}) <= 1e-12);
}

TEST_CASE("cauchy_to_physical and back is the identity") {
    std::map<int, std::map<int, Poly>> data;
    data[0][1] = Poly({{1, 0}, {0.5, -0.25}});
    data[0][3] = Poly({{0, 2}});
    data[2][2] = Poly({{-1, 1}});
    for (int k : {1, 2, 3}) {
        const auto phys = cauchy_to_physical(data, k);
        const auto back = physical_to_cauchy(phys, k);
        for (const auto& [j, hs] : data)
            for (const auto& [h, poly] : hs) {
                const auto& r = back.at(j).at(h);
                REQUIRE(r.c.size() == poly.c.size());
                for (std::size_t i = 0; i < poly.c.size(); ++i)
                    CHECK(std::abs(r.c[i] - poly.c[i]) <= 1e-14 * (1.0 + std::abs(poly.c[i])));
            }
        // scale check: Gamma(h/k) applied per power
        const auto& p = phys.at(0).at(3);
        CHECK(std::abs(p.c[0] - cplx{0, 2} * gamma_real(3.0 / k)) <= 1e-12);
    }
    CHECK_THROWS_AS(cauchy_to_physical({{0, {{0, Poly({{1, 0}})}}}}, 1), std::invalid_argument);
}
