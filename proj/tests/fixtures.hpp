#pragma once

// Shared test fixtures: the reference dilation problem used across the test
// suites, plus its sectorial geometry.

#include <limits>

#include "qg/geometry.hpp"
#include "qg/problem.hpp"

namespace qgtest {

// Order-one problem with a single convolution term:
//   (1 + (eps t^2 d_t)^3 ... ) -- symbol P(tau) = 1 + tau^3, k = 1, S = 1,
//   q = 1.2, term (l0, l1, l2, l3) = (2, 0, 0, 1), Delta_l = 2, c = z,
//   Cauchy data omega_0 = u.
// Closed forms: omega_1 = omega_3 = 0 and
//   omega_2(u) = q u^3 / (2 (1 + u^3)).
inline qg::ProblemSpec make_toy1() {
    qg::ProblemSpec s;
    s.k = 1;
    s.S = 1;
    s.q = 1.2;
    s.eps0 = 0.1;
    s.P = qg::Poly({{1, 0}, {0, 0}, {0, 0}, {1, 0}});
    qg::MonomialTerm t;
    t.l0 = 2;
    t.l1 = 0;
    t.l2 = 0;
    t.l3 = 1;
    t.Delta_l = 2;
    t.c[1] = qg::Poly({{1, 0}});
    s.terms.push_back(t);
    s.cauchy.p[0][1] = qg::Poly({{1, 0}});
    s.Delta = 0.5;
    s.k1 = 1.0;
    return s;
}

// Same problem with Delta_l = 3: the recursion picks up one factor of eps
// per application, making coefficients genuinely eps-dependent
// (omega_2 = eps q u^3 / (2 (1 + u^3))).
inline qg::ProblemSpec make_toy2() {
    qg::ProblemSpec s = make_toy1();
    s.terms[0].Delta_l = 3;
    return s;
}

// Order-two problem with a pure dilation-derivative term: k = 2, S = 1,
// q = 1.2, symbol P(tau) = 1 + tau^2, term (l0, l1, l2, l3) = (0, 1, 0, 1),
// Delta_l = 0, c = z, omega_0 = u, k1 = 3.
// Closed forms: omega_1 = 0 and
//   omega_2(u) = 2 q^3 u^3 / (1 + 4 u^4)        (standard exponent k), or
//   omega_2(u) = 2 q^4 u^4 / (1 + 4 u^4)        (literal envelope exponent k1).
inline qg::ProblemSpec make_toy_dilation() {
    qg::ProblemSpec s;
    s.k = 2;
    s.S = 1;
    s.q = 1.2;
    s.eps0 = 0.1;
    s.P = qg::Poly({{1, 0}, {0, 0}, {1, 0}});
    qg::MonomialTerm t;
    t.l0 = 0;
    t.l1 = 1;
    t.l2 = 0;
    t.l3 = 1;
    t.Delta_l = 0;
    t.c[1] = qg::Poly({{1, 0}});
    s.terms.push_back(t);
    s.cauchy.p[0][1] = qg::Poly({{1, 0}});
    s.Delta = 0.5;
    s.k1 = 3.0;
    return s;
}

struct ToyGeometry {
    qg::GoodCovering covering;
    qg::Sector companion;
    std::vector<qg::Sector> borel;
};

// Three-sector covering over the asymptotic parameter, narrow companion
// sector, Borel sectors bisected between the symbol roots of 1 + u^3.
inline ToyGeometry make_toy1_geometry(double covering_radius = 0.1,
                                      double companion_radius = 0.8) {
    ToyGeometry g{{},
                  qg::Sector{0.0, qg::deg2rad(15), companion_radius},
                  {}};
    std::vector<qg::Sector> cov;
    for (int p = 0; p < 3; ++p) {
        cov.push_back(qg::Sector{qg::deg2rad(120.0 * p), qg::deg2rad(70), covering_radius});
        g.borel.push_back(qg::Sector{qg::deg2rad(120.0 * p), qg::deg2rad(55),
                                     std::numeric_limits<double>::infinity()});
    }
    g.covering = qg::GoodCovering::make(cov, covering_radius);
    return g;
}

}  // namespace qgtest
